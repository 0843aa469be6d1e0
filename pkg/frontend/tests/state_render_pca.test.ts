// Session clamping, byte quantization, shape handling, and the 2-D
// projection of component means.

import { describe, expect, it } from "vitest";
import { ModelInfo } from "../src/api.js";
import { meansProjection } from "../src/pca.js";
import { frameFromFlat, grayBytes, toByte } from "../src/render.js";
import { ALPHA_RANGE, T_RANGE, UiSession } from "../src/state.js";

const info: ModelInfo = {
  latent_dim: 3,
  classes: [1, 2, 3],
  means: [
    [0, 0, 0],
    [1, 0, 0],
    [0, 2, 0],
  ],
  masses: [0.3, 0.3, 0.4],
  input_shape: [4],
};

describe("UiSession", () => {
  it("clamps sliders to their declared ranges", () => {
    const s = new UiSession(info);
    s.t = 1.7;
    expect(s.t).toBe(T_RANGE[1]);
    s.t = -0.4;
    expect(s.t).toBe(T_RANGE[0]);
    s.alpha = 9;
    expect(s.alpha).toBe(ALPHA_RANGE[1]);
    s.alpha = -1;
    expect(s.alpha).toBe(ALPHA_RANGE[0]);
  });

  it("validates class picks and code dimension", () => {
    const s = new UiSession(info);
    expect(() => s.pickClass("target", 9)).toThrow();
    expect(() => s.setCode([1, 2], 1)).toThrow();
  });

  it("computes the transferred code from the served means", () => {
    const s = new UiSession(info);
    s.setCode([0.5, 0.5, 0.5], 1);
    s.pickClass("source", 1);
    s.pickClass("target", 3);
    expect(s.transferredCode()).toEqual([0.5, 2.5, 0.5]);
  });

  it("hits both endpoints of the transfer segment exactly", () => {
    const s = new UiSession(info);
    s.setCode([0.1, 0.2, 0.3], 1);
    s.pickClass("source", 1);
    s.pickClass("target", 2);
    s.t = 0;
    expect(s.codeAtT()).toEqual([0.1, 0.2, 0.3]);
    s.t = 1;
    expect(s.codeAtT()).toEqual(s.transferredCode());
  });

  it("disables transfer for single-class models", () => {
    const single = { ...info, classes: [1], means: [[0, 0, 0]], masses: [1] };
    expect(new UiSession(single).transferEnabled).toBe(false);
    expect(new UiSession(info).transferEnabled).toBe(true);
  });
});

describe("render", () => {
  it("quantizes with round(clamp(v) * 255)", () => {
    expect(toByte(0)).toBe(0);
    expect(toByte(1)).toBe(255);
    expect(toByte(255 / 255 + 0.2)).toBe(255);
    expect(toByte(-3)).toBe(0);
    expect(toByte(0.5)).toBe(128); // round half up
    expect(Array.from(grayBytes([0, 0.25, 1.5]))).toEqual([0, 64, 255]);
  });

  it("renders vectors as a one-pixel strip", () => {
    const frame = frameFromFlat([0, 1], [2]);
    expect(frame.width).toBe(2);
    expect(frame.height).toBe(1);
    expect(Array.from(frame.rgba)).toEqual([0, 0, 0, 255, 255, 255, 255, 255]);
  });

  it("renders HxW grayscale and HxWx3 color", () => {
    const gray = frameFromFlat([0, 0.5, 0.5, 1], [2, 2]);
    expect(gray.width).toBe(2);
    expect(gray.rgba[4]).toBe(gray.rgba[5]); // r == g for grayscale
    const rgb = frameFromFlat([1, 0, 0, 0, 1, 0], [1, 2, 3]);
    expect(Array.from(rgb.rgba)).toEqual([255, 0, 0, 255, 0, 255, 0, 255]);
  });

  it("rejects mismatched flat sizes", () => {
    expect(() => frameFromFlat([1, 2, 3], [2, 2])).toThrow();
  });
});

describe("meansProjection", () => {
  it("shows K points and preserves in-plane geometry", () => {
    const proj = meansProjection(info.means);
    expect(proj.points).toHaveLength(3);
    // the three means span exactly two dimensions, so pairwise distances survive
    const d = (a: [number, number], b: [number, number]) =>
      Math.hypot(a[0] - b[0], a[1] - b[1]);
    const orig = (a: number[], b: number[]) => Math.hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    for (let i = 0; i < 3; i++) {
      for (let j = i + 1; j < 3; j++) {
        expect(d(proj.points[i], proj.points[j])).toBeCloseTo(
          orig(info.means[i], info.means[j]),
          6,
        );
      }
    }
  });

  it("projects arbitrary codes consistently with the means", () => {
    const proj = meansProjection(info.means);
    expect(proj.project(info.means[1])).toEqual(proj.points[1]);
  });

  it("handles two means (rank one)", () => {
    const proj = meansProjection([
      [0, 0],
      [3, 4],
    ]);
    const d = Math.hypot(
      proj.points[0][0] - proj.points[1][0],
      proj.points[0][1] - proj.points[1][1],
    );
    expect(d).toBeCloseTo(5, 6);
  });
});
