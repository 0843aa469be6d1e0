// Decoded samples arrive as flat row-major float arrays in [0, 1]; the
// shape from /model/info decides how they are drawn. Quantization is
// byte = round(clamp(v) * 255), the single rule shared by every view.

export function toByte(v: number): number {
  const clamped = v < 0 ? 0 : v > 1 ? 1 : v;
  return Math.round(clamped * 255);
}

export interface Frame {
  width: number;
  height: number;
  rgba: Uint8ClampedArray;
}

/** Flat array + shape -> RGBA bytes. [H,W] and [N] are grayscale,
 * [H,W,3] is RGB; a plain vector renders as a one-pixel-tall strip. */
export function frameFromFlat(x: number[], shape: number[]): Frame {
  let height: number;
  let width: number;
  let channels: number;
  if (shape.length === 3 && shape[2] === 3) {
    [height, width, channels] = [shape[0], shape[1], 3];
  } else if (shape.length === 2) {
    [height, width, channels] = [shape[0], shape[1], 1];
  } else {
    [height, width, channels] = [1, shape.reduce((a, b) => a * b, 1), 1];
  }
  if (width * height * channels !== x.length) {
    throw new Error(`flat array of ${x.length} values does not fill shape ${shape.join("x")}`);
  }
  const rgba = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < width * height; i++) {
    const r = toByte(x[i * channels]);
    const g = channels === 3 ? toByte(x[i * channels + 1]) : r;
    const b = channels === 3 ? toByte(x[i * channels + 2]) : r;
    rgba[i * 4] = r;
    rgba[i * 4 + 1] = g;
    rgba[i * 4 + 2] = b;
    rgba[i * 4 + 3] = 255;
  }
  return { width, height, rgba };
}

/** Grayscale bytes of a frame (for audits and byte-for-byte comparisons). */
export function grayBytes(x: number[]): Uint8ClampedArray {
  const out = new Uint8ClampedArray(x.length);
  for (let i = 0; i < x.length; i++) out[i] = toByte(x[i]);
  return out;
}

export function drawFrame(canvas: HTMLCanvasElement, frame: Frame, scale = 6): void {
  canvas.width = frame.width;
  canvas.height = frame.height;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.putImageData(new ImageData(new Uint8ClampedArray(frame.rgba), frame.width, frame.height), 0, 0);
  canvas.style.width = `${frame.width * scale}px`;
  canvas.style.height = `${Math.max(frame.height * scale, 24)}px`;
  canvas.style.imageRendering = "pixelated";
}
