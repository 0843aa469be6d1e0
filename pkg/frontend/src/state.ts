// Session state for the explorer: the current latent code, class picks,
// and the two sliders. Slider values are clamped to their declared
// ranges; class picks are validated against the loaded model info.

import { ModelInfo } from "./api.js";

export const T_RANGE: [number, number] = [0, 1];
export const ALPHA_RANGE: [number, number] = [0, 2];

function clamp(v: number, [lo, hi]: [number, number]): number {
  if (Number.isNaN(v)) return lo;
  return v < lo ? lo : v > hi ? hi : v;
}

export class UiSession {
  z: number[] | null = null;
  sourceClass: number | null = null;
  targetClass: number | null = null;
  private tValue = 0;
  private alphaValue = 0.5;

  constructor(public info: ModelInfo) {}

  get t(): number {
    return this.tValue;
  }

  set t(v: number) {
    this.tValue = clamp(v, T_RANGE);
  }

  get alpha(): number {
    return this.alphaValue;
  }

  set alpha(v: number) {
    this.alphaValue = clamp(v, ALPHA_RANGE);
  }

  setCode(z: number[], sourceClass: number | null): void {
    if (z.length !== this.info.latent_dim) {
      throw new Error(`latent code has ${z.length} dims, model expects ${this.info.latent_dim}`);
    }
    this.z = z.slice();
    this.sourceClass = sourceClass;
  }

  pickClass(which: "source" | "target", cls: number): void {
    if (!this.info.classes.includes(cls)) {
      throw new Error(`class ${cls} not in ${this.info.classes}`);
    }
    if (which === "source") this.sourceClass = cls;
    else this.targetClass = cls;
  }

  /** Style-transferred code z + (mu_target - mu_source), from /model/info
   * means; decoding still happens server-side. */
  transferredCode(): number[] {
    if (this.z === null || this.sourceClass === null || this.targetClass === null) {
      throw new Error("need a latent code and both class picks");
    }
    const muS = this.info.means[this.sourceClass - 1];
    const muT = this.info.means[this.targetClass - 1];
    return this.z.map((v, j) => v + (muT[j] - muS[j]));
  }

  /** Code on the transfer segment at the current t: (1-t)*z + t*z_hat,
   * exact at both endpoints. */
  codeAtT(): number[] {
    const zHat = this.transferredCode();
    const t = this.tValue;
    return this.z!.map((v, j) => (1 - t) * v + t * zHat[j]);
  }

  get transferEnabled(): boolean {
    return this.info.classes.length > 1;
  }
}
