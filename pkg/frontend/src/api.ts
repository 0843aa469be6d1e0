// Typed client for the inference service. Every UI effect goes through
// these endpoints; nothing here mutates server state.

export interface ModelInfo {
  latent_dim: number;
  classes: number[];
  means: number[][];
  masses: number[];
  input_shape: number[];
}

export interface EncodeResponse {
  z: number[];
  posterior: number[];
  class: number;
}

export interface TransferResponse {
  path: number[][];
  posteriors: number[][];
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(base: string, path: string, body?: unknown): Promise<T> {
  const resp = await fetch(base + path, body === undefined
    ? undefined
    : {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      });
  const payload = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    throw new ApiError(resp.status, (payload as { error?: string }).error ?? `HTTP ${resp.status}`);
  }
  return payload as T;
}

export class Client {
  constructor(public base: string) {}

  modelInfo(): Promise<ModelInfo> {
    return request<ModelInfo>(this.base, "/model/info");
  }

  encode(x: number[]): Promise<EncodeResponse> {
    return request<EncodeResponse>(this.base, "/encode", { x });
  }

  decode(z: number[]): Promise<{ x: number[] }> {
    return request<{ x: number[] }>(this.base, "/decode", { z });
  }

  sample(cls: number, n: number, seed: number): Promise<{ xs: number[][] }> {
    return request<{ xs: number[][] }>(this.base, "/sample", { class: cls, n, seed });
  }

  interpolate(z1: number[], z2: number[], steps: number): Promise<{ path: number[][] }> {
    return request<{ path: number[][] }>(this.base, "/interpolate", { z1, z2, steps });
  }

  transfer(z: number[], source: number | null, target: number, steps: number): Promise<TransferResponse> {
    return request<TransferResponse>(this.base, "/transfer", { z, source, target, steps });
  }

  intensity(z: number[], source: number, antiTarget: number, alpha: number): Promise<{ x: number[]; posterior: number[] }> {
    return request<{ x: number[]; posterior: number[] }>(this.base, "/intensity", {
      z,
      source,
      anti_target: antiTarget,
      alpha,
    });
  }
}
