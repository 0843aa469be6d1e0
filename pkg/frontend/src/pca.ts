// 2-D projection of the K component means for the latent scatter
// backdrop: top-2 principal axes of the means matrix (cheap and stable,
// no data encodings involved). Power iteration with deflation is plenty
// for a K x D matrix with K <= a few dozen.

export interface Projection {
  points: Array<[number, number]>; // K projected means
  project(z: number[]): [number, number];
}

function matVec(cov: number[][], v: number[]): number[] {
  return cov.map((row) => row.reduce((acc, c, j) => acc + c * v[j], 0));
}

function normalize(v: number[]): number[] {
  const norm = Math.sqrt(v.reduce((acc, x) => acc + x * x, 0)) || 1;
  return v.map((x) => x / norm);
}

function powerIteration(cov: number[][], iterations = 200, seedAxis = 0): number[] {
  let v: number[] = cov.map((_, i) => (i === seedAxis ? 1 : 1e-3));
  for (let it = 0; it < iterations; it++) {
    v = normalize(matVec(cov, v));
  }
  return v;
}

export function meansProjection(means: number[][]): Projection {
  const k = means.length;
  const dim = means[0]?.length ?? 0;
  const center = new Array(dim).fill(0);
  for (const mu of means) for (let j = 0; j < dim; j++) center[j] += mu[j] / k;
  const centered = means.map((mu) => mu.map((x, j) => x - center[j]));

  // D x D covariance of the K means
  const cov: number[][] = Array.from({ length: dim }, () => new Array(dim).fill(0));
  for (const row of centered) {
    for (let a = 0; a < dim; a++) {
      for (let b = 0; b < dim; b++) cov[a][b] += row[a] * row[b];
    }
  }

  const axis1 = powerIteration(cov, 200, 0);
  // deflate and repeat for the second axis
  const lambda1 = matVec(cov, axis1).reduce((acc, x, j) => acc + x * axis1[j], 0);
  const deflated = cov.map((row, a) => row.map((c, b) => c - lambda1 * axis1[a] * axis1[b]));
  let axis2 = powerIteration(deflated, 200, 1);
  // re-orthogonalize against axis1 (guards K = 2, where rank is 1)
  const dot = axis2.reduce((acc, x, j) => acc + x * axis1[j], 0);
  axis2 = normalize(axis2.map((x, j) => x - dot * axis1[j]));

  const project = (z: number[]): [number, number] => {
    let u = 0;
    let v = 0;
    for (let j = 0; j < dim; j++) {
      const c = z[j] - center[j];
      u += c * axis1[j];
      v += c * axis2[j];
    }
    return [u, v];
  };
  return { points: means.map(project), project };
}
