"""Closed-form Cramer-Wold scalar products and squared distances.

The Cramer-Wold inner product between two spherical Gaussians N(a, aI) and
N(b, bI) has a closed form, so the squared CW distance between an empirical
latent sample (a uniform mixture of Dirac atoms, i.e. zero-variance
Gaussians) and a mixture of spherical Gaussians needs no sampling: it is a
sum of three double sums over sample points and mixture components.
Analytic gradients with respect to the sample and the component means are
provided for training.

All computations are in double precision.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

SQRT_2PI = float(np.sqrt(2.0 * np.pi))

# Row-chunk size for the O(m^2) pairwise term. Chunk results are summed in
# index order, so the reduction is deterministic with or without threads.
_PAIRWISE_CHUNK = 512


def _num_workers() -> int:
    raw = os.environ.get("SEGMA_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SphericalGaussian:
    """N(mean, variance * I); variance 0 encodes a Dirac atom."""

    mean: np.ndarray
    variance: float = 1.0

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        object.__setattr__(self, "mean", mean)
        if mean.ndim != 1 or mean.shape[0] < 1:
            raise ValueError("mean must be a vector of dimension >= 1")
        if not np.all(np.isfinite(mean)):
            raise ValueError("mean has non-finite entries")
        if not np.isfinite(self.variance) or self.variance < 0:
            raise ValueError("variance must be finite and >= 0")

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def phi_d(s, dim: int):
    """Evaluate (1 + 4s/(2*dim - 3))^(-1/2), scalar or elementwise.

    Strictly decreasing in s, equal to 1 at s = 0. Requires dim >= 2 so the
    denominator 2*dim - 3 is positive.
    """
    if dim <= 1:
        raise ValueError(f"phi_d requires dim >= 2, got {dim}")
    s = np.asarray(s, dtype=np.float64)
    if not np.all(np.isfinite(s)):
        raise ValueError("phi_d: s must be finite")
    if np.any(s < 0):
        raise ValueError("phi_d: s must be nonnegative")
    out = (1.0 + 4.0 * s / (2.0 * dim - 3.0)) ** -0.5
    return float(out) if out.ndim == 0 else out


def _phi(s, dim):
    # unvalidated fast path; s already nonnegative by construction
    return (1.0 + 4.0 * s / (2.0 * dim - 3.0)) ** -0.5


def _phi_prime(s, dim):
    c = 2.0 * dim - 3.0
    return -(2.0 / c) * (1.0 + 4.0 * s / c) ** -1.5


def cw_inner(g1: SphericalGaussian, g2: SphericalGaussian, gamma: float) -> float:
    """Cramer-Wold scalar product of two spherical Gaussians at bandwidth gamma.

    Returns (2*pi*(v1 + v2 + 2*gamma))^(-1/2) * phi_d(||a-b||^2 / (2*(v1+v2+2*gamma))).
    Symmetric in its Gaussian arguments and strictly positive.
    """
    if g1.dim != g2.dim:
        raise ValueError(f"dimension mismatch: {g1.dim} vs {g2.dim}")
    if g1.dim < 2:
        raise ValueError("cw_inner requires dimension >= 2")
    if not (np.isfinite(gamma) and gamma > 0):
        raise ValueError("gamma must be positive")
    t = g1.variance + g2.variance + 2.0 * gamma
    d2 = float(np.sum((g1.mean - g2.mean) ** 2))
    return float(_phi(d2 / (2.0 * t), g1.dim) / (SQRT_2PI * np.sqrt(t)))


def silverman_gamma(n_c: int) -> float:
    """Kernel bandwidth from the per-class batch count: (4 / (3*n_c))^(2/5)."""
    if n_c < 1:
        raise ValueError(f"n_c must be >= 1, got {n_c}")
    return float((4.0 / (3.0 * n_c)) ** 0.4)


def _validate_sample(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2:
        raise ValueError(f"sample must be an m x D matrix, got shape {z.shape}")
    if z.shape[0] < 1:
        raise ValueError("empty sample")
    if z.shape[1] < 2:
        raise ValueError("sample dimension must be >= 2")
    if not np.all(np.isfinite(z)):
        raise ValueError("sample has non-finite entries")
    return z


def _validate_mixture(z, masses, means, variances, gamma):
    z = _validate_sample(z)
    masses = np.asarray(masses, dtype=np.float64)
    means = np.asarray(means, dtype=np.float64)
    if means.ndim != 2:
        raise ValueError("means must be a K x D matrix")
    variances = np.broadcast_to(
        np.asarray(variances, dtype=np.float64), (means.shape[0],)
    ).astype(np.float64)
    if masses.shape != (means.shape[0],):
        raise ValueError("masses and means disagree on K")
    if means.shape[1] != z.shape[1]:
        raise ValueError(
            f"dimension mismatch: sample D={z.shape[1]}, means D={means.shape[1]}"
        )
    if np.any(masses < 0):
        raise ValueError("masses must be nonnegative")
    if abs(float(masses.sum()) - 1.0) > 1e-9:
        raise ValueError(f"masses must sum to 1 within 1e-9, got {masses.sum()!r}")
    if np.any(variances < 0):
        raise ValueError("component variances must be >= 0")
    if not (np.isfinite(gamma) and gamma > 0):
        raise ValueError("gamma must be positive")
    return z, masses, means, variances


def _cross_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    return np.maximum(d2, 0.0)


def _pairwise_phi_sum(z: np.ndarray, gamma: float, dim: int) -> float:
    """Sum of phi_d(||z_i - z_j||^2 / (4*gamma)) over all ordered pairs.

    The i = j diagonal is included, exactly as the printed double sum. Rows
    are processed in fixed chunks and chunk subtotals are added in index
    order, so the result does not depend on the worker count.
    """
    m = z.shape[0]
    chunks = range(0, m, _PAIRWISE_CHUNK)

    def chunk_sum(lo):
        hi = min(lo + _PAIRWISE_CHUNK, m)
        s = _cross_sq_dists(z[lo:hi], z) / (4.0 * gamma)
        return float(np.sum(_phi(s, dim)))

    workers = _num_workers()
    if workers > 1 and m > _PAIRWISE_CHUNK:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            subtotals = list(pool.map(chunk_sum, chunks))
    else:
        subtotals = [chunk_sum(lo) for lo in chunks]
    return float(sum(subtotals))


def cw_sq_dist_standard(z: np.ndarray, gamma: float) -> float:
    """Squared CW distance between a sample and the standard Gaussian N(0, I)."""
    z = _validate_sample(z)
    if not (np.isfinite(gamma) and gamma > 0):
        raise ValueError("gamma must be positive")
    m, dim = z.shape
    term_zz = _pairwise_phi_sum(z, gamma, dim) / (m * m * SQRT_2PI * np.sqrt(2.0 * gamma))
    t = 1.0 + 2.0 * gamma
    norms = np.sum(z * z, axis=1)
    term_zp = 2.0 / (m * SQRT_2PI * np.sqrt(t)) * float(np.sum(_phi(norms / (2.0 * t), dim)))
    term_pp = 1.0 / (SQRT_2PI * np.sqrt(2.0 + 2.0 * gamma))
    return term_zz - term_zp + term_pp


def cw_sq_dist_mixture(z, masses, means, variances, gamma: float) -> float:
    """Squared CW distance between a sample and a mixture of spherical Gaussians.

    Parameters
    ----------
    z : (m, D) sample matrix
    masses : (K,) mixture weights, summing to 1
    means : (K, D) component means
    variances : scalar or (K,) component variances (>= 0)
    gamma : kernel bandwidth (> 0)

    Cost is O(m^2 + mK + K^2). The three terms are the sample-sample double
    sum, the sample-component cross term with factor 2*p_k, and the constant
    component-component double sum.
    """
    z, masses, means, variances = _validate_mixture(z, masses, means, variances, gamma)
    m, dim = z.shape

    term_zz = _pairwise_phi_sum(z, gamma, dim) / (m * m * SQRT_2PI * np.sqrt(2.0 * gamma))

    t_k = variances + 2.0 * gamma  # (K,)
    d2_zk = _cross_sq_dists(z, means)  # (m, K)
    phi_zk = _phi(d2_zk / (2.0 * t_k)[None, :], dim)
    term_zp = float(np.sum((2.0 * masses / (m * SQRT_2PI * np.sqrt(t_k))) * phi_zk.sum(axis=0)))

    u_kl = variances[:, None] + variances[None, :] + 2.0 * gamma  # (K, K)
    d2_kl = _cross_sq_dists(means, means)
    phi_kl = _phi(d2_kl / (2.0 * u_kl), dim)
    term_pp = float(np.sum(np.outer(masses, masses) / (SQRT_2PI * np.sqrt(u_kl)) * phi_kl))

    return term_zz - term_zp + term_pp


def cw_grad(z, masses, means, variances, gamma: float):
    """Gradients of cw_sq_dist_mixture w.r.t. the sample and the means.

    Returns (d_z, d_means) with shapes (m, D) and (K, D). The constant
    component-component term has zero sample gradient but does contribute to
    d_means. By translation invariance the rows of d_z and d_means sum to
    the zero vector.
    """
    z, masses, means, variances = _validate_mixture(z, masses, means, variances, gamma)
    m, dim = z.shape

    # sample-sample term, row-chunked so memory stays O(chunk * m * D)
    c_zz = 1.0 / (m * m * SQRT_2PI * np.sqrt(2.0 * gamma))
    d_z = np.empty_like(z)
    for lo in range(0, m, _PAIRWISE_CHUNK):
        hi = min(lo + _PAIRWISE_CHUNK, m)
        diff_ij = z[lo:hi, None, :] - z[None, :, :]  # (c, m, D)
        s_ij = np.sum(diff_ij * diff_ij, axis=2) / (4.0 * gamma)
        w_ij = _phi_prime(s_ij, dim) / gamma  # (c, m)
        d_z[lo:hi] = c_zz * np.einsum("ij,ijd->id", w_ij, diff_ij)

    # sample-component cross term
    t_k = variances + 2.0 * gamma
    diff_ik = z[:, None, :] - means[None, :, :]  # (m, K, D)
    s_ik = np.sum(diff_ik * diff_ik, axis=2) / (2.0 * t_k)[None, :]
    b_k = 2.0 * masses / (m * SQRT_2PI * np.sqrt(t_k))  # (K,)
    w_ik = (b_k / t_k)[None, :] * _phi_prime(s_ik, dim)  # (m, K)
    d_z -= np.einsum("ik,ikd->id", w_ik, diff_ik)
    d_means = np.einsum("ik,ikd->kd", w_ik, diff_ik)

    # component-component term
    u_kl = variances[:, None] + variances[None, :] + 2.0 * gamma
    diff_kl = means[:, None, :] - means[None, :, :]
    s_kl = np.sum(diff_kl * diff_kl, axis=2) / (2.0 * u_kl)
    c_kl = np.outer(masses, masses) / (SQRT_2PI * np.sqrt(u_kl))
    w_kl = 2.0 * c_kl * _phi_prime(s_kl, dim) / u_kl
    d_means += np.einsum("kl,kld->kd", w_kl, diff_kl)

    return d_z, d_means
