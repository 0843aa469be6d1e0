"""Gaussian-mixture latent prior: posterior classification, cross-entropy,
sampling, mass fixing, and equidistant mean initialization.

Every component has identity covariance; only the means (trained) and the
masses (fixed from label proportions) vary. Class indices are 1-based
everywhere in the public API: component k of a K-component prior is class
k, with k in {1..K}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASS_FLOOR = 1e-6  # assigned to classes absent from the label set


@dataclass(frozen=True)
class GaussianMixturePrior:
    """Mixture of K unit-variance spherical Gaussians in D dimensions.

    The component variance is hard-fixed at 1; there is deliberately no way
    to set it. `means` is the single mutable handle training updates.
    """

    means: np.ndarray  # (K, D)
    masses: np.ndarray  # (K,), sums to 1

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64)
        masses = np.asarray(self.masses, dtype=np.float64)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "masses", masses)
        if means.ndim != 2 or means.shape[0] < 1:
            raise ValueError("means must be a K x D matrix with K >= 1")
        if not np.all(np.isfinite(means)):
            raise ValueError("means must be finite")
        if masses.shape != (means.shape[0],):
            raise ValueError("masses must have one entry per component")
        if np.any(masses < 0):
            raise ValueError("masses must be nonnegative")
        if abs(float(masses.sum()) - 1.0) > 1e-9:
            raise ValueError(f"masses must sum to 1 within 1e-9, got {masses.sum()!r}")

    @property
    def n_components(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def variance(self) -> float:
        return 1.0


def _score_matrix(codes: np.ndarray, prior: GaussianMixturePrior) -> np.ndarray:
    """Unnormalized log joint log p_k - ||z - mu_k||^2 / 2, shape (m, K).

    Unit variances make the common (2*pi)^(-D/2) factor cancel in the
    posterior, so it is omitted. Zero masses map to -inf scores.
    """
    d2 = (
        np.sum(codes * codes, axis=1)[:, None]
        + np.sum(prior.means * prior.means, axis=1)[None, :]
        - 2.0 * codes @ prior.means.T
    )
    with np.errstate(divide="ignore"):
        log_masses = np.log(prior.masses)
    return log_masses[None, :] - 0.5 * np.maximum(d2, 0.0)


def _log_softmax(scores: np.ndarray) -> np.ndarray:
    top = np.max(scores, axis=1, keepdims=True)
    top = np.where(np.isfinite(top), top, 0.0)  # all -inf row would yield nan
    shifted = scores - top
    with np.errstate(divide="ignore"):
        lse = np.log(np.sum(np.exp(shifted), axis=1, keepdims=True))
    return shifted - lse


def log_posterior(z: np.ndarray, prior: GaussianMixturePrior) -> np.ndarray:
    """Log class-posterior of the mixture at z, computed via log-sum-exp.

    Accepts a single D-vector (returns a K-vector) or an (m, D) batch
    (returns (m, K)). exp of the result sums to 1; components with zero
    mass get -inf.
    """
    z = np.asarray(z, dtype=np.float64)
    single = z.ndim == 1
    codes = z[None, :] if single else z
    if codes.shape[1] != prior.dim:
        raise ValueError(f"dimension mismatch: z has D={codes.shape[1]}, prior D={prior.dim}")
    if not np.all(np.isfinite(codes)):
        raise ValueError("z must be finite")
    out = _log_softmax(_score_matrix(codes, prior))
    return out[0] if single else out


def classify(z: np.ndarray, prior: GaussianMixturePrior):
    """Most probable class (1-based) under the posterior; ties go to the
    smallest index. Vectorized over an (m, D) batch."""
    log_post = log_posterior(z, prior)
    if log_post.ndim == 1:
        return int(np.argmax(log_post)) + 1
    return np.argmax(log_post, axis=1) + 1


def cross_entropy(codes: np.ndarray, labels: np.ndarray, prior: GaussianMixturePrior) -> float:
    """Mean negative log posterior of the true labels over a labeled batch.

    Nonnegative; returns +inf if some true label has posterior exactly 0
    (the caller decides whether that is fatal).
    """
    codes = np.atleast_2d(np.asarray(codes, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.int64)
    if codes.shape[0] < 1:
        raise ValueError("labeled batch must be nonempty")
    if labels.shape != (codes.shape[0],):
        raise ValueError("labels must align with codes")
    if np.any(labels < 1) or np.any(labels > prior.n_components):
        raise ValueError(f"labels must lie in 1..{prior.n_components}")
    log_post = log_posterior(codes, prior)
    picked = log_post[np.arange(codes.shape[0]), labels - 1]
    return float(-np.mean(picked))


def cross_entropy_grad(codes: np.ndarray, labels: np.ndarray, prior: GaussianMixturePrior):
    """Gradients of cross_entropy w.r.t. the codes and the component means.

    With scores s_k = log p_k - ||z - mu_k||^2 / 2 and posterior P = softmax(s),
    d loss / d s_k = (P_k - onehot_k) / m, and the chain rule through the
    squared distances gives the code and mean gradients.
    """
    codes = np.atleast_2d(np.asarray(codes, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.int64)
    m = codes.shape[0]
    if m < 1:
        raise ValueError("labeled batch must be nonempty")
    post = np.exp(log_posterior(codes, prior))  # (m, K)
    resid = post.copy()
    resid[np.arange(m), labels - 1] -= 1.0  # P - onehot
    resid /= m

    diff = codes[:, None, :] - prior.means[None, :, :]  # (m, K, D)
    d_codes = -np.einsum("ik,ikd->id", resid, diff)
    d_means = np.einsum("ik,ikd->kd", resid, diff)
    return d_codes, d_means


def sample_component(prior: GaussianMixturePrior, k: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. draws from component k (1-based), N(mu_k, I)."""
    if not 1 <= k <= prior.n_components:
        raise ValueError(f"class index {k} out of range 1..{prior.n_components}")
    if n < 0:
        raise ValueError("n must be >= 0")
    return prior.means[k - 1][None, :] + rng.standard_normal((n, prior.dim))


def sample_prior(prior: GaussianMixturePrior, n: int, rng: np.random.Generator) -> np.ndarray:
    """n draws from the mixture: component index from the masses, then a
    unit-variance Gaussian draw around that component's mean."""
    if n < 0:
        raise ValueError("n must be >= 0")
    ks = rng.choice(prior.n_components, size=n, p=prior.masses)
    return prior.means[ks] + rng.standard_normal((n, prior.dim))


def init_means(n_components: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """K equidistant component means: a regular unit-edge simplex, centered
    at the origin, embedded in the first K-1 coordinates and then rotated by
    a seeded random orthogonal map.

    Requires dim >= K-1 (K equidistant points need K-1 dimensions).
    """
    if n_components < 1:
        raise ValueError("need at least one component")
    if dim < n_components - 1:
        raise ValueError(
            f"cannot place {n_components} equidistant means in {dim} dims "
            f"(need dim >= {n_components - 1})"
        )
    k = n_components
    # e_i / sqrt(2), centered: unit pairwise distances, centroid 0, rank K-1
    verts = (np.eye(k) - 1.0 / k) / np.sqrt(2.0)
    if k == 1:
        coords = np.zeros((1, 0))
    else:
        # rotate the K-dim embedding onto its K-1 principal coordinates
        _, svals, vt = np.linalg.svd(verts, full_matrices=False)
        coords = verts @ vt[: k - 1].T
    means = np.zeros((k, dim))
    means[:, : k - 1] = coords
    means -= means.mean(axis=0, keepdims=True)

    # seeded random orthogonal map (QR with sign fix)
    a = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))[None, :]
    return means @ q.T


def set_masses_from_labels(labels, n_components: int) -> np.ndarray:
    """Empirical class proportions p_k = count(k) / total.

    Classes absent from the labels receive the mass floor 1e-6 (so the
    posterior never divides by zero), followed by renormalization.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ValueError("labels must be nonempty")
    if np.any(labels < 1) or np.any(labels > n_components):
        raise ValueError(f"labels must lie in 1..{n_components}")
    counts = np.bincount(labels - 1, minlength=n_components).astype(np.float64)
    masses = counts / counts.sum()
    if np.any(masses == 0):
        masses[masses == 0] = MASS_FLOOR
        masses /= masses.sum()
    return masses
