"""Quantitative evaluation: Fréchet distance between Gaussian fits of
feature sets (a desk-scale stand-in for Inception-feature FID), latent
classifier test error, and interpolation quality.

Feature maps are raw pixels (tiny synthetic data) or a PCA basis fit on
the real data only. Scores are comparable to each other, not to
Inception-feature numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .latent import interpolate
from .mixture import classify, sample_prior
from .nn import forward

PSD_TOL = -1e-8  # eigenvalues above this are clamped to zero, below it is an error

FEATURE_MAPS = ("raw_pixels", "pca_50")


@dataclass(frozen=True)
class FeatureStats:
    """Gaussian fit (mean, covariance) of a feature set."""

    mean: np.ndarray
    covariance: np.ndarray
    count: int

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.covariance, dtype=np.float64)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        if cov.shape != (mean.shape[0], mean.shape[0]):
            raise ValueError("covariance must be F x F for an F-vector mean")
        if self.count < 2:
            raise ValueError("need at least two samples for a covariance")
        if not np.allclose(cov, cov.T, atol=1e-9):
            raise ValueError("covariance must be symmetric within 1e-9")

    @classmethod
    def from_samples(cls, x: np.ndarray) -> "FeatureStats":
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 2:
            raise ValueError("need an (n >= 2, F) sample matrix")
        cov = np.cov(x, rowvar=False).reshape(x.shape[1], x.shape[1])
        return cls(mean=x.mean(axis=0), covariance=cov, count=x.shape[0])


def _psd_eigh(mat: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eigh((mat + mat.T) / 2.0)
    if np.any(vals < PSD_TOL):
        raise ValueError(f"{what} is not PSD: min eigenvalue {vals.min():.3e}")
    return np.maximum(vals, 0.0), vecs


def frechet_distance(a: FeatureStats, b: FeatureStats) -> float:
    """||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)).

    The matrix square root is taken via the symmetric eigendecomposition of
    S_a^(1/2) S_b S_a^(1/2); tiny negative eigenvalues are clamped to zero.
    """
    if a.mean.shape != b.mean.shape:
        raise ValueError(f"feature dims differ: {a.mean.shape} vs {b.mean.shape}")
    vals_a, vecs_a = _psd_eigh(a.covariance, "covariance a")
    root_a = (vecs_a * np.sqrt(vals_a)[None, :]) @ vecs_a.T
    inner = root_a @ b.covariance @ root_a
    vals_m, _ = _psd_eigh(inner, "cross covariance product")
    mean_term = float(np.sum((a.mean - b.mean) ** 2))
    trace_term = float(np.trace(a.covariance) + np.trace(b.covariance) - 2.0 * np.sum(np.sqrt(vals_m)))
    return max(mean_term + trace_term, 0.0)


class PcaFeatures:
    """Linear projection onto the top principal axes of the real data."""

    def __init__(self, real: np.ndarray, n_components: int = 50):
        real = np.asarray(real, dtype=np.float64)
        self.center = real.mean(axis=0)
        n_components = min(n_components, real.shape[1], real.shape[0] - 1)
        cov = np.cov(real - self.center, rowvar=False)
        vals, vecs = np.linalg.eigh(cov)
        order = np.argsort(vals)[::-1][:n_components]
        self.basis = vecs[:, order]  # (N, F)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.center) @ self.basis


def _resolve_feature_map(name: str, real: np.ndarray):
    if name == "raw_pixels":
        return lambda x: np.asarray(x, dtype=np.float64)
    if name == "pca_50":
        return PcaFeatures(real, 50)
    raise ValueError(f"unknown feature map {name!r}; choose from {FEATURE_MAPS}")


def frechet_between_sets(real: np.ndarray, generated: np.ndarray, feature_map: str = "raw_pixels") -> float:
    """Fréchet distance between the Gaussian fits of two sample sets after
    the feature map (PCA basis fit on `real` only)."""
    fmap = _resolve_feature_map(feature_map, real)
    fr, fg = fmap(real), fmap(generated)
    if generated.shape[0] < fr.shape[1] + 1:
        raise ValueError(
            f"need more than feature-dim samples for a full-rank fit: "
            f"{generated.shape[0]} <= {fr.shape[1]}"
        )
    return frechet_distance(FeatureStats.from_samples(fr), FeatureStats.from_samples(fg))


def fid_proxy(model, real_features: np.ndarray, n: int, feature_map: str,
              rng: np.random.Generator, generated: np.ndarray | None = None) -> float:
    """Fréchet score of n decoded prior samples against the real set.

    `generated` overrides the model's samples (oracle injection for tests).
    Deterministic given the rng seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if generated is None:
        codes = sample_prior(model.prior, n, rng)
        generated, _ = forward(model.decoder, codes)
    return frechet_between_sets(real_features, generated, feature_map)


def encode(model, x: np.ndarray) -> np.ndarray:
    codes, _ = forward(model.encoder, np.atleast_2d(x))
    return codes


def test_error(model, features: np.ndarray, labels: np.ndarray) -> float:
    """1 - accuracy of the latent Gaussian classifier on a labeled set."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.int64)
    if features.shape[0] == 0:
        raise ValueError("test set is empty")
    if labels.shape != (features.shape[0],):
        raise ValueError("labels must align with features")
    pred = classify(encode(model, features), model.prior)
    return float(1.0 - np.mean(pred == labels))


def interpolation_fid(model, test_features: np.ndarray, n: int, feature_map: str,
                      rng: np.random.Generator) -> float:
    """Fréchet score of decoded random interpolations between encoded test
    pairs: draw two points, encode, decode a uniform point on the segment."""
    test_features = np.atleast_2d(np.asarray(test_features, dtype=np.float64))
    if test_features.shape[0] < 2:
        raise ValueError("need at least two test points to interpolate")
    if n < 1:
        raise ValueError("n must be >= 1")
    idx = rng.integers(0, test_features.shape[0], size=(n, 2))
    ts = rng.uniform(0.0, 1.0, size=n)
    codes = encode(model, test_features)
    za, zb = codes[idx[:, 0]], codes[idx[:, 1]]
    mixed = np.stack([interpolate(a, b, t).z for a, b, t in zip(za, zb, ts)])
    decoded, _ = forward(model.decoder, mixed)
    return frechet_between_sets(test_features, decoded, feature_map)


def write_report(report: dict, path) -> None:
    """Tab-separated key/value lines; doubles as a machine-readable file."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_report(report))


def format_report(report: dict) -> str:
    return "".join(f"{key}\t{value!r}\n" if isinstance(value, float) else f"{key}\t{value}\n"
                   for key, value in report.items())


def read_report(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            key, value = line.rstrip("\n").split("\t", 1)
            try:
                out[key] = int(value)
            except ValueError:
                try:
                    out[key] = float(value)
                except ValueError:
                    out[key] = value
    return out
