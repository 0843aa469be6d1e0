"""Latent-space editing on top of a trained mixture prior: linear
interpolation, component-to-component style transfer, gradual transfer
paths, and class-intensity shifts away from an anti-target component.

All operations are pure functions over immutable model snapshots; only
generate_class consumes randomness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mixture import GaussianMixturePrior, classify, sample_component
from .nn import forward


@dataclass(frozen=True)
class LatentCode:
    """A latent point with an optional source-component annotation.

    Codes produced by style transfer remember the anchor they were first
    shifted from, so chained transfers telescope into a single shift and a
    round trip back to the anchor's class reproduces the anchor bit-exactly
    (floating-point addition alone would not).
    """

    z: np.ndarray
    source_class: int | None = None
    _anchor: tuple[np.ndarray, int] | None = field(default=None, repr=False)

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.float64)
        object.__setattr__(self, "z", z)
        if z.ndim != 1:
            raise ValueError("latent code must be a 1-D vector")
        if not np.all(np.isfinite(z)):
            raise ValueError("latent code must be finite")


def _as_code(value) -> LatentCode:
    return value if isinstance(value, LatentCode) else LatentCode(np.asarray(value))


def _check_class(prior: GaussianMixturePrior, k: int, what: str) -> int:
    if not 1 <= int(k) <= prior.n_components:
        raise ValueError(f"{what} class {k} out of range 1..{prior.n_components}")
    return int(k)


def interpolate(z1, z2, t: float) -> LatentCode:
    """Linear interpolation (1-t)*z1 + t*z2 for t in [0, 1]."""
    c1, c2 = _as_code(z1), _as_code(z2)
    if c1.z.shape != c2.z.shape:
        raise ValueError(f"dimension mismatch: {c1.z.shape} vs {c2.z.shape}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"interpolation parameter t={t} outside [0, 1]")
    return LatentCode((1.0 - t) * c1.z + t * c2.z)


def style_transfer(z, source: int | None, target: int, prior: GaussianMixturePrior) -> LatentCode:
    """Shift a latent code from its source component frame to the target's:
    z + (mu_target - mu_source), keeping the offset from the mean (the
    style) and re-annotating the class.

    When source is None it is inferred with classify(z); an explicit source
    always wins. Transfers compose exactly: s -> t -> s returns the original
    code bit-for-bit.
    """
    code = _as_code(z)
    target = _check_class(prior, target, "target")
    if source is None:
        source = code.source_class if code.source_class is not None else classify(code.z, prior)
    source = _check_class(prior, source, "source")

    anchor_z, anchor_class = code._anchor if code._anchor is not None else (code.z, source)
    if target == anchor_class:
        new_z = anchor_z  # telescoped shift is exactly zero
    else:
        new_z = anchor_z + (prior.means[target - 1] - prior.means[anchor_class - 1])
    return LatentCode(new_z, source_class=target, _anchor=(anchor_z, anchor_class))


def transfer_path(z, source: int | None, target: int, prior: GaussianMixturePrior,
                  steps: int) -> list[LatentCode]:
    """Gradual class change: `steps` codes interpolating linearly from z to
    style_transfer(z, source, target), endpoints included."""
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    code = _as_code(z)
    shifted = style_transfer(code, source, target, prior)
    path = [LatentCode(code.z, source_class=code.source_class)]
    for i in range(1, steps - 1):
        path.append(interpolate(code, shifted, i / (steps - 1)))
    path.append(shifted)
    return path


def class_intensity(z, source: int, anti_target: int, alpha: float,
                    prior: GaussianMixturePrior) -> LatentCode:
    """Amplify class-s characteristics by moving away from an anti-target
    component: z + alpha * (mu_source - mu_anti_target), alpha >= 0."""
    code = _as_code(z)
    source = _check_class(prior, source, "source")
    anti_target = _check_class(prior, anti_target, "anti-target")
    if not (np.isfinite(alpha) and alpha >= 0):
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    shift = prior.means[source - 1] - prior.means[anti_target - 1]
    return LatentCode(code.z + alpha * shift, source_class=source)


def generate_class(model, k: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Decode n fresh draws from component k: an (n, N) matrix of samples.

    `model` is anything with .prior and .decoder (see training.ModelState).
    """
    codes = sample_component(model.prior, k, n, rng)
    if n == 0:
        return np.zeros((0, model.decoder.out_dim))
    out, _ = forward(model.decoder, codes)
    return out
