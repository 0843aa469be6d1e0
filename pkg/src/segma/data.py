"""Dataset ingestion and semi-supervised splits.

Supported inputs: big-endian IDX files (the MNIST container format), .npy
row-major float/int arrays, and seeded synthetic Gaussian-blob benchmarks.
A SemiDataset carries the full feature matrix plus a small labeled index
set; ground-truth labels for the remaining rows may be retained for
evaluation only.

Class labels are 1-based (class k pairs with mixture component k). IDX
label files store raw values like MNIST's digits 0..9; dataset assembly
shifts them up by one.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np


class IdxError(ValueError):
    """Base class for IDX container problems."""


class IdxMagicError(IdxError):
    pass


class IdxTypeError(IdxError):
    pass


class IdxTruncatedError(IdxError):
    pass


def load_idx(path, scale: bool = True) -> np.ndarray:
    """Parse a big-endian IDX file.

    Layout: two zero magic bytes, a type byte (only 0x08 = unsigned byte is
    supported), a dimension-count byte, that many big-endian u32 dimension
    sizes, then the raw payload. With scale=True (the default) values are
    mapped to [0, 1] floats, so a 255 pixel becomes exactly 1.0; scale=False
    returns the raw u8 array (used for label files).
    """
    with open(path, "rb") as fh:
        head = fh.read(4)
        if len(head) < 4:
            raise IdxTruncatedError(f"{path}: file shorter than the 4-byte header")
        if head[0] != 0 or head[1] != 0:
            raise IdxMagicError(f"{path}: bad magic bytes {head[:2].hex()}")
        if head[2] != 0x08:
            raise IdxTypeError(f"{path}: unsupported type byte 0x{head[2]:02x} (only u8)")
        ndim = head[3]
        dim_bytes = fh.read(4 * ndim)
        if len(dim_bytes) < 4 * ndim:
            raise IdxTruncatedError(f"{path}: truncated dimension table")
        dims = struct.unpack(f">{ndim}I", dim_bytes)
        count = int(np.prod(dims)) if ndim else 0
        payload = fh.read(count)
        if len(payload) < count:
            raise IdxTruncatedError(
                f"{path}: payload has {len(payload)} bytes, header promises {count}"
            )
    arr = np.frombuffer(payload, dtype=np.uint8).reshape(dims)
    if scale:
        return arr.astype(np.float64) / 255.0
    return arr.copy()


@dataclass
class SemiDataset:
    """Feature matrix plus a small labeled subset.

    features    : (n, N) float64 in [0, 1]
    labeled_idx : indices of the rows whose labels are visible to training
    labels      : 1-based class labels aligned with labeled_idx
    all_labels  : optional ground truth for every row, used only by
                  evaluation and the held-out validation slice
    n_classes   : K
    input_shape : original per-sample shape (for rendering), defaults (N,)
    """

    features: np.ndarray
    labeled_idx: np.ndarray
    labels: np.ndarray
    n_classes: int
    all_labels: np.ndarray | None = None
    input_shape: tuple[int, ...] = ()
    allow_missing_classes: bool = False
    missing_classes: tuple[int, ...] = field(init=False, default=())

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labeled_idx = np.asarray(self.labeled_idx, dtype=np.int64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError("features must be an n x N matrix")
        if self.features.size and (
            self.features.min() < -1e-9 or self.features.max() > 1 + 1e-9
        ):
            raise ValueError(
                f"features must lie in [0, 1], got range "
                f"[{self.features.min():.4g}, {self.features.max():.4g}]"
            )
        n = self.features.shape[0]
        if self.labeled_idx.ndim != 1 or self.labels.shape != self.labeled_idx.shape:
            raise ValueError("labeled_idx and labels must be aligned vectors")
        if len(np.unique(self.labeled_idx)) != len(self.labeled_idx):
            raise ValueError("labeled_idx contains duplicates")
        if self.labeled_idx.size and (
            self.labeled_idx.min() < 0 or self.labeled_idx.max() >= n
        ):
            raise ValueError("labeled_idx out of range")
        if self.labels.size and (self.labels.min() < 1 or self.labels.max() > self.n_classes):
            raise ValueError(f"labels must lie in 1..{self.n_classes}")
        if not self.input_shape:
            self.input_shape = (self.features.shape[1],)
        present = set(np.unique(self.labels).tolist())
        missing = tuple(k for k in range(1, self.n_classes + 1) if k not in present)
        self.missing_classes = missing
        if missing and not self.allow_missing_classes:
            raise ValueError(
                f"classes {missing} have no labeled sample; pass "
                "allow_missing_classes=True to accept this"
            )

    @property
    def n_total(self) -> int:
        return self.features.shape[0]

    @property
    def unlabeled_idx(self) -> np.ndarray:
        mask = np.ones(self.n_total, dtype=bool)
        mask[self.labeled_idx] = False
        return np.flatnonzero(mask)

    def labeled_features(self) -> np.ndarray:
        return self.features[self.labeled_idx]


@dataclass(frozen=True)
class SyntheticSpec:
    """Gaussian-blob benchmark description.

    centers is (K, N); when None, centers are drawn uniformly in
    [0.25, 0.75]^N from the spec's seed so blobs stay inside [0, 1].
    """

    n_classes: int
    ambient_dim: int
    centers: np.ndarray | None = None
    spread: float = 0.05
    per_class: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValueError("need at least two classes")
        if not self.spread > 0:
            raise ValueError("spread must be > 0")
        if self.centers is not None:
            c = np.asarray(self.centers, dtype=np.float64)
            if c.shape != (self.n_classes, self.ambient_dim):
                raise ValueError("centers must be (n_classes, ambient_dim)")
            object.__setattr__(self, "centers", c)

    def resolved_centers(self) -> np.ndarray:
        if self.centers is not None:
            return self.centers
        rng = np.random.default_rng(self.seed)
        return rng.uniform(0.25, 0.75, size=(self.n_classes, self.ambient_dim))


def make_synthetic(spec: SyntheticSpec, rng: np.random.Generator | None = None) -> SemiDataset:
    """Sample `per_class` points around each class center, clip to [0, 1].

    Returns a fully labeled SemiDataset (labeled_idx covers every row);
    apply split_semi to hide most labels.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    centers = spec.resolved_centers()
    feats = []
    labels = []
    for k in range(spec.n_classes):
        pts = centers[k][None, :] + spec.spread * rng.standard_normal(
            (spec.per_class, spec.ambient_dim)
        )
        feats.append(pts)
        labels.append(np.full(spec.per_class, k + 1, dtype=np.int64))
    features = np.clip(np.vstack(feats), 0.0, 1.0)
    all_labels = np.concatenate(labels)
    n = features.shape[0]
    return SemiDataset(
        features=features,
        labeled_idx=np.arange(n),
        labels=all_labels,
        n_classes=spec.n_classes,
        all_labels=all_labels,
    )


def split_semi(dataset: SemiDataset, n_labeled: int, stratified: bool,
               rng: np.random.Generator) -> SemiDataset:
    """Mark n_labeled rows as the visible labeled set.

    Stratified mode balances the picks per class (requires n_labeled >= K
    and ground-truth labels for every row). The remaining rows keep their
    ground truth in all_labels for evaluation only.
    """
    if dataset.all_labels is None:
        raise ValueError("split_semi needs ground-truth labels for every row")
    n = dataset.n_total
    if not 1 <= n_labeled <= n:
        raise ValueError(f"n_labeled must be in 1..{n}, got {n_labeled}")
    truth = np.asarray(dataset.all_labels, dtype=np.int64)
    if stratified:
        k = dataset.n_classes
        if n_labeled < k:
            raise ValueError(f"stratified split needs n_labeled >= {k} (one per class)")
        base, extra = divmod(n_labeled, k)
        picks = []
        # distribute the remainder over a seeded class permutation
        extra_classes = rng.permutation(k)[:extra] + 1
        for cls in range(1, k + 1):
            want = base + (1 if cls in extra_classes else 0)
            pool = np.flatnonzero(truth == cls)
            if len(pool) < want:
                raise ValueError(f"class {cls} has only {len(pool)} rows, need {want}")
            picks.append(rng.choice(pool, size=want, replace=False))
        idx = np.sort(np.concatenate(picks))
    else:
        idx = np.sort(rng.choice(n, size=n_labeled, replace=False))
    return SemiDataset(
        features=dataset.features,
        labeled_idx=idx,
        labels=truth[idx],
        n_classes=dataset.n_classes,
        all_labels=truth,
        input_shape=dataset.input_shape,
        allow_missing_classes=True,
    )


def dataset_from_arrays(features: np.ndarray, labels: np.ndarray, n_classes: int | None = None,
                        input_shape: tuple[int, ...] = ()) -> SemiDataset:
    """Fully labeled SemiDataset from raw arrays (flattens image stacks)."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.ndim > 2:
        input_shape = input_shape or tuple(features.shape[1:])
        features = features.reshape(features.shape[0], -1)
    if n_classes is None:
        n_classes = int(labels.max())
    n = features.shape[0]
    return SemiDataset(
        features=features,
        labeled_idx=np.arange(n),
        labels=labels,
        n_classes=n_classes,
        all_labels=labels,
        input_shape=input_shape,
    )


def dataset_from_idx(images_path, labels_path, n_classes: int | None = None) -> SemiDataset:
    """Assemble a fully labeled dataset from an IDX image/label file pair.

    Raw label values (e.g. digits 0..9) are shifted to 1-based classes.
    """
    images = load_idx(images_path, scale=True)
    raw = load_idx(labels_path, scale=False).astype(np.int64).ravel()
    if images.shape[0] != raw.shape[0]:
        raise ValueError(
            f"image count {images.shape[0]} does not match label count {raw.shape[0]}"
        )
    labels = raw + 1
    k = n_classes if n_classes is not None else int(labels.max())
    return dataset_from_arrays(images, labels, n_classes=k)


# Canonical desk-scale blob benchmark: 3 classes in 20 ambient dims, 1010
# rows per class so 30 stratified labels leave exactly 3000 unlabeled rows.
# The center seed is fixed apart from the user seed so the geometry of the
# benchmark is stable while sampling noise and splits still follow `seed`.
BENCHMARK_SPEC = SyntheticSpec(n_classes=3, ambient_dim=20, spread=0.05, per_class=1010, seed=7)


def synthetic_benchmark(seed: int = 0, n_labeled: int = 30, per_class_test: int = 200):
    """Standard 3-blob benchmark: train set with `n_labeled` stratified
    labels (3000 unlabeled + 30 labeled at the defaults), plus a labeled
    test set.

    Returns (train SemiDataset, test_features, test_labels).
    """
    rng = np.random.default_rng(seed)
    train_full = make_synthetic(BENCHMARK_SPEC, rng)
    train = split_semi(train_full, n_labeled=n_labeled, stratified=True, rng=rng)
    test_spec = SyntheticSpec(
        n_classes=BENCHMARK_SPEC.n_classes,
        ambient_dim=BENCHMARK_SPEC.ambient_dim,
        centers=BENCHMARK_SPEC.resolved_centers(),
        spread=BENCHMARK_SPEC.spread,
        per_class=per_class_test,
    )
    test = make_synthetic(test_spec, rng)
    return train, test.features, test.all_labels
