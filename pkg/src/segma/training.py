"""Semi-supervised training: the composite objective (reconstruction +
weighted log Cramer-Wold distance to the mixture + weighted Gaussian
cross-entropy on the labeled half), mini-batch construction with labeled
oversampling, and the loop updating encoder, decoder, and component means.

Component masses are set once from the labeled proportions and never
trained. Every quantity is double precision and, for a fixed seed, the run
is bit-reproducible.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np

from .cw import cw_grad, cw_sq_dist_mixture, silverman_gamma
from .data import SemiDataset
from .mixture import (
    GaussianMixturePrior,
    classify,
    cross_entropy,
    cross_entropy_grad,
    init_means,
    set_masses_from_labels,
)
from .nn import DenseNet, OptimizerState, adam_step, backward, forward, glorot_init, mse, mse_grad

LOG_COLUMNS = ("epoch", "mse", "log_cw", "ce", "total", "val_accuracy")


class NonFiniteLossError(RuntimeError):
    """A loss component became non-finite; the message names it."""


@dataclass(frozen=True)
class TrainingConfig:
    encoder_shape: tuple[int, ...]
    decoder_shape: tuple[int, ...] = ()
    alpha: float = 5.0
    beta: float = 10.0
    learning_rate: float = 3e-4
    means_learning_rate: float | None = None  # defaults to learning_rate
    batch_size: int = 64
    epochs: int = 20
    seed: int = 0
    labeled_fraction: float = 0.5  # fixed; batches are half labeled
    gamma_rule: str = "silverman"
    log_eps: float = 1e-12
    deterministic: bool = False

    def __post_init__(self):
        enc = tuple(int(w) for w in self.encoder_shape)
        dec = tuple(int(w) for w in self.decoder_shape) if self.decoder_shape else enc[::-1]
        object.__setattr__(self, "encoder_shape", enc)
        object.__setattr__(self, "decoder_shape", dec)
        if len(enc) < 2:
            raise ValueError("encoder_shape needs at least input and latent widths")
        if dec[0] != enc[-1] or dec[-1] != enc[0]:
            raise ValueError(
                f"decoder shape {dec} does not invert encoder shape {enc}"
            )
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")
        if self.batch_size < 2 or self.batch_size % 2:
            raise ValueError("batch_size must be an even integer >= 2")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.labeled_fraction != 0.5:
            raise ValueError("labeled_fraction is fixed at 1/2")
        if self.gamma_rule != "silverman":
            raise ValueError("only the silverman gamma rule is supported")
        if not self.log_eps > 0:
            raise ValueError("log_eps must be > 0")

    @property
    def latent_dim(self) -> int:
        return self.encoder_shape[-1]

    def gamma(self, n_classes: int) -> float:
        """Silverman bandwidth from the per-class labeled batch count
        N_c = round(batch_size / (2K)), clamped to at least 1."""
        n_c = max(1, round(self.batch_size / (2.0 * n_classes)))
        return silverman_gamma(n_c)


Batch = namedtuple("Batch", ["x_unlabeled", "x_labeled", "y_labeled"])

LossParts = namedtuple("LossParts", ["total", "mse", "log_cw", "ce"])


@dataclass
class ModelState:
    encoder: DenseNet
    decoder: DenseNet
    prior: GaussianMixturePrior
    opt_encoder: OptimizerState
    opt_decoder: OptimizerState
    opt_means: OptimizerState
    config: TrainingConfig
    step: int = 0
    input_shape: tuple[int, ...] = ()

    def __post_init__(self):
        if self.encoder.out_dim != self.decoder.in_dim:
            raise ValueError("encoder out_dim must equal decoder in_dim")
        if self.encoder.out_dim != self.prior.dim:
            raise ValueError("latent dim and prior dim differ")
        if not self.input_shape:
            self.input_shape = (self.encoder.in_dim,)

    @property
    def n_classes(self) -> int:
        return self.prior.n_components

    def encode(self, x: np.ndarray) -> np.ndarray:
        out, _ = forward(self.encoder, np.atleast_2d(x))
        return out

    def decode(self, z: np.ndarray) -> np.ndarray:
        out, _ = forward(self.decoder, np.atleast_2d(z))
        return out


def init_model(config: TrainingConfig, n_classes: int,
               masses: np.ndarray | None = None,
               input_shape: tuple[int, ...] = ()) -> ModelState:
    """Fresh model: Glorot-initialized nets, simplex means at unit pairwise
    distance (seeded random orientation), uniform masses unless given."""
    ss = np.random.SeedSequence(config.seed)
    rng_enc, rng_dec, rng_means = (np.random.default_rng(s) for s in ss.spawn(3))
    encoder = glorot_init(config.encoder_shape, rng_enc)
    decoder = glorot_init(config.decoder_shape, rng_dec)
    means = init_means(n_classes, config.latent_dim, rng_means)
    if masses is None:
        masses = np.full(n_classes, 1.0 / n_classes)
    prior = GaussianMixturePrior(means, masses)
    lr = config.learning_rate
    means_lr = config.means_learning_rate if config.means_learning_rate is not None else lr
    return ModelState(
        encoder=encoder,
        decoder=decoder,
        prior=prior,
        opt_encoder=OptimizerState.for_params(encoder.params(), lr),
        opt_decoder=OptimizerState.for_params(decoder.params(), lr),
        opt_means=OptimizerState.for_params([prior.means], means_lr),
        config=config,
        input_shape=tuple(input_shape),
    )


def _loss_and_grads(model: ModelState, batch: Batch, config: TrainingConfig, want_grads: bool):
    xu = np.atleast_2d(np.asarray(batch.x_unlabeled, dtype=np.float64))
    xl = np.atleast_2d(np.asarray(batch.x_labeled, dtype=np.float64))
    if xu.shape[0] == 0 or xl.shape[0] == 0:
        raise ValueError("both batch halves must be nonempty")
    x_all = np.vstack([xu, xl])
    m_u = xu.shape[0]
    prior = model.prior

    codes, enc_cache = forward(model.encoder, x_all)
    recon, dec_cache = forward(model.decoder, codes)

    mse_val = mse(x_all, recon)
    gamma = config.gamma(prior.n_components)
    d2 = cw_sq_dist_mixture(codes, prior.masses, prior.means, 1.0, gamma)
    log_cw = float(np.log(d2 + config.log_eps))
    ce_val = 0.0
    if config.beta > 0:
        ce_val = cross_entropy(codes[m_u:], batch.y_labeled, prior)

    for name, value in (("mse", mse_val), ("log_cw", log_cw), ("cross_entropy", ce_val)):
        if not np.isfinite(value):
            raise NonFiniteLossError(f"loss component {name} is non-finite ({value})")
    total = mse_val + config.alpha * log_cw + config.beta * ce_val
    parts = LossParts(total=total, mse=mse_val, log_cw=log_cw, ce=ce_val)
    if not want_grads:
        return parts, None

    dec_grads, d_codes = backward(model.decoder, dec_cache, mse_grad(x_all, recon))
    d_means = np.zeros_like(prior.means)
    if config.alpha > 0:
        dz_cw, dmu_cw = cw_grad(codes, prior.masses, prior.means, 1.0, gamma)
        scale = config.alpha / (d2 + config.log_eps)
        d_codes = d_codes + scale * dz_cw
        d_means += scale * dmu_cw
    if config.beta > 0:
        dz_ce, dmu_ce = cross_entropy_grad(codes[m_u:], batch.y_labeled, prior)
        d_codes[m_u:] += config.beta * dz_ce
        d_means += config.beta * dmu_ce
    enc_grads, _ = backward(model.encoder, enc_cache, d_codes)
    return parts, (enc_grads, dec_grads, d_means)


def total_loss(model: ModelState, batch_unlabeled, batch_labeled, config: TrainingConfig):
    """Composite objective on one batch pair.

    batch_labeled is (features, labels). Returns (total, LossParts); with
    beta = 0 the ce component is reported as 0, and with alpha = beta = 0
    the total equals the reconstruction error exactly.
    """
    xl, yl = batch_labeled
    parts, _ = _loss_and_grads(model, Batch(batch_unlabeled, xl, yl), config, want_grads=False)
    return parts.total, parts


def _allocate_counts(proportions: np.ndarray, total: int, rng: np.random.Generator) -> np.ndarray:
    """Integer per-class counts summing to `total`, proportional allocation
    with the fractional remainders rounded stochastically."""
    target = proportions * total
    base = np.floor(target).astype(np.int64)
    rem = total - int(base.sum())
    if rem > 0:
        frac = np.maximum(target - base, 0.0)
        if frac.sum() <= 0:
            frac = np.ones_like(frac)
        extra = rng.choice(len(proportions), size=rem, replace=False, p=frac / frac.sum())
        base[extra] += 1
    return base


def make_batches(dataset: SemiDataset, config: TrainingConfig, rng: np.random.Generator):
    """One epoch of (unlabeled half, labeled half) batches.

    Unlabeled rows are drawn without replacement (a seeded permutation), so
    each is covered exactly once per epoch; the final batch may be short.
    The labeled half matches the unlabeled half in size and is drawn with
    replacement (oversampling), stratified by the labeled-set class
    proportions with stochastic rounding of the fractional allocations.
    """
    half = config.batch_size // 2
    unlab = dataset.unlabeled_idx
    if unlab.size == 0:
        unlab = np.arange(dataset.n_total)  # fully labeled degenerate case
    labeled_idx = dataset.labeled_idx
    labels = dataset.labels
    if labeled_idx.size == 0:
        raise ValueError("dataset has no labeled samples")
    k = dataset.n_classes
    proportions = np.bincount(labels - 1, minlength=k).astype(np.float64) / labels.size
    pools = [labeled_idx[labels == cls] for cls in range(1, k + 1)]
    label_of = np.zeros(dataset.n_total, dtype=np.int64)
    label_of[labeled_idx] = labels

    order = rng.permutation(unlab)
    for lo in range(0, order.size, half):
        chunk = order[lo : lo + half]
        counts = _allocate_counts(proportions, chunk.size, rng)
        picks = [rng.choice(pools[c], size=counts[c], replace=True)
                 for c in range(k) if counts[c] > 0]
        lab = np.concatenate(picks)
        lab = lab[rng.permutation(lab.size)]
        yield Batch(
            x_unlabeled=dataset.features[chunk],
            x_labeled=dataset.features[lab],
            y_labeled=label_of[lab],
        )


def train_step(model: ModelState, batch: Batch, config: TrainingConfig) -> LossParts:
    """One forward/backward pass and one Adam update on encoder, decoder,
    and component means; masses are untouched."""
    parts, grads = _loss_and_grads(model, batch, config, want_grads=True)
    enc_grads, dec_grads, d_means = grads
    adam_step(model.encoder.params(), enc_grads, model.opt_encoder,
              model.encoder.param_names("encoder"))
    adam_step(model.decoder.params(), dec_grads, model.opt_decoder,
              model.decoder.param_names("decoder"))
    adam_step([model.prior.means], [d_means], model.opt_means, ["prior.means"])
    model.step += 1
    return parts


@dataclass
class TrainingLog:
    records: list[dict] = field(default_factory=list)

    def append(self, **kwargs):
        self.records.append(dict(kwargs))

    def to_tsv(self) -> str:
        lines = []
        for rec in self.records:
            cells = [str(rec["epoch"])] + [repr(float(rec[c])) for c in LOG_COLUMNS[1:]]
            lines.append("\t".join(cells))
        return "\n".join(lines) + ("\n" if lines else "")

    def write(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_tsv())

    @classmethod
    def parse(cls, text: str) -> "TrainingLog":
        log = cls()
        for line in text.splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            cells = line.split("\t")
            if len(cells) != len(LOG_COLUMNS):
                raise ValueError(f"log line has {len(cells)} columns, expected {len(LOG_COLUMNS)}")
            rec = {"epoch": int(cells[0])}
            rec.update({c: float(v) for c, v in zip(LOG_COLUMNS[1:], cells[1:])})
            log.records.append(rec)
        return log


def _validation_slice(dataset: SemiDataset, rng: np.random.Generator, cap: int = 1000):
    """A held-out labeled slice for per-epoch accuracy: rows outside the
    visible labeled set whose ground truth was retained. Falls back to the
    labeled training set when no ground truth is available."""
    unlab = dataset.unlabeled_idx
    if dataset.all_labels is not None and unlab.size > 0:
        take = rng.permutation(unlab)[: min(cap, unlab.size)]
        return dataset.features[take], np.asarray(dataset.all_labels)[take]
    return dataset.labeled_features(), dataset.labels


def fit(dataset: SemiDataset, config: TrainingConfig,
        val_features: np.ndarray | None = None,
        val_labels: np.ndarray | None = None):
    """Full training run. Returns (ModelState, TrainingLog).

    Masses come from the labeled proportions; means start on a unit-edge
    simplex. Per epoch the log records the mean loss components and the
    posterior-classifier accuracy on a held-out labeled slice (or the one
    supplied explicitly).
    """
    if dataset.features.shape[1] != config.encoder_shape[0]:
        raise ValueError(
            f"data dimension {dataset.features.shape[1]} does not match "
            f"encoder input {config.encoder_shape[0]}"
        )
    masses = set_masses_from_labels(dataset.labels, dataset.n_classes)
    model = init_model(config, dataset.n_classes, masses=masses,
                       input_shape=dataset.input_shape)
    ss = np.random.SeedSequence(config.seed)
    _, _, _, batch_seed, val_seed = ss.spawn(5)
    rng_batches = np.random.default_rng(batch_seed)
    if val_features is None:
        val_features, val_labels = _validation_slice(dataset, np.random.default_rng(val_seed))

    log = TrainingLog()
    for epoch in range(config.epochs):
        sums = np.zeros(4)
        steps = 0
        for batch in make_batches(dataset, config, rng_batches):
            parts = train_step(model, batch, config)
            sums += (parts.total, parts.mse, parts.log_cw, parts.ce)
            steps += 1
        mean_total, mean_mse, mean_cw, mean_ce = (sums / max(steps, 1)).tolist()
        pred = classify(model.encode(val_features), model.prior)
        val_acc = float(np.mean(pred == np.asarray(val_labels)))
        log.append(epoch=epoch, mse=mean_mse, log_cw=mean_cw, ce=mean_ce,
                   total=mean_total, val_accuracy=val_acc)
    return model, log
