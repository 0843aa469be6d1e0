"""Semi-supervised Gaussian mixture auto-encoder.

A dense auto-encoder is fitted so that encoded data matches a mixture of
unit-variance Gaussians in latent space, using a closed-form Cramer-Wold
distance (no sampling) plus a Gaussian-classifier cross-entropy on a small
labeled subset. Each mixture component ends up owning one class, which
enables class-conditional sampling, interpolation, continuous style
transfer, and class-intensity shifts.
"""

from .cw import (
    SphericalGaussian,
    cw_grad,
    cw_inner,
    cw_sq_dist_mixture,
    cw_sq_dist_standard,
    phi_d,
    silverman_gamma,
)
from .data import (
    SemiDataset,
    SyntheticSpec,
    dataset_from_arrays,
    dataset_from_idx,
    load_idx,
    make_synthetic,
    split_semi,
    synthetic_benchmark,
)
from .evaluate import (
    FeatureStats,
    fid_proxy,
    frechet_between_sets,
    frechet_distance,
    interpolation_fid,
    test_error,
)
from .latent import (
    LatentCode,
    class_intensity,
    generate_class,
    interpolate,
    style_transfer,
    transfer_path,
)
from .mixture import (
    GaussianMixturePrior,
    classify,
    cross_entropy,
    cross_entropy_grad,
    init_means,
    log_posterior,
    sample_component,
    sample_prior,
    set_masses_from_labels,
)
from .nn import DenseNet, OptimizerState, adam_step, backward, forward, glorot_init, mse, mse_grad
from .training import (
    Batch,
    ModelState,
    NonFiniteLossError,
    TrainingConfig,
    TrainingLog,
    fit,
    init_model,
    make_batches,
    total_loss,
    train_step,
)
from .checkpoint import (
    CheckpointChecksumError,
    CheckpointError,
    CheckpointMagicError,
    CheckpointTruncatedError,
    CheckpointVersionError,
    load_checkpoint,
    save_checkpoint,
)

__version__ = "0.1.0"
