"""Shared fixtures: the committed reference run (checkpoint, training log,
eval report; regenerated by scripts/make_reference.py) and the
once-per-session fully trained benchmark model."""

import time
from pathlib import Path

import pytest

from segma.data import synthetic_benchmark
from segma.evaluate import read_report
from segma.training import TrainingConfig, fit

REFERENCE_DIR = Path(__file__).parent / "data" / "reference"


@pytest.fixture(scope="session")
def reference_run():
    ckpt = REFERENCE_DIR / "model.ckpt"
    log = REFERENCE_DIR / "train.log"
    report = REFERENCE_DIR / "report.tsv"
    if not ckpt.exists():
        pytest.skip("reference fixtures missing; run scripts/make_reference.py")
    return {
        "ckpt": str(ckpt),
        "log_text": log.read_text(),
        "report": read_report(report),
    }


def benchmark_training_config(epochs=160, seed=0, alpha=5.0, beta=10.0):
    """The converged-benchmark recipe: pinned hyperparameters (alpha, beta,
    learning rate), capacity and epochs sized for a tight latent fit."""
    return TrainingConfig(
        encoder_shape=(20, 128, 128, 10),
        alpha=alpha,
        beta=beta,
        learning_rate=3e-4,
        batch_size=64,
        epochs=epochs,
        seed=seed,
    )


@pytest.fixture(scope="session")
def trained_benchmark():
    """Benchmark data plus a fully trained model (about a minute, shared by
    the acceptance suite and the latent-geometry tests)."""
    train, test_x, test_y = synthetic_benchmark(seed=0)
    config = benchmark_training_config()
    start = time.time()
    model, log = fit(train, config)
    elapsed = time.time() - start
    return {
        "model": model,
        "log": log,
        "config": config,
        "train": train,
        "test_x": test_x,
        "test_y": test_y,
        "train_seconds": elapsed,
    }
