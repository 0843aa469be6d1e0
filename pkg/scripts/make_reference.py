"""Regenerate the committed reference fixtures used by the test suite:
a 3-epoch deterministic benchmark run, its training log, and its eval
report. Values are platform-dependent at the last few bits, so tests
compare against them at 1e-9 relative."""

from pathlib import Path

from segma.cli import main

OUT = Path(__file__).parent.parent / "tests" / "data" / "reference"


def regenerate():
    OUT.mkdir(parents=True, exist_ok=True)
    ckpt = OUT / "model.ckpt"
    assert main([
        "train", "--data", "synthetic", "--epochs", "3", "--seed", "0",
        "--deterministic", "--out", str(ckpt), "--log", str(OUT / "train.log"),
    ]) == 0
    assert main([
        "eval", "--ckpt", str(ckpt), "--data", "synthetic", "--n", "600",
        "--seed", "0", "--out", str(OUT / "report.tsv"),
    ]) == 0


if __name__ == "__main__":
    regenerate()
