"""Command-line driver: train, eval, sample, interpolate, transfer, sweep,
serve, plot.

Data arguments accept a .npy feature file (rows are samples, values in
[0, 1]), an IDX image file, or the literal "synthetic" for the built-in
3-blob benchmark ("synthetic:classes=4,dim=16,per_class=500,spread=0.05"
overrides its geometry). File-based features need a label file (.npy ints
or IDX) via --labels-file; label values may be 0-based on disk and are
shifted up when needed.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import evaluate
from .checkpoint import load_checkpoint, save_checkpoint
from .data import (
    BENCHMARK_SPEC,
    SyntheticSpec,
    dataset_from_arrays,
    load_idx,
    make_synthetic,
    split_semi,
    synthetic_benchmark,
)
from .latent import transfer_path
from .training import TrainingConfig, fit


def _usage_error(message: str):
    print(f"usage error: {message}", file=sys.stderr)
    raise SystemExit(2)


def _load_array(path: str, scale: bool) -> np.ndarray:
    if path.endswith(".npy"):
        return np.load(path)
    return load_idx(path, scale=scale)


def _parse_synthetic(arg: str):
    """'synthetic' or 'synthetic:key=value,...' -> SyntheticSpec."""
    spec = {
        "classes": BENCHMARK_SPEC.n_classes,
        "dim": BENCHMARK_SPEC.ambient_dim,
        "per_class": BENCHMARK_SPEC.per_class,
        "spread": BENCHMARK_SPEC.spread,
        "center_seed": BENCHMARK_SPEC.seed,
    }
    _, _, params = arg.partition(":")
    for item in filter(None, params.split(",")):
        key, _, value = item.partition("=")
        if key not in spec:
            _usage_error(f"unknown synthetic parameter {key!r}")
        spec[key] = type(spec[key])(value)
    return SyntheticSpec(
        n_classes=spec["classes"],
        ambient_dim=spec["dim"],
        per_class=spec["per_class"],
        spread=spec["spread"],
        seed=spec["center_seed"],
    )


def _build_train_data(args):
    """Returns (train SemiDataset, (test_x, test_y) | None)."""
    rng = np.random.default_rng(args.seed)
    if args.data.startswith("synthetic"):
        spec = _parse_synthetic(args.data)
        if spec == BENCHMARK_SPEC:
            train, test_x, test_y = synthetic_benchmark(seed=args.seed, n_labeled=args.labels)
            return train, (test_x, np.asarray(test_y))
        full = make_synthetic(spec, rng)
        train = split_semi(full, args.labels, stratified=True, rng=rng)
        test_spec = SyntheticSpec(
            n_classes=spec.n_classes, ambient_dim=spec.ambient_dim,
            centers=spec.resolved_centers(), spread=spec.spread, per_class=200,
        )
        test = make_synthetic(test_spec, rng)
        return train, (test.features, test.all_labels)
    if not args.labels_file:
        _usage_error("--labels-file is required when --data is a file")
    features = _load_array(args.data, scale=True)
    raw = np.asarray(_load_array(args.labels_file, scale=False), dtype=np.int64).ravel()
    labels = raw + 1 if raw.min() == 0 else raw
    full = dataset_from_arrays(features, labels)
    train = split_semi(full, args.labels, stratified=True, rng=rng)
    return train, None


def _eval_data(args):
    """Test set for eval/sweep: the benchmark's held-out set for synthetic
    data, otherwise the full feature/label files."""
    if args.data.startswith("synthetic"):
        spec = _parse_synthetic(args.data)
        if spec == BENCHMARK_SPEC:
            _, test_x, test_y = synthetic_benchmark(seed=args.seed)
            return test_x, np.asarray(test_y)
        rng = np.random.default_rng(args.seed + 1)
        test = make_synthetic(
            SyntheticSpec(
                n_classes=spec.n_classes, ambient_dim=spec.ambient_dim,
                centers=spec.resolved_centers(), spread=spec.spread, per_class=200,
            ),
            rng,
        )
        return test.features, np.asarray(test.all_labels)
    if not args.labels_file:
        _usage_error("--labels-file is required when --data is a file")
    features = _load_array(args.data, scale=True)
    if features.ndim > 2:
        features = features.reshape(features.shape[0], -1)
    raw = np.asarray(_load_array(args.labels_file, scale=False), dtype=np.int64).ravel()
    labels = raw + 1 if raw.min() == 0 else raw
    return features, labels


def _train_config(args, input_dim: int) -> TrainingConfig:
    hidden = tuple(int(w) for w in args.hidden.split(",") if w)
    return TrainingConfig(
        encoder_shape=(input_dim, *hidden, args.latent_dim),
        alpha=args.alpha,
        beta=args.beta,
        learning_rate=args.lr,
        batch_size=args.batch,
        epochs=args.epochs,
        seed=args.seed,
        deterministic=args.deterministic,
    )


def cmd_train(args) -> int:
    train, _ = _build_train_data(args)
    config = _train_config(args, train.features.shape[1])
    model, log = fit(train, config)
    save_checkpoint(model, args.out)
    log_path = args.log or f"{args.out}.log"
    log.write(log_path)
    if log.records:
        last = log.records[-1]
        print(f"trained {config.epochs} epochs; final total {last['total']!r}; "
              f"val_accuracy {last['val_accuracy']!r}")
    print(f"checkpoint written to {args.out}")
    print(f"log written to {log_path}")
    return 0


def cmd_eval(args) -> int:
    if args.n <= 0:
        _usage_error("--n must be a positive sample count")
    model = load_checkpoint(args.ckpt)
    test_x, test_y = _eval_data(args)
    if test_x.shape[1] != model.encoder.in_dim:
        raise SystemExit(
            f"checkpoint expects input dimension {model.encoder.in_dim}, "
            f"data has {test_x.shape[1]}"
        )
    report = {
        "test_error": evaluate.test_error(model, test_x, test_y),
        "fid_proxy": evaluate.fid_proxy(
            model, test_x, args.n, args.feature_map, np.random.default_rng(args.seed)
        ),
        "interpolation_fid": evaluate.interpolation_fid(
            model, test_x, args.n, args.feature_map, np.random.default_rng(args.seed + 1)
        ),
        "n": args.n,
        "feature_map": args.feature_map,
        "seed": args.seed,
    }
    text = evaluate.format_report(report)
    sys.stdout.write(text)
    if args.out:
        evaluate.write_report(report, args.out)
    return 0


def cmd_sample(args) -> int:
    from .latent import generate_class

    model = load_checkpoint(args.ckpt)
    xs = generate_class(model, args.class_id, args.n, np.random.default_rng(args.seed))
    np.save(args.out, xs)
    print(f"wrote {xs.shape[0]} decoded samples of class {args.class_id} to {args.out}")
    return 0


def _encode_row(model, args, index):
    features = _load_array(args.data, scale=True)
    if features.ndim > 2:
        features = features.reshape(features.shape[0], -1)
    if not 0 <= index < features.shape[0]:
        raise SystemExit(f"row {index} out of range for {features.shape[0]} samples")
    if features.shape[1] != model.encoder.in_dim:
        raise SystemExit(
            f"checkpoint expects input dimension {model.encoder.in_dim}, "
            f"data has {features.shape[1]}"
        )
    return model.encode(features[index])[0]


def cmd_interpolate(args) -> int:
    model = load_checkpoint(args.ckpt)
    za = _encode_row(model, args, args.a)
    zb = _encode_row(model, args, args.b)
    ts = np.linspace(0.0, 1.0, args.steps)
    codes = np.stack([(1 - t) * za + t * zb for t in ts])
    np.save(args.out, model.decode(codes))
    print(f"wrote {args.steps}-step interpolation to {args.out}")
    return 0


def cmd_transfer(args) -> int:
    model = load_checkpoint(args.ckpt)
    z = _encode_row(model, args, args.index)
    codes = transfer_path(z, args.source, args.target, model.prior, args.steps)
    np.save(args.out, model.decode(np.stack([c.z for c in codes])))
    print(f"wrote {args.steps}-step transfer path to {args.out}")
    return 0


def _parse_grid(text: str) -> list[float]:
    values = [float(v) for v in text.split(",") if v]
    if not values:
        _usage_error("empty grid")
    return values


def format_sweep_matrix(alphas, betas, accuracy, fid) -> str:
    lines = []
    for name, grid in (("accuracy", accuracy), ("fid_proxy", fid)):
        lines.append(f"# metric\t{name}")
        lines.append("alpha\\beta\t" + "\t".join(repr(b) for b in betas))
        for a, row in zip(alphas, grid):
            lines.append(repr(a) + "\t" + "\t".join(repr(v) for v in row))
    return "\n".join(lines) + "\n"


def parse_sweep_matrix(text: str) -> dict:
    out = {}
    metric = None
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("# metric\t"):
            metric = line.split("\t", 1)[1]
            out[metric] = {"betas": None, "alphas": [], "rows": []}
        elif line.startswith("alpha\\beta\t"):
            out[metric]["betas"] = [float(v) for v in line.split("\t")[1:]]
        else:
            cells = line.split("\t")
            out[metric]["alphas"].append(float(cells[0]))
            out[metric]["rows"].append([float(v) for v in cells[1:]])
    return out


def cmd_sweep(args) -> int:
    alphas = _parse_grid(args.alpha_grid)
    betas = _parse_grid(args.beta_grid)
    train, test = _build_train_data(args)
    if test is None:
        _usage_error("sweep needs a synthetic dataset or --data with held-out labels")
    test_x, test_y = test
    accuracy = np.zeros((len(alphas), len(betas)))
    fid = np.zeros_like(accuracy)
    for i, alpha in enumerate(alphas):
        for j, beta in enumerate(betas):
            hidden = tuple(int(w) for w in args.hidden.split(",") if w)
            config = TrainingConfig(
                encoder_shape=(train.features.shape[1], *hidden, args.latent_dim),
                alpha=alpha,
                beta=beta,
                learning_rate=args.lr,
                batch_size=args.batch,
                epochs=args.epochs,
                seed=args.seed,
                deterministic=args.deterministic,
            )
            model, _ = fit(train, config)
            accuracy[i, j] = 1.0 - evaluate.test_error(model, test_x, test_y)
            fid[i, j] = evaluate.fid_proxy(
                model, test_x, args.n, args.feature_map, np.random.default_rng(args.seed)
            )
            print(f"alpha={alpha} beta={beta}: accuracy={accuracy[i, j]:.4f} "
                  f"fid={fid[i, j]:.6f}")
    text = format_sweep_matrix(alphas, betas, accuracy.tolist(), fid.tolist())
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"sweep matrix written to {args.out}")
    return 0


def cmd_serve(args) -> int:
    from .service import make_server

    model = load_checkpoint(args.ckpt)
    server = make_server(model, args.host, args.port)
    host, port = server.server_address[:2]
    print(f"serving checkpoint {args.ckpt} on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    finally:
        server.server_close()
    return 0


def _ascii_series(values, width=60, height=12) -> str:
    lo, hi = min(values), max(values)
    span = (hi - lo) or 1.0
    cols = np.linspace(0, len(values) - 1, min(width, len(values))).astype(int)
    rows = []
    for level in range(height, -1, -1):
        cut = lo + span * level / height
        line = "".join("*" if values[c] >= cut else " " for c in cols)
        rows.append(f"{cut:10.4g} |{line}")
    return "\n".join(rows)


def cmd_plot(args) -> int:
    from .training import LOG_COLUMNS, TrainingLog

    with open(args.file, encoding="utf-8") as fh:
        text = fh.read()
    if text.startswith("# metric"):
        matrices = parse_sweep_matrix(text)
        for name, m in matrices.items():
            print(f"{name} (rows alpha={m['alphas']}, cols beta={m['betas']}):")
            for a, row in zip(m["alphas"], m["rows"]):
                print("  " + "  ".join(f"{v:10.4f}" for v in row))
        return 0
    log = TrainingLog.parse(text)
    column = args.column
    if column not in LOG_COLUMNS[1:]:
        _usage_error(f"--column must be one of {LOG_COLUMNS[1:]}")
    values = [r[column] for r in log.records]
    print(f"{column} over {len(values)} epochs")
    print(_ascii_series(values))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segma",
        description="semi-supervised Gaussian mixture auto-encoder",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_data_flags(p, labels_default=30):
        p.add_argument("--data", required=True,
                       help=".npy/.idx features or 'synthetic[:k=v,...]'")
        p.add_argument("--labels", type=int, default=labels_default,
                       help="number of labeled samples made visible to training")
        p.add_argument("--labels-file", default=None,
                       help="label .npy/.idx file for file-based --data")

    def add_model_flags(p):
        p.add_argument("--alpha", type=float, default=5.0)
        p.add_argument("--beta", type=float, default=10.0)
        p.add_argument("--lr", type=float, default=3e-4)
        p.add_argument("--batch", type=int, default=64)
        p.add_argument("--latent-dim", type=int, default=10)
        p.add_argument("--hidden", default="64,64",
                       help="comma-separated hidden widths, e.g. 256,256")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--deterministic", action="store_true")

    p = sub.add_parser("train", help="fit a model and write a checkpoint")
    add_data_flags(p)
    add_model_flags(p)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--log", default=None, help="training log path (default <out>.log)")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="test error and Frechet scores for a checkpoint")
    p.add_argument("--ckpt", required=True)
    add_data_flags(p)
    p.add_argument("--n", type=int, default=2000, help="generated-sample count")
    p.add_argument("--feature-map", default="raw_pixels", choices=["raw_pixels", "pca_50"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="optional report file")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("sample", help="decode fresh draws from one component")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--class-id", type=int, required=True)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help=".npy output")
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("interpolate", help="decode the segment between two encoded rows")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--a", type=int, required=True, help="first row index")
    p.add_argument("--b", type=int, required=True, help="second row index")
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_interpolate)

    p = sub.add_parser("transfer", help="decode a gradual class-transfer path")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--index", type=int, required=True, help="row to transfer")
    p.add_argument("--source", type=int, default=None)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_transfer)

    p = sub.add_parser("sweep", help="train a short model per (alpha, beta) grid cell")
    add_data_flags(p)
    add_model_flags(p)
    p.add_argument("--alpha-grid", required=True, help="comma list, e.g. 0,5")
    p.add_argument("--beta-grid", required=True, help="comma list, e.g. 0,10")
    p.add_argument("--epochs", type=int, default=6)
    p.add_argument("--n", type=int, default=600, help="generated-sample count per cell")
    p.add_argument("--feature-map", default="raw_pixels", choices=["raw_pixels", "pca_50"])
    p.add_argument("--out", required=True, help="matrix file")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("serve", help="HTTP JSON inference service")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("plot", help="ASCII view of a training log or sweep matrix")
    p.add_argument("--file", required=True)
    p.add_argument("--column", default="total")
    p.set_defaults(fn=cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except SystemExit:
        raise
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
