"""Versioned binary model checkpoints.

Layout (all integers little-endian):

    bytes 0-7    magic "SEGMACKP"
    bytes 8-11   u32 format version (currently 1)
    bytes 12-15  u32 metadata length
    ...          metadata: UTF-8 "key=value" lines (config echo, shapes,
                 step counters, and the parameter-block manifest in order)
    ...          parameter blocks: raw little-endian float64, one block per
                 manifest entry, in manifest order
    last 4       CRC-32 of every preceding byte

The round trip is bit-exact for parameters, means, masses, optimizer
state, step counters, and the config echo.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .mixture import GaussianMixturePrior
from .nn import DenseNet, Layer, OptimizerState
from .training import ModelState, TrainingConfig

MAGIC = b"SEGMACKP"
VERSION = 1


class CheckpointError(ValueError):
    """Base class for unreadable checkpoints."""


class CheckpointMagicError(CheckpointError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointTruncatedError(CheckpointError):
    pass


class CheckpointChecksumError(CheckpointError):
    pass


def _block_entries(model: ModelState):
    """(name, array) pairs in the declared serialization order."""
    entries = []
    for prefix, net in (("encoder", model.encoder), ("decoder", model.decoder)):
        for name, param in zip(net.param_names(prefix), net.params()):
            entries.append((name, param))
    entries.append(("prior.means", model.prior.means))
    entries.append(("prior.masses", model.prior.masses))
    for prefix, opt in (
        ("opt_encoder", model.opt_encoder),
        ("opt_decoder", model.opt_decoder),
        ("opt_means", model.opt_means),
    ):
        for i, arr in enumerate(opt.m):
            entries.append((f"{prefix}.m{i}", arr))
        for i, arr in enumerate(opt.v):
            entries.append((f"{prefix}.v{i}", arr))
    return entries


def _config_items(config: TrainingConfig):
    return {
        "encoder_shape": ",".join(map(str, config.encoder_shape)),
        "decoder_shape": ",".join(map(str, config.decoder_shape)),
        "alpha": repr(config.alpha),
        "beta": repr(config.beta),
        "learning_rate": repr(config.learning_rate),
        "means_learning_rate": repr(config.means_learning_rate),
        "batch_size": str(config.batch_size),
        "epochs": str(config.epochs),
        "seed": str(config.seed),
        "labeled_fraction": repr(config.labeled_fraction),
        "gamma_rule": config.gamma_rule,
        "log_eps": repr(config.log_eps),
        "deterministic": str(config.deterministic),
    }


def save_checkpoint(model: ModelState, path) -> None:
    meta_lines = [f"config.{k}={v}" for k, v in _config_items(model.config).items()]
    meta_lines.append(f"n_classes={model.n_classes}")
    meta_lines.append(f"input_shape={','.join(map(str, model.input_shape))}")
    meta_lines.append(f"step={model.step}")
    for prefix, opt in (
        ("opt_encoder", model.opt_encoder),
        ("opt_decoder", model.opt_decoder),
        ("opt_means", model.opt_means),
    ):
        meta_lines.append(f"{prefix}.step_count={opt.step_count}")
        meta_lines.append(f"{prefix}.learning_rate={opt.learning_rate!r}")
        meta_lines.append(f"{prefix}.beta1={opt.beta1!r}")
        meta_lines.append(f"{prefix}.beta2={opt.beta2!r}")
        meta_lines.append(f"{prefix}.eps={opt.eps!r}")
    entries = _block_entries(model)
    for name, arr in entries:
        shape = "x".join(map(str, arr.shape))
        meta_lines.append(f"block={name}:{shape}")
    meta = ("\n".join(meta_lines) + "\n").encode("utf-8")

    payload = bytearray()
    payload += MAGIC
    payload += struct.pack("<I", VERSION)
    payload += struct.pack("<I", len(meta))
    payload += meta
    for _, arr in entries:
        payload += np.ascontiguousarray(arr, dtype="<f8").tobytes()
    payload += struct.pack("<I", zlib.crc32(bytes(payload)))
    with open(path, "wb") as fh:
        fh.write(payload)


def _parse_meta(meta: bytes):
    pairs = []
    for line in meta.decode("utf-8").splitlines():
        if not line:
            continue
        key, _, value = line.partition("=")
        pairs.append((key, value))
    return pairs


def load_checkpoint(path) -> ModelState:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < len(MAGIC) + 12:
        raise CheckpointTruncatedError(f"{path}: {len(raw)} bytes is shorter than any checkpoint")
    if raw[: len(MAGIC)] != MAGIC:
        raise CheckpointMagicError(f"{path}: bad magic {raw[:len(MAGIC)]!r}")
    version, meta_len = struct.unpack_from("<II", raw, len(MAGIC))
    if version != VERSION:
        raise CheckpointVersionError(f"{path}: format version {version}, expected {VERSION}")
    header_end = len(MAGIC) + 8
    if header_end + meta_len + 4 > len(raw):
        raise CheckpointTruncatedError(f"{path}: metadata block extends past end of file")
    (stored_crc,) = struct.unpack_from("<I", raw, len(raw) - 4)
    crc_ok = zlib.crc32(raw[:-4]) == stored_crc

    def shape_of(spec: str):
        name, _, dims = spec.partition(":")
        shape = tuple(int(d) for d in dims.split("x") if d)
        return name, shape

    try:
        meta = _parse_meta(raw[header_end : header_end + meta_len])
        kv = {k: v for k, v in meta if k != "block"}
        manifest = [shape_of(v) for k, v in meta if k == "block"]
        block_bytes = sum(8 * (int(np.prod(shape)) if shape else 1) for _, shape in manifest)
    except (UnicodeDecodeError, ValueError):
        if not crc_ok:
            raise CheckpointChecksumError(f"{path}: CRC-32 mismatch") from None
        raise CheckpointError(f"{path}: unreadable metadata block") from None

    expected = header_end + meta_len + block_bytes + 4
    if len(raw) < expected:
        raise CheckpointTruncatedError(
            f"{path}: {len(raw)} bytes, manifest promises {expected}"
        )
    if len(raw) > expected:
        raise CheckpointError(f"{path}: {len(raw) - expected} unexpected trailing bytes")
    if not crc_ok:
        raise CheckpointChecksumError(f"{path}: CRC-32 mismatch")

    offset = header_end + meta_len
    blocks = {}
    for name, shape in manifest:
        count = int(np.prod(shape)) if shape else 1
        blocks[name] = np.frombuffer(raw, dtype="<f8", count=count, offset=offset).reshape(shape).copy()
        offset += 8 * count

    def parse_shape_list(text: str):
        return tuple(int(w) for w in text.split(",") if w)

    config = TrainingConfig(
        encoder_shape=parse_shape_list(kv["config.encoder_shape"]),
        decoder_shape=parse_shape_list(kv["config.decoder_shape"]),
        alpha=float(kv["config.alpha"]),
        beta=float(kv["config.beta"]),
        learning_rate=float(kv["config.learning_rate"]),
        means_learning_rate=None
        if kv["config.means_learning_rate"] == "None"
        else float(kv["config.means_learning_rate"]),
        batch_size=int(kv["config.batch_size"]),
        epochs=int(kv["config.epochs"]),
        seed=int(kv["config.seed"]),
        labeled_fraction=float(kv["config.labeled_fraction"]),
        gamma_rule=kv["config.gamma_rule"],
        log_eps=float(kv["config.log_eps"]),
        deterministic=kv["config.deterministic"] == "True",
    )

    def build_net(shape, prefix):
        layers = []
        for i in range(len(shape) - 1):
            w = blocks[f"{prefix}.L{i}.W"]
            b = blocks[f"{prefix}.L{i}.b"]
            act = "identity" if i == len(shape) - 2 else "relu"
            layers.append(Layer(w, b, act))
        return DenseNet(layers)

    encoder = build_net(config.encoder_shape, "encoder")
    decoder = build_net(config.decoder_shape, "decoder")
    prior = GaussianMixturePrior(blocks["prior.means"], blocks["prior.masses"])

    def build_opt(prefix, params):
        opt = OptimizerState(
            learning_rate=float(kv[f"{prefix}.learning_rate"]),
            beta1=float(kv[f"{prefix}.beta1"]),
            beta2=float(kv[f"{prefix}.beta2"]),
            eps=float(kv[f"{prefix}.eps"]),
            step_count=int(kv[f"{prefix}.step_count"]),
        )
        opt.m = [blocks[f"{prefix}.m{i}"] for i in range(len(params))]
        opt.v = [blocks[f"{prefix}.v{i}"] for i in range(len(params))]
        return opt

    return ModelState(
        encoder=encoder,
        decoder=decoder,
        prior=prior,
        opt_encoder=build_opt("opt_encoder", encoder.params()),
        opt_decoder=build_opt("opt_decoder", decoder.params()),
        opt_means=build_opt("opt_means", [prior.means]),
        config=config,
        step=int(kv["step"]),
        input_shape=tuple(int(d) for d in kv["input_shape"].split(",") if d),
    )
