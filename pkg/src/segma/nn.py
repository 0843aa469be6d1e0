"""Minimal dense feed-forward engine with hand-derived gradients.

Layers are affine maps with ReLU on every hidden layer and identity on the
output layer. There is no autodiff graph: forward caches pre-activations
and backward applies the chain rule layer by layer. The optimizer is Adam
with standard defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Layer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str  # "relu" | "identity"


@dataclass
class DenseNet:
    layers: list[Layer]

    def __post_init__(self):
        if not self.layers:
            raise ValueError("network needs at least one layer")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if nxt.weights.shape[1] != prev.weights.shape[0]:
                raise ValueError("adjacent layer dimensions do not chain")
        if self.layers[-1].activation != "identity":
            raise ValueError("final layer activation must be identity")

    @property
    def in_dim(self) -> int:
        return self.layers[0].weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].weights.shape[0]

    def params(self) -> list[np.ndarray]:
        """Flat parameter list [W1, b1, W2, b2, ...]; views, not copies."""
        out = []
        for layer in self.layers:
            out.append(layer.weights)
            out.append(layer.bias)
        return out

    def param_names(self, prefix: str = "net") -> list[str]:
        names = []
        for i in range(len(self.layers)):
            names += [f"{prefix}.L{i}.W", f"{prefix}.L{i}.b"]
        return names


def glorot_init(shape: tuple[int, ...] | list[int], rng: np.random.Generator) -> DenseNet:
    """Build a DenseNet from a width list, e.g. (784, 256, 256, 10).

    Weights are uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero,
    hidden activations ReLU, output identity.
    """
    shape = list(shape)
    if len(shape) < 2:
        raise ValueError("shape list needs at least input and output widths")
    if any(w < 1 for w in shape):
        raise ValueError(f"zero-width layer in shape {shape}")
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(shape, shape[1:])):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        b = np.zeros(fan_out)
        act = "identity" if i == len(shape) - 2 else "relu"
        layers.append(Layer(w, b, act))
    return DenseNet(layers)


def forward(net: DenseNet, batch: np.ndarray):
    """Run the network on an (m, in_dim) batch.

    Returns (output, cache); the cache keeps each layer's input and
    pre-activation for the backward pass.
    """
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.in_dim:
        raise ValueError(f"batch width {x.shape} does not match in_dim {net.in_dim}")
    cache = []
    for layer in net.layers:
        pre = x @ layer.weights.T + layer.bias
        cache.append((x, pre))
        x = np.maximum(pre, 0.0) if layer.activation == "relu" else pre
    return x, cache


def backward(net: DenseNet, cache, grad_output: np.ndarray):
    """Reverse-mode gradients of forward for the cached batch.

    grad_output is d(loss)/d(output), shape (m, out_dim). Returns
    (param_grads, grad_input) where param_grads lines up with net.params().
    """
    if len(cache) != len(net.layers):
        raise ValueError("cache does not match network depth")
    g = np.asarray(grad_output, dtype=np.float64)
    if g.shape != (cache[-1][1].shape[0], net.out_dim):
        raise ValueError(
            f"grad_output shape {g.shape} does not match cached forward "
            f"({cache[-1][1].shape[0]}, {net.out_dim})"
        )
    param_grads: list[np.ndarray | None] = [None] * (2 * len(net.layers))
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        x, pre = cache[i]
        dz = g * (pre > 0.0) if layer.activation == "relu" else g
        param_grads[2 * i] = dz.T @ x
        param_grads[2 * i + 1] = dz.sum(axis=0)
        g = dz @ layer.weights
    return param_grads, g


def mse(x: np.ndarray, x_rec: np.ndarray) -> float:
    """Mean over samples of the squared reconstruction error, summed over
    coordinates: (1/m) * sum_i ||x_i - x_rec_i||^2."""
    x = np.asarray(x, dtype=np.float64)
    x_rec = np.asarray(x_rec, dtype=np.float64)
    if x.shape != x_rec.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {x_rec.shape}")
    diff = x - x_rec
    return float(np.sum(diff * diff) / x.shape[0])


def mse_grad(x: np.ndarray, x_rec: np.ndarray) -> np.ndarray:
    """Gradient of mse w.r.t. x_rec: 2 * (x_rec - x) / m."""
    x = np.asarray(x, dtype=np.float64)
    x_rec = np.asarray(x_rec, dtype=np.float64)
    if x.shape != x_rec.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {x_rec.shape}")
    return 2.0 * (x_rec - x) / x.shape[0]


@dataclass
class OptimizerState:
    """Adam accumulators for one parameter list."""

    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: list[np.ndarray], learning_rate: float) -> "OptimizerState":
        state = cls(learning_rate=learning_rate)
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
        return state


def adam_step(params: list[np.ndarray], grads, state: OptimizerState, names=None):
    """One in-place Adam update with bias correction.

    Raises on non-finite gradients, naming the offending parameter block.
    Returns (params, state) for convenience.
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValueError("params, grads, and optimizer state must align")
    for i, g in enumerate(grads):
        if not np.all(np.isfinite(g)):
            label = names[i] if names else f"block {i}"
            raise FloatingPointError(f"non-finite gradient in parameter {label}")
    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= state.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return params, state
