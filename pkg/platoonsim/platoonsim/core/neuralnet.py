"""Dense feed-forward networks with exact reverse-mode gradients and Adam."""
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from platoonsim.core.errors import StructuralError

RELU = "relu"
TANH = "tanh"
IDENTITY = "identity"
ACTIVATIONS = (RELU, TANH, IDENTITY)


@dataclass
class DenseLayer:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str = IDENTITY

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise StructuralError(f"unknown activation {self.activation!r}")
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise StructuralError(f"bias {self.bias.shape} does not match weight {self.weight.shape}")


@dataclass
class Mlp:
    layers: List[DenseLayer]

    def __post_init__(self):
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.weight.shape[0] != nxt.weight.shape[1]:
                raise StructuralError(
                    f"layer output {prev.weight.shape[0]} does not feed next input {nxt.weight.shape[1]}"
                )

    @property
    def dims(self) -> List[int]:
        return [self.layers[0].weight.shape[1]] + [layer.weight.shape[0] for layer in self.layers]

    def copy(self) -> "Mlp":
        return Mlp([DenseLayer(l.weight.copy(), l.bias.copy(), l.activation) for l in self.layers])

    def arrays(self) -> List[np.ndarray]:
        """Parameters in file order: weight then bias, per layer."""
        out = []
        for layer in self.layers:
            out.extend((layer.weight, layer.bias))
        return out

    def with_arrays(self, arrays: Sequence[np.ndarray]) -> "Mlp":
        return Mlp([
            DenseLayer(arrays[2 * i], arrays[2 * i + 1], layer.activation)
            for i, layer in enumerate(self.layers)
        ])


@dataclass
class ForwardCache:
    inputs: List[np.ndarray]  # input of each layer, (batch, in)
    outputs: List[np.ndarray]  # activation output of each layer, (batch, out)
    squeeze: bool


@dataclass
class AdamState:
    m: List[np.ndarray]
    v: List[np.ndarray]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_mlp(dims: Sequence[int], activations: Sequence[str], rng: np.random.Generator,
             final_scale: float = 3e-3) -> Mlp:
    """Uniform +-1/sqrt(fan_in) initialization; the last layer is additionally scaled."""
    if len(activations) != len(dims) - 1:
        raise StructuralError("need one activation per layer")
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(dims[:-1], dims[1:])):
        bound = 1.0 / np.sqrt(fan_in)
        if i == len(dims) - 2:
            bound *= final_scale
        weight = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        bias = rng.uniform(-bound, bound, size=fan_out)
        layers.append(DenseLayer(weight, bias, activations[i]))
    return Mlp(layers)


def _activate(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == RELU:
        return np.maximum(z, 0.0)
    if activation == TANH:
        return np.tanh(z)
    return z


def _activation_grad(z_out: np.ndarray, activation: str) -> np.ndarray:
    # Derivative expressed through the activation output.
    if activation == RELU:
        return (z_out > 0.0).astype(float)
    if activation == TANH:
        return 1.0 - z_out * z_out
    return np.ones_like(z_out)


def forward(params: Mlp, x: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 1
    h = x[None, :] if squeeze else x
    if h.ndim != 2 or h.shape[1] != params.dims[0]:
        raise StructuralError(f"input shape {x.shape} does not match network input {params.dims[0]}")

    inputs, outputs = [], []
    for layer in params.layers:
        inputs.append(h)
        h = _activate(h @ layer.weight.T + layer.bias, layer.activation)
        outputs.append(h)
    return (h[0] if squeeze else h), ForwardCache(inputs, outputs, squeeze)


def backward(params: Mlp, cache: ForwardCache, upstream: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
    """Gradients of sum(output * upstream) w.r.t. every parameter and the input.

    Parameter gradients come back in `Mlp.arrays()` order.
    """
    if len(cache.inputs) != len(params.layers) or any(
        inp.shape[1] != layer.weight.shape[1] for inp, layer in zip(cache.inputs, params.layers)
    ):
        raise StructuralError("forward cache does not belong to these parameters")

    g = np.asarray(upstream, dtype=float)
    if cache.squeeze:
        g = g[None, :]
    if g.shape != cache.outputs[-1].shape:
        raise StructuralError(f"upstream gradient {g.shape} does not match output {cache.outputs[-1].shape}")

    grads: List[np.ndarray] = [None] * (2 * len(params.layers))
    for i in reversed(range(len(params.layers))):
        layer = params.layers[i]
        dz = g * _activation_grad(cache.outputs[i], layer.activation)
        grads[2 * i] = dz.T @ cache.inputs[i]
        grads[2 * i + 1] = dz.sum(axis=0)
        g = dz @ layer.weight
    return grads, (g[0] if cache.squeeze else g)


def adam_init(params: Mlp, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    zeros = [np.zeros_like(p) for p in params.arrays()]
    return AdamState(m=zeros, v=[np.zeros_like(p) for p in params.arrays()], step=0,
                     beta1=beta1, beta2=beta2, eps=eps)


def adam_step(params: Mlp, grads: Sequence[np.ndarray], state: AdamState, lr: float) -> Tuple[Mlp, AdamState]:
    """One bias-corrected Adam descent step; returns new params and state."""
    arrays = params.arrays()
    if len(grads) != len(arrays) or any(g.shape != p.shape for g, p in zip(grads, arrays)):
        raise StructuralError("gradient shapes do not match parameters")

    step = state.step + 1
    b1, b2 = state.beta1, state.beta2
    new_m, new_v, new_p = [], [], []
    for p, g, m, v in zip(arrays, grads, state.m, state.v):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1 ** step)
        v_hat = v / (1.0 - b2 ** step)
        new_p.append(p - lr * m_hat / (np.sqrt(v_hat) + state.eps))
        new_m.append(m)
        new_v.append(v)
    return params.with_arrays(new_p), AdamState(new_m, new_v, step, b1, b2, state.eps)


def soft_update(target: Mlp, source: Mlp, tau: float) -> Mlp:
    """theta' <- tau * theta + (1 - tau) * theta'."""
    return target.with_arrays([
        tau * s + (1.0 - tau) * t for t, s in zip(target.arrays(), source.arrays())
    ])
