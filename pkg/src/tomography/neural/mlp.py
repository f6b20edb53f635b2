"""Fully connected ReLU network with softmax cross-entropy, on a flat parameter vector.

Parameters are laid out layer by layer as ``W_l`` (fan_in x fan_out, row
major) followed by ``b_l``. Everything the trainers need goes through the flat
vector so that subspace charts ``w = A θ + w0`` apply without reshaping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import RngLike, as_generator
from .data import Dataset


@dataclass(frozen=True)
class MlpArchitecture:
    widths: tuple[int, ...]

    def __post_init__(self) -> None:
        widths = tuple(int(w) for w in self.widths)
        if len(widths) < 3:
            raise ValueError("need an input width, at least one hidden layer and an output width")
        if any(w < 1 for w in widths):
            raise ValueError("layer widths must be positive")
        object.__setattr__(self, "widths", widths)

    @classmethod
    def build(cls, input_dim: int, hidden: tuple[int, ...] | list[int], num_classes: int):
        return cls((input_dim, *hidden, num_classes))

    @property
    def input_dim(self) -> int:
        return self.widths[0]

    @property
    def num_classes(self) -> int:
        return self.widths[-1]

    @property
    def num_layers(self) -> int:
        return len(self.widths) - 1

    def layer_slices(self) -> list[tuple[slice, slice]]:
        """(weight slice, bias slice) into the flat vector for every layer."""
        out, pos = [], 0
        for fan_in, fan_out in zip(self.widths[:-1], self.widths[1:]):
            w = slice(pos, pos + fan_in * fan_out)
            pos = w.stop
            b = slice(pos, pos + fan_out)
            pos = b.stop
            out.append((w, b))
        return out

    @property
    def num_params(self) -> int:
        return sum(a * b + b for a, b in zip(self.widths[:-1], self.widths[1:]))

    def unflatten(self, params: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        params = np.asarray(params)
        if params.shape != (self.num_params,):
            raise ValueError(f"expected {self.num_params} parameters, got shape {params.shape}")
        layers = []
        for (ws, bs), fan_in, fan_out in zip(self.layer_slices(), self.widths[:-1], self.widths[1:]):
            layers.append((params[ws].reshape(fan_in, fan_out), params[bs]))
        return layers


def init_params(arch: MlpArchitecture, rng: RngLike) -> np.ndarray:
    """Gaussian weights with std ``1/sqrt(fan_in)``, zero biases."""
    gen = as_generator(rng)
    params = np.zeros(arch.num_params)
    for (ws, _), fan_in, fan_out in zip(arch.layer_slices(), arch.widths[:-1], arch.widths[1:]):
        params[ws] = gen.standard_normal(fan_in * fan_out) / np.sqrt(fan_in)
    return params


def forward(arch: MlpArchitecture, params: np.ndarray, x: np.ndarray):
    """Logits plus the per-layer inputs and pre-activations needed for backprop."""
    layers = arch.unflatten(params)
    inputs, pre = [], []
    h = x
    for i, (W, b) in enumerate(layers):
        inputs.append(h)
        z = h @ W + b
        pre.append(z)
        h = np.maximum(z, 0.0) if i < len(layers) - 1 else z
    return h, inputs, pre


def logits(arch: MlpArchitecture, params: np.ndarray, x: np.ndarray) -> np.ndarray:
    return forward(arch, params, x)[0]


def log_softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def cross_entropy(z: np.ndarray, y: np.ndarray) -> float:
    return float(-np.mean(np.sum(y * log_softmax(z), axis=1)))


def accuracy(z: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(np.argmax(z, axis=1) == np.argmax(y, axis=1)))


def _backward(arch, layers, inputs, pre, dz: np.ndarray) -> np.ndarray:
    grad = np.empty(arch.num_params)
    for i in range(len(layers) - 1, -1, -1):
        ws, bs = arch.layer_slices()[i]
        grad[ws] = (inputs[i].T @ dz).ravel()
        grad[bs] = dz.sum(axis=0)
        if i:
            dz = (dz @ layers[i][0].T) * (pre[i - 1] > 0)
    return grad


def loss_and_grad(arch: MlpArchitecture, params: np.ndarray, batch: Dataset) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over ``batch`` and its exact gradient."""
    z, inputs, pre = forward(arch, params, batch.inputs)
    logp = log_softmax(z)
    loss = float(-np.mean(np.sum(batch.labels * logp, axis=1)))
    dz = (np.exp(logp) - batch.labels) / batch.size
    return loss, _backward(arch, arch.unflatten(params), inputs, pre, dz)


def evaluate(arch: MlpArchitecture, params: np.ndarray, data: Dataset) -> tuple[float, float]:
    z = logits(arch, params, data.inputs)
    return cross_entropy(z, data.labels), accuracy(z, data.labels)


def logit_jacobian(arch: MlpArchitecture, params: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Per-example Jacobian of the logits, shape ``(N, C, D)``."""
    layers = arch.unflatten(params)
    _, inputs, pre = forward(arch, params, x)
    n, C = x.shape[0], arch.num_classes
    jac = np.empty((n, C, arch.num_params))
    slices = arch.layer_slices()
    for c in range(C):
        dz = np.zeros((n, C))
        dz[:, c] = 1.0
        for i in range(len(layers) - 1, -1, -1):
            ws, bs = slices[i]
            jac[:, c, ws] = np.einsum("ni,nj->nij", inputs[i], dz).reshape(n, -1)
            jac[:, c, bs] = dz
            if i:
                dz = (dz @ layers[i][0].T) * (pre[i - 1] > 0)
    return jac


class MlpObjective:
    """Training loss of an MLP on a fixed dataset, addressable by example index."""

    def __init__(self, arch: MlpArchitecture, data: Dataset):
        if data.inputs.shape[1] != arch.input_dim or data.num_classes != arch.num_classes:
            raise ValueError("dataset shape does not match the architecture")
        self.arch = arch
        self.data = data
        self.dim = arch.num_params
        self.num_examples = data.size

    def loss_and_grad(self, w: np.ndarray, idx: np.ndarray | None = None):
        batch = self.data if idx is None else self.data.subset(idx)
        return loss_and_grad(self.arch, w, batch)

    def evaluate(self, w: np.ndarray) -> tuple[float, float]:
        return evaluate(self.arch, w, self.data)
