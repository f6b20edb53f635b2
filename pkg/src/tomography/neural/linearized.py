"""First-order (tangent-kernel) linearization of an MLP around a reference point."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .mlp import MlpArchitecture, accuracy, cross_entropy, log_softmax, logit_jacobian, logits

DEFAULT_MAX_BYTES = 1 << 30


class JacobianTooLarge(MemoryError):
    def __init__(self, required: int, limit: int):
        super().__init__(f"logit Jacobian needs {required / 2**20:.1f} MiB, "
                         f"limit is {limit / 2**20:.1f} MiB; use fewer examples")
        self.required = required
        self.limit = limit


@dataclass
class LinearizedModel:
    """Logits ``f(w_ref) + J (w - w_ref)`` on a fixed dataset."""

    w_ref: np.ndarray
    ref_logits: np.ndarray  # (N, C)
    jacobian: np.ndarray  # (N, C, D)
    data: Dataset

    @property
    def dim(self) -> int:
        return self.w_ref.size

    @property
    def num_examples(self) -> int:
        return self.data.size

    def logits(self, w: np.ndarray, idx=None) -> np.ndarray:
        jac = self.jacobian if idx is None else self.jacobian[idx]
        base = self.ref_logits if idx is None else self.ref_logits[idx]
        n, C, D = jac.shape
        return base + (jac.reshape(n * C, D) @ (w - self.w_ref)).reshape(n, C)

    def loss_and_grad(self, w: np.ndarray, idx=None) -> tuple[float, np.ndarray]:
        y = self.data.labels if idx is None else self.data.labels[idx]
        jac = self.jacobian if idx is None else self.jacobian[idx]
        logp = log_softmax(self.logits(w, idx))
        loss = float(-np.mean(np.sum(y * logp, axis=1)))
        dz = (np.exp(logp) - y) / y.shape[0]
        n, C, D = jac.shape
        return loss, jac.reshape(n * C, D).T @ dz.ravel()

    def evaluate(self, w: np.ndarray) -> tuple[float, float]:
        z = self.logits(w)
        return cross_entropy(z, self.data.labels), accuracy(z, self.data.labels)


def linearize(arch: MlpArchitecture, w_opt: np.ndarray, data: Dataset,
              max_bytes: int = DEFAULT_MAX_BYTES) -> LinearizedModel:
    required = data.size * arch.num_classes * arch.num_params * 8
    if required > max_bytes:
        raise JacobianTooLarge(required, max_bytes)
    w_opt = np.array(w_opt, dtype=np.float64, copy=True)
    return LinearizedModel(w_opt, logits(arch, w_opt, data.inputs),
                           logit_jacobian(arch, w_opt, data.inputs), data)
