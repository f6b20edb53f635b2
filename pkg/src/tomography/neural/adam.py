from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AdamConfig:
    learning_rate: float = 5e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-7
    batch_size: int = 128
    epochs: int = 3

    def __post_init__(self) -> None:
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")
        if self.learning_rate <= 0 or self.eps <= 0:
            raise ValueError("learning rate and eps must be positive")
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")


@dataclass(frozen=True)
class AdamState:
    params: np.ndarray
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def init(cls, params: np.ndarray) -> "AdamState":
        params = np.array(params, dtype=np.float64)
        return cls(params, np.zeros_like(params), np.zeros_like(params), 0)


def adam_step(state: AdamState, grad: np.ndarray, config: AdamConfig) -> AdamState:
    """One bias-corrected Adam update; returns a new state."""
    t = state.step + 1
    m = config.beta1 * state.m + (1.0 - config.beta1) * grad
    v = config.beta2 * state.v + (1.0 - config.beta2) * (grad * grad)
    m_hat = m / (1.0 - config.beta1 ** t)
    v_hat = v / (1.0 - config.beta2 ** t)
    params = state.params - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)
    return AdamState(params, m, v, t)
