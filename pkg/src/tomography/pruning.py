"""Lottery subspaces from training trajectories, and magnitude-pruned lottery tickets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .landscapes import SubspaceBasis
from .neural.adam import AdamConfig
from .neural.data import Dataset
from .neural.mlp import MlpArchitecture, MlpObjective
from .neural.training import MaskedChart, TrainRecord, _record, run_adam
from .numerics import RngLike, check_finite, top_k_svd


def trajectory_matrix(snapshots, mode: str = "deltas") -> np.ndarray:
    """Stack a parameter trajectory into a ``D x T`` matrix.

    ``deltas`` (default) uses the steps ``w_{i+1} - w_i``; ``snapshots`` uses
    the raw parameter vectors. No mean-centering in either mode.
    """
    snaps = [np.asarray(s, dtype=np.float64) for s in snapshots]
    if mode == "deltas":
        if len(snaps) < 2:
            raise ValueError("need at least two snapshots to form step deltas")
        return check_finite(np.column_stack([b - a for a, b in zip(snaps[:-1], snaps[1:])]),
                            "trajectory")
    if mode == "snapshots":
        return check_finite(np.column_stack(snaps), "trajectory")
    raise ValueError(f"unknown trajectory mode {mode!r}")


@dataclass(frozen=True)
class LotterySubspace:
    U: np.ndarray
    singular_values: np.ndarray
    offset: np.ndarray

    @property
    def d(self) -> int:
        return self.U.shape[1]

    def basis(self, d: int | None = None) -> SubspaceBasis:
        """Chart on the leading ``d`` directions (all of them by default)."""
        d = self.d if d is None else d
        if not 0 <= d <= self.d:
            raise ValueError(f"d={d} outside 0..{self.d}")
        return SubspaceBasis(self.U[:, :d], self.offset)


def build_lottery_subspace(traj: np.ndarray, d: int, offset: np.ndarray) -> LotterySubspace:
    """Top-``d`` left singular directions of the trajectory, descending."""
    traj = check_finite(traj, "trajectory")
    T = traj.shape[1]
    if d > T:
        raise ValueError(f"d={d} exceeds the {T} trajectory columns")
    U, s = top_k_svd(traj, d)
    return LotterySubspace(U, s, np.asarray(offset, dtype=np.float64))


def spectra_report(ls: LotterySubspace) -> list[tuple[int, float]]:
    """``(dimension index, singular value)`` rows, index starting at 1."""
    return [(i + 1, float(s)) for i, s in enumerate(ls.singular_values)]


def running_max(values) -> np.ndarray:
    return np.maximum.accumulate(np.asarray(values, dtype=np.float64))


@dataclass(frozen=True)
class SparsityMask:
    mask: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.mask)
        if m.ndim != 1 or not np.all((m == 0) | (m == 1)):
            raise ValueError("mask must be a 0/1 vector")
        object.__setattr__(self, "mask", m.astype(np.float64))

    @property
    def kept(self) -> int:
        return int(self.mask.sum())

    def apply(self, params: np.ndarray) -> np.ndarray:
        return params * self.mask


def lottery_ticket_mask(trained: np.ndarray, keep_fraction: float) -> SparsityMask:
    """Keep the ``ceil(fraction * D)`` largest-magnitude entries, globally.

    Ties go to the lower flat index.
    """
    if not 0 < keep_fraction <= 1:
        raise ValueError("keep_fraction must lie in (0, 1]")
    w = check_finite(trained, "trained parameters")
    D = w.size
    keep = min(D, math.ceil(keep_fraction * D - 1e-9))
    order = np.lexsort((np.arange(D), -np.abs(w)))
    mask = np.zeros(D)
    mask[order[:keep]] = 1.0
    return SparsityMask(mask)


def collapsed_layers(arch: MlpArchitecture, mask: SparsityMask) -> list[int]:
    """Indices of layers whose weights and biases were all pruned."""
    out = []
    for i, (ws, bs) in enumerate(arch.layer_slices()):
        if mask.mask[ws].sum() + mask.mask[bs].sum() == 0:
            out.append(i)
    return out


def train_masked(arch: MlpArchitecture, params0: np.ndarray, mask: SparsityMask, data: Dataset,
                 config: AdamConfig, rng: RngLike, eval_every: int = 1) -> TrainRecord:
    """Train with pruned coordinates pinned at zero for the entire run."""
    if mask.mask.size != arch.num_params:
        raise ValueError("mask length does not match parameter count")
    run = run_adam(MlpObjective(arch, data), mask.apply(np.asarray(params0, dtype=np.float64)),
                   MaskedChart(mask.mask), config, rng, eval_every=eval_every)
    return _record(run, "ticket", mask.kept, 0, rng)


def compression_ratio(D: int, d: int) -> float:
    if d < 1:
        raise ValueError("d must be at least 1")
    return D / d
