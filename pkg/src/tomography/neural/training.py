"""Minibatch Adam in the full space, in affine subspaces and under masks.

Every trainer is the same loop over a *chart* mapping trainable coordinates
``x`` to network parameters ``w``: identity for full-space training,
``w = A x + w_t`` for subspaces, and the identity with masked gradients for
pruned networks. Step 0 is always recorded so the record at ``d = 0`` is just
the evaluation at the offset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..landscapes import SubspaceBasis
from ..numerics import RngLike, RngStream, as_generator
from .adam import AdamConfig, AdamState, adam_step
from .data import Dataset
from .mlp import MlpArchitecture, MlpObjective


@dataclass
class TrainRecord:
    kind: str
    d: int
    t: int
    seed: int | None
    steps: np.ndarray
    losses: np.ndarray
    accuracies: np.ndarray
    best_loss: float = field(init=False)
    best_acc: float = field(init=False)

    def __post_init__(self) -> None:
        self.steps = np.asarray(self.steps, dtype=np.int64)
        self.losses = np.asarray(self.losses, dtype=np.float64)
        self.accuracies = np.asarray(self.accuracies, dtype=np.float64)
        self.best_loss = float(np.min(self.losses))
        self.best_acc = float(np.nan if np.all(np.isnan(self.accuracies))
                              else np.nanmax(self.accuracies))

    def running_best_loss(self) -> np.ndarray:
        return np.minimum.accumulate(self.losses)


class IdentityChart:
    def __call__(self, x):
        return x

    def pullback(self, g):
        return g


class AffineChart:
    def __init__(self, basis: SubspaceBasis):
        self.A = basis.A
        self.offset = basis.offset

    def __call__(self, theta):
        return self.A @ theta + self.offset

    def pullback(self, g):
        return self.A.T @ g


class MaskedChart:
    """Identity chart whose gradient is zeroed outside ``mask``."""

    def __init__(self, mask: np.ndarray):
        self.mask = np.asarray(mask, dtype=np.float64)

    def __call__(self, x):
        return x

    def pullback(self, g):
        return g * self.mask


def steps_per_epoch(num_examples: int | None, batch_size: int) -> int:
    return 1 if num_examples is None else math.ceil(num_examples / batch_size)


def _batches(num_examples: int | None, batch_size: int, gen: np.random.Generator, num_steps: int):
    if num_examples is None or batch_size >= num_examples:
        for _ in range(num_steps):
            yield None
        return
    done = 0
    while done < num_steps:
        perm = gen.permutation(num_examples)
        for start in range(0, num_examples, batch_size):
            if done == num_steps:
                return
            yield perm[start:start + batch_size]
            done += 1


@dataclass
class AdamRun:
    x: np.ndarray
    w: np.ndarray
    steps: list[int]
    losses: list[float]
    accuracies: list[float]
    snapshots: list[np.ndarray]


def run_adam(objective, x0: np.ndarray, chart, config: AdamConfig, rng: RngLike, *,
             num_steps: int | None = None, eval_every: int = 1, snapshot_every: int = 0,
             evaluate: bool = True) -> AdamRun:
    """Minimize ``objective`` over the chart coordinates with minibatch Adam.

    ``objective`` needs ``loss_and_grad(w, idx)``, ``evaluate(w)`` and
    ``num_examples`` (None for full-batch objectives). Evaluations use the
    whole training set at step 0, every ``eval_every`` steps and at the end.
    ``snapshot_every > 0`` keeps copies of ``w`` at step 0 and on that cadence.
    """
    gen = as_generator(rng)
    n = objective.num_examples
    if num_steps is None:
        num_steps = config.epochs * steps_per_epoch(n, config.batch_size)
    state = AdamState.init(x0)
    w = chart(state.params)
    out = AdamRun(state.params, w, [], [], [], [])

    def record(step):
        loss, acc = objective.evaluate(w)
        out.steps.append(step)
        out.losses.append(loss)
        out.accuracies.append(acc)

    if evaluate:
        record(0)
    if snapshot_every:
        out.snapshots.append(w.copy())
    for step, idx in enumerate(_batches(n, config.batch_size, gen, num_steps), start=1):
        _, g = objective.loss_and_grad(w, idx)
        state = adam_step(state, chart.pullback(g), config)
        w = chart(state.params)
        if evaluate and (step % max(eval_every, 1) == 0 or step == num_steps):
            record(step)
        if snapshot_every and (step % snapshot_every == 0 or step == num_steps):
            out.snapshots.append(w.copy())
    out.x, out.w = state.params, w
    return out


def _seed_of(rng: RngLike) -> int | None:
    return rng.stream_id if isinstance(rng, RngStream) else None


def _record(run: AdamRun, kind: str, d: int, t: int, rng: RngLike) -> TrainRecord:
    return TrainRecord(kind, d, t, _seed_of(rng), run.steps, run.losses, run.accuracies)


def train_full(arch: MlpArchitecture, params0: np.ndarray, data: Dataset, config: AdamConfig,
               rng: RngLike, snapshot_every: int = 1,
               eval_every: int = 1) -> tuple[TrainRecord, list[np.ndarray]]:
    """Full-space minibatch Adam; returns the record and the parameter trajectory."""
    run = run_adam(MlpObjective(arch, data), params0, IdentityChart(), config, rng,
                   snapshot_every=snapshot_every, eval_every=eval_every)
    return _record(run, "full", arch.num_params, 0, rng), run.snapshots


def optimize_in_subspace(objective, basis: SubspaceBasis, config: AdamConfig, rng: RngLike, *,
                         kind: str = "random", t: int = 0, num_steps: int | None = None,
                         eval_every: int = 1) -> tuple[TrainRecord, np.ndarray]:
    """Adam on ``θ`` with ``w = A θ + offset``, starting at ``θ = 0``."""
    if basis.D != objective.dim:
        raise ValueError(f"basis lives in R^{basis.D}, objective in R^{objective.dim}")
    if basis.d == 0:
        loss, acc = objective.evaluate(basis.offset)
        return TrainRecord(kind, 0, t, _seed_of(rng), [0], [loss], [acc]), np.zeros(0)
    run = run_adam(objective, np.zeros(basis.d), AffineChart(basis), config, rng,
                   num_steps=num_steps, eval_every=eval_every)
    return _record(run, kind, basis.d, t, rng), run.x


def train_in_subspace(arch: MlpArchitecture, basis: SubspaceBasis, data: Dataset,
                      config: AdamConfig, rng: RngLike, kind: str = "random", t: int = 0,
                      eval_every: int = 1) -> TrainRecord:
    record, _ = optimize_in_subspace(MlpObjective(arch, data), basis, config, rng,
                                     kind=kind, t=t, eval_every=eval_every)
    return record


def burn_in_offset(arch: MlpArchitecture, params0: np.ndarray, data: Dataset, t: int,
                   config: AdamConfig, rng: RngLike) -> np.ndarray:
    """Parameters after ``t`` full-space Adam steps from ``params0``."""
    if t < 0:
        raise ValueError("burn-in steps must be non-negative")
    if t == 0:
        return np.array(params0, dtype=np.float64, copy=True)
    run = run_adam(MlpObjective(arch, data), params0, IdentityChart(), config, rng,
                   num_steps=t, evaluate=False)
    return run.w
