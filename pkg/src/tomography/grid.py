"""Success grids, threshold curves and method comparison.

A sweep produces one :class:`RunRow` per (t, d, run). Success for a
threshold is recomputed from the row alone: ``best_loss <= eps`` for loss
thresholds, ``best_acc >= a`` for accuracy thresholds. That makes the
ε-nesting of success flags hold by construction.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

METRICS = ("loss", "accuracy")
_P_TOL = 1e-12


@dataclass(frozen=True)
class RunRow:
    experiment: str
    kind: str
    t: int
    d: int
    run: int
    seed: int
    best_loss: float
    best_acc: float = math.nan

    def succeeds(self, threshold: float, metric: str) -> bool:
        if metric == "loss":
            return self.best_loss <= threshold
        if metric == "accuracy":
            return self.best_acc >= threshold
        raise ValueError(f"unknown metric {metric!r}")


@dataclass
class SuccessGrid:
    """Success counts over a (t, d, threshold) lattice.

    ``successes`` and ``runs`` have shape ``(len(ts), len(dims), len(thresholds))``.
    """

    metric: str
    ts: tuple[int, ...]
    dims: tuple[int, ...]
    thresholds: tuple[float, ...]
    successes: np.ndarray
    runs: np.ndarray
    records: list[RunRow] = field(default_factory=list)

    @classmethod
    def from_rows(cls, rows: Sequence[RunRow], thresholds: Sequence[float],
                  metric: str) -> "SuccessGrid":
        if metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
        if not rows:
            raise ValueError("cannot build a grid from zero runs")
        if len(thresholds) == 0:
            raise ValueError("threshold grid is empty")
        rows = sorted(rows, key=lambda r: (r.t, r.d, r.run))
        ts = tuple(sorted({r.t for r in rows}))
        dims = tuple(sorted({r.d for r in rows}))
        thr = tuple(float(x) for x in thresholds)
        ti = {t: i for i, t in enumerate(ts)}
        di = {d: i for i, d in enumerate(dims)}
        succ = np.zeros((len(ts), len(dims), len(thr)), dtype=np.int64)
        runs = np.zeros_like(succ)
        for r in rows:
            flags = np.array([r.succeeds(x, metric) for x in thr], dtype=np.int64)
            succ[ti[r.t], di[r.d]] += flags
            runs[ti[r.t], di[r.d]] += 1
        return cls(metric, ts, dims, thr, succ, runs, list(rows))

    @property
    def p_success(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.runs > 0, self.successes / np.maximum(self.runs, 1), np.nan)

    def cell_records(self, t: int, d: int) -> list[RunRow]:
        return [r for r in self.records if r.t == t and r.d == d]

    def rows(self):
        """Flat (t, d, threshold, metric, successes, runs, p) tuples in grid order."""
        p = self.p_success
        for i, t in enumerate(self.ts):
            for j, d in enumerate(self.dims):
                for k, x in enumerate(self.thresholds):
                    yield (t, d, x, self.metric, int(self.successes[i, j, k]),
                           int(self.runs[i, j, k]), float(p[i, j, k]))


@dataclass(frozen=True)
class ThresholdCurve:
    thresholds: tuple[float, ...]
    d_star: tuple[int | None, ...]
    delta: float
    t: int
    metric: str
    label: str = ""

    def as_array(self) -> np.ndarray:
        """d* values with unreached thresholds mapped to +inf."""
        return np.array([math.inf if v is None else v for v in self.d_star], dtype=float)


def first_crossing(dims: Sequence[int], p: Sequence[float], delta: float) -> int | None:
    """Smallest ``d`` whose success probability reaches ``1 - delta``."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    for d, prob in sorted(zip(dims, p)):
        if not math.isnan(prob) and prob >= 1.0 - delta - _P_TOL:
            return int(d)
    return None


def extract_threshold(grid: SuccessGrid, delta: float, t: int = 0,
                      label: str = "") -> ThresholdCurve:
    if t not in grid.ts:
        raise ValueError(f"t={t} not present in grid (have {grid.ts})")
    p = grid.p_success[grid.ts.index(t)]
    d_star = tuple(first_crossing(grid.dims, p[:, k], delta)
                   for k in range(len(grid.thresholds)))
    return ThresholdCurve(grid.thresholds, d_star, float(delta), int(t), grid.metric, label)


@dataclass
class ComparisonReport:
    thresholds: tuple[float, ...]
    labels: tuple[str, ...]
    d_star: dict[str, tuple[int | None, ...]]
    rankings: list[list[list[str]]]
    violations: list[tuple[float, str, str]]

    def all_tied(self) -> bool:
        return all(len(r) <= 1 for r in self.rankings)


def compare_methods(curves: Mapping[str, ThresholdCurve]) -> ComparisonReport:
    """Rank methods by d* at each threshold.

    Each ranking is a list of tie groups, best (smallest d*) first; unreached
    ranks last. Burn-in ordering violations, i.e. a curve with larger ``t``
    needing strictly more dimensions than one with smaller ``t``, are listed as
    ``(threshold, longer_burn_in_label, shorter_burn_in_label)``.
    """
    if not curves:
        raise ValueError("no curves to compare")
    labels = tuple(curves)
    first = curves[labels[0]]
    for lab in labels[1:]:
        c = curves[lab]
        if c.metric != first.metric or len(c.thresholds) != len(first.thresholds) or \
                not np.allclose(c.thresholds, first.thresholds, rtol=0, atol=1e-12):
            raise ValueError(f"curve {lab!r} does not share the threshold axis of {labels[0]!r}")
    arrays = {lab: curves[lab].as_array() for lab in labels}
    rankings = []
    for k in range(len(first.thresholds)):
        groups: dict[float, list[str]] = {}
        for lab in labels:
            groups.setdefault(arrays[lab][k], []).append(lab)
        rankings.append([groups[v] for v in sorted(groups)])
    by_t = sorted(labels, key=lambda lab: curves[lab].t)
    violations = []
    for k, x in enumerate(first.thresholds):
        for i, lo in enumerate(by_t):
            for hi in by_t[i + 1:]:
                if curves[hi].t > curves[lo].t and arrays[hi][k] > arrays[lo][k]:
                    violations.append((x, hi, lo))
    return ComparisonReport(first.thresholds, labels,
                            {lab: curves[lab].d_star for lab in labels}, rankings, violations)


def fraction_at_or_below(a: ThresholdCurve, b: ThresholdCurve) -> float:
    """Share of rows where ``a`` needs no more dimensions than ``b``.

    Rows where both curves are unreached carry no information and are skipped.
    Returns nan when no row is defined.
    """
    xa, xb = a.as_array(), b.as_array()
    defined = ~(np.isinf(xa) & np.isinf(xb))
    if not defined.any():
        return math.nan
    return float(np.mean(xa[defined] <= xb[defined]))
