"""Sweep orchestration: cells as pure jobs, parallel execution, flat-file outputs.

Every job derives its randomness from ``RngStream(seed).child(experiment)``
plus its own cell key, and results are sorted by cell key before anything is
written, so outputs do not depend on worker count or completion order.
BLAS is pinned to one thread inside every job for the same reason.
"""

from __future__ import annotations

import csv
import io
import json
import math
import multiprocessing as mp
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from .config import ConfigError, ExperimentConfig, NetworkParams, SpectrumParams
from .geometry import (EllipsoidSpec, ellipsoid_width_mc, ellipsoid_width_sq_bounds,
                       local_angular_dimension_bound, threshold_upper_bound)
from .grid import RunRow, SuccessGrid, ThresholdCurve, compare_methods, extract_threshold
from .landscapes import (AffineTarget, QuadraticWell, Spectrum, SubspaceBasis,
                         affine_target_distance, make_bimodal_spectrum, make_bulk_spectrum,
                         quadratic_run, sample_offset_at_distance)
from .neural.adam import AdamConfig
from .neural.data import Dataset, load_idx, make_blobs
from .neural.linearized import linearize
from .neural.mlp import MlpArchitecture, MlpObjective, evaluate, init_params
from .neural.training import (IdentityChart, burn_in_offset, optimize_in_subspace,
                              run_adam, train_full, train_in_subspace)
from .numerics import RngStream
from .pruning import (build_lottery_subspace, collapsed_layers, compression_ratio,
                      lottery_ticket_mask, running_max, spectra_report, train_masked,
                      trajectory_matrix)
from .svg import render_phase_svg

WORKERS_ENV = "TOMOGRAPHY_WORKERS"
RUNS_HEADER = ("experiment", "kind", "t", "d", "run", "seed", "best_loss", "best_acc")
GRID_HEADER = ("t", "d", "threshold", "metric_kind", "successes", "runs", "p_success")
THRESH_HEADER = ("t", "threshold", "metric_kind", "delta", "d_star")


class OutputError(OSError):
    """The output directory cannot be created or written."""


# ---------------------------------------------------------------- execution

def _pin_threads() -> None:
    threadpool_limits(1)


def execute(jobs: list[tuple], workers: int = 1) -> list:
    """Run ``(fn, *args)`` jobs; results come back in job order."""
    if workers <= 1 or len(jobs) <= 1:
        with threadpool_limits(1):
            return [fn(*args) for fn, *args in jobs]
    ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else None
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx,
                             initializer=_pin_threads) as pool:
        futures = [pool.submit(fn, *args) for fn, *args in jobs]
        return [f.result() for f in futures]


def resolve_workers(config: ExperimentConfig, override: int | None = None) -> int:
    if override is not None:
        return max(1, int(override))
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV}: expected an integer, got {env!r}") from None
    return config.workers


# ---------------------------------------------------------------- formatting

def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "" if math.isnan(x) else repr(x)
    return str(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def runs_rows(rows: list[RunRow]):
    for r in rows:
        yield (r.experiment, r.kind, r.t, r.d, r.run, r.seed, r.best_loss, r.best_acc)


def threshold_rows(curves: list[ThresholdCurve]):
    for c in curves:
        for x, ds in zip(c.thresholds, c.d_star):
            yield (c.t, x, c.metric, c.delta, ds)


@dataclass
class SweepResult:
    out_dir: Path
    rows: list[RunRow] = field(default_factory=list)
    grids: dict[str, SuccessGrid] = field(default_factory=dict)
    curves: dict[str, ThresholdCurve] = field(default_factory=dict)
    files: dict[str, Path] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


class _Writer:
    def __init__(self, out_dir: Path, result: SweepResult):
        self.out_dir = out_dir
        self.result = result
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as err:
            raise OutputError(f"cannot create output directory {out_dir}: {err}") from None

    def text(self, name: str, content: str) -> None:
        path = self.out_dir / name
        try:
            path.write_text(content, encoding="utf-8")
        except OSError as err:
            raise OutputError(f"cannot write {path}: {err}") from None
        self.result.files[name] = path

    def csv(self, name: str, header, rows) -> None:
        self.text(name, csv_text(header, rows))

    def json(self, name: str, obj) -> None:
        self.text(name, json.dumps(obj, indent=2, sort_keys=True, default=fmt) + "\n")


def _metadata(config: ExperimentConfig, **extra) -> dict:
    cfg = config.model_dump(mode="json")
    cfg.pop("workers", None)
    cfg.pop("out", None)
    return {"package_version": __version__, "experiment": config.experiment,
            "kind": config.kind, "config": cfg, **extra}


def _write_grid_outputs(wr: _Writer, grids: list[SuccessGrid], delta: float,
                        prefix: str = "", svg: bool = False, label: str = "") -> list[ThresholdCurve]:
    grid_rows, curves = [], []
    for g in grids:
        grid_rows.extend(g.rows())
        for t in g.ts:
            c = extract_threshold(g, delta, t, label=f"{label}t={t}")
            curves.append(c)
            wr.result.curves[f"{prefix}{g.metric}:t={t}"] = c
            if svg:
                wr.text(f"{prefix}phase_{g.metric}_t{t}.svg",
                        render_phase_svg(g, c, title=f"{wr.result.summary.get('experiment', '')}"))
        wr.result.grids[f"{prefix}{g.metric}"] = g
    if svg and curves:
        # headline map: first metric at the first burn-in level
        wr.text(f"{prefix}phase.svg", render_phase_svg(grids[0], curves[0],
                                                       title=wr.result.summary.get("experiment", "")))
    wr.csv(f"{prefix}grid.csv", GRID_HEADER, grid_rows)
    wr.csv(f"{prefix}thresholds.csv", THRESH_HEADER, threshold_rows(curves))
    return curves


# ---------------------------------------------------------------- quadratic

def build_spectrum(p: SpectrumParams, stream: RngStream) -> Spectrum:
    if p.kind == "bimodal":
        return make_bimodal_spectrum(p.D, p.num_small, p.lambda_small, p.lambda_large)
    return make_bulk_spectrum(p.D, p.lambda_min, p.lambda_max, stream.child("spectrum"))


def _quadratic_job(eigs: np.ndarray, R: float, d: int, runs: int, stream: RngStream,
                   experiment: str) -> list[RunRow]:
    well = QuadraticWell(Spectrum(eigs))
    return [quadratic_run(well, R, d, i, stream, experiment) for i in range(runs)]


def run_quadratic(config: ExperimentConfig, wr: _Writer, workers: int) -> None:
    q = config.quadratic
    root = RngStream(config.seed).child(config.experiment)
    spec = build_spectrum(q.spectrum, root)
    dims = q.dim_grid()
    if any(d < 0 or d > spec.eigenvalues.size for d in dims):
        raise ConfigError(f"quadratic.dims: entries must lie in 0..{spec.eigenvalues.size}")
    jobs = [(_quadratic_job, np.array(spec.eigenvalues), q.R, d, config.runs, root,
             config.experiment) for d in dims]
    rows = sorted((r for batch in execute(jobs, workers) for r in batch),
                  key=lambda r: (r.t, r.d, r.run))
    wr.result.rows = rows
    wr.csv("runs.csv", RUNS_HEADER, runs_rows(rows))
    grid = SuccessGrid.from_rows(rows, q.epsilons, "loss")
    (curve,) = _write_grid_outputs(wr, [grid], config.delta, svg=config.svg)
    bound = [(eps, local_angular_dimension_bound(spec, eps, q.R),
              threshold_upper_bound(spec, eps, q.R)) for eps in q.epsilons]
    wr.csv("bound.csv", ("threshold", "d_local_lower_bound", "d_star_upper_bound"), bound)
    wr.json("metadata.json", _metadata(
        config, eigenvalues=spec.eigenvalues.tolist(), dims=dims,
        notes={"solver": "exact pseudo-inverse minimization in each subspace",
               "offset": "resampled per run at distance R; streams keyed by (d, run)"}))


# ---------------------------------------------------------------- networks

@dataclass(frozen=True)
class NetSetup:
    experiment: str
    root: RngStream
    arch: MlpArchitecture
    data: Dataset
    optimizer: AdamConfig
    full_optimizer: AdamConfig
    eval_every: int


def build_network(config: ExperimentConfig) -> NetSetup:
    n: NetworkParams = config.network
    root = RngStream(config.seed).child(config.experiment)
    dp = n.data
    if dp.source == "blobs":
        data = make_blobs(dp.num_classes, dp.samples_per_class, dp.input_dim, dp.separation,
                          root.child("data"))
    else:
        try:
            data = load_idx(dp.images, dp.labels, dp.limit, dp.num_classes)
        except FileNotFoundError as err:
            raise ConfigError(f"network.data: {err}") from None
    arch = MlpArchitecture.build(data.inputs.shape[1], tuple(n.hidden), data.num_classes)
    return NetSetup(config.experiment, root, arch, data, n.optimizer.to_adam(),
                    n.full_optimizer.to_adam(), n.eval_every)


def _initial(s: NetSetup, run: int) -> np.ndarray:
    return init_params(s.arch, s.root.child("init", run))


def _random_affine(s: NetSetup, offset: np.ndarray, t: int, d: int, run: int, kind: str,
                   objective=None) -> RunRow:
    basis = SubspaceBasis.random(s.arch.num_params, d, offset, s.root.child("basis", d, run))
    stream = s.root.child("train", kind, t, d, run)
    if objective is None:
        rec = train_in_subspace(s.arch, basis, s.data, s.optimizer, stream, kind, t, s.eval_every)
    else:
        rec, _ = optimize_in_subspace(objective, basis, s.optimizer, stream, kind=kind, t=t,
                                      eval_every=s.eval_every)
    return RunRow(s.experiment, kind, t, d, run, stream.stream_id, rec.best_loss, rec.best_acc)


def _nn_job(s: NetSetup, t: int, d: int, run: int) -> RunRow:
    w0 = _initial(s, run)
    wt = burn_in_offset(s.arch, w0, s.data, t, s.optimizer, s.root.child("burn-in", run))
    return _random_affine(s, wt, t, d, run, "random" if t == 0 else "burn-in")


def _linearized_job(s: NetSetup, dims: list[int], run: int, n_examples: int,
                    max_bytes: int) -> list[RunRow]:
    w0 = _initial(s, run)
    w_opt = _train_to_end(s, w0, s.full_optimizer, s.root.child("optimum", run))
    sub = s.data.head(min(n_examples, s.data.size))
    lin = linearize(s.arch, w_opt, sub, max_bytes)
    sub_setup = NetSetup(s.experiment, s.root, s.arch, sub, s.optimizer, s.full_optimizer,
                         s.eval_every)
    rows = []
    for d in dims:
        rows.append(_random_affine(sub_setup, w0, 0, d, run, "linearized", objective=lin))
        rows.append(_random_affine(sub_setup, w0, 0, d, run, "full-subset"))
    return rows


def _train_to_end(s: NetSetup, w0: np.ndarray, cfg: AdamConfig, stream: RngStream) -> np.ndarray:
    """Full-space parameters after ``cfg.epochs`` epochs, without evaluations."""
    return run_adam(MlpObjective(s.arch, s.data), w0, IdentityChart(), cfg, stream,
                    evaluate=False).w


def run_nn_sweep(config: ExperimentConfig, wr: _Writer, workers: int) -> None:
    s = build_network(config)
    n = config.network
    ts = sorted(set(n.burn_in))
    jobs = [(_nn_job, s, t, d, run) for t in ts for d in n.dims for run in range(config.runs)]
    lin_jobs = []
    if n.linearized:
        lin_jobs = [(_linearized_job, s, list(n.dims), run, n.linearize_examples,
                     n.linearize_max_bytes) for run in range(config.runs)]
    results = execute(jobs + lin_jobs, workers)
    rows = list(results[:len(jobs)])
    lin_rows = [r for batch in results[len(jobs):] for r in batch]
    rows.sort(key=lambda r: (r.t, r.d, r.run))
    lin_rows.sort(key=lambda r: (r.kind, r.d, r.run))
    wr.result.rows = rows + lin_rows
    wr.csv("runs.csv", RUNS_HEADER, runs_rows(rows + lin_rows))
    grids = [SuccessGrid.from_rows(rows, n.accuracy_thresholds, "accuracy"),
             SuccessGrid.from_rows(rows, n.loss_thresholds, "loss")]
    curves = _write_grid_outputs(wr, grids, config.delta, svg=config.svg)
    comparison = {}
    for metric in ("accuracy", "loss"):
        rep = compare_methods({("random" if c.t == 0 else f"burn-in t={c.t}"): c
                               for c in curves if c.metric == metric})
        comparison[metric] = {"thresholds": list(rep.thresholds), "d_star": rep.d_star,
                              "rankings": rep.rankings,
                              "burn_in_violations": [list(v) for v in rep.violations]}
    wr.json("comparison.json", comparison)
    if lin_rows:
        for kind in ("linearized", "full-subset"):
            krows = [r for r in lin_rows if r.kind == kind]
            _write_grid_outputs(wr, [SuccessGrid.from_rows(krows, n.accuracy_thresholds,
                                                           "accuracy"),
                                     SuccessGrid.from_rows(krows, n.loss_thresholds, "loss")],
                                config.delta, prefix=f"{kind}_")
    init_eval = {}
    for t in ts:
        accs = [evaluate(s.arch, burn_in_offset(s.arch, _initial(s, r), s.data, t, s.optimizer,
                                                s.root.child("burn-in", r)), s.data)[1]
                for r in range(config.runs)]
        init_eval[str(t)] = {"mean_accuracy_at_d0": float(np.mean(accs))}
    wr.json("metadata.json", _metadata(
        config, num_params=s.arch.num_params, widths=list(s.arch.widths),
        offset_accuracy=init_eval,
        notes={"burn_in_budget": "burn-in steps are separate from the subspace epoch budget",
               "burn_in_optimizer": "burn-in uses the subspace optimizer settings",
               "linearized_offset": "linearized sweeps start from w0, the original init",
               "basis_streams": "keyed by (d, run): burn-in levels share random bases"}))


def _lottery_job(s: NetSetup, dims: list[int], run: int, mode: str, snapshot_every: int,
                 rewind: int, compare_random: bool):
    w0 = _initial(s, run)
    _, snaps = train_full(s.arch, w0, s.data, s.full_optimizer, s.root.child("full", run),
                          snapshot_every=snapshot_every, eval_every=10 ** 9)
    traj = trajectory_matrix(snaps, mode)
    usable = [d for d in dims if d <= traj.shape[1]]
    offset = snaps[rewind // snapshot_every]
    ls = build_lottery_subspace(traj, max(usable, default=0), offset)
    rows = []
    for d in usable:
        stream = s.root.child("train", "lottery", rewind, d, run)
        rec = train_in_subspace(s.arch, ls.basis(d), s.data, s.optimizer, stream, "lottery",
                                rewind, s.eval_every)
        rows.append(RunRow(s.experiment, "lottery", rewind, d, run, stream.stream_id,
                           rec.best_loss, rec.best_acc))
        if compare_random:
            rows.append(_random_affine(s, w0, 0, d, run, "random"))
    spectrum = [(run, i, sv) for i, sv in spectra_report(ls)]
    return rows, spectrum


def run_lottery(config: ExperimentConfig, wr: _Writer, workers: int) -> None:
    s = build_network(config)
    n = config.network
    if n.rewind_step % n.snapshot_every:
        raise ConfigError("network.rewind_step: must be a multiple of network.snapshot_every")
    jobs = [(_lottery_job, s, sorted(set(n.dims)), run, n.trajectory_mode, n.snapshot_every,
             n.rewind_step, n.compare_random) for run in range(config.runs)]
    results = execute(jobs, workers)
    rows = sorted((r for rr, _ in results for r in rr), key=lambda r: (r.kind, r.t, r.d, r.run))
    spectra = [x for _, sp in results for x in sp]
    wr.result.rows = rows
    wr.csv("runs.csv", RUNS_HEADER, runs_rows(rows))
    wr.csv("spectra.csv", ("run", "index", "singular_value"), spectra)
    curve_rows = []
    D = s.arch.num_params
    for kind in sorted({r.kind for r in rows}):
        for run in range(config.runs):
            kr = sorted((r for r in rows if r.kind == kind and r.run == run), key=lambda r: r.d)
            rm = running_max([r.best_acc for r in kr])
            for r, m in zip(kr, rm):
                curve_rows.append((kind, run, r.d, compression_ratio(D, r.d) if r.d else None,
                                   r.best_acc, m))
    wr.csv("curves.csv", ("kind", "run", "d", "compression_ratio", "best_acc",
                          "running_max_acc"), curve_rows)
    lot = [r for r in rows if r.kind == "lottery"]
    _write_grid_outputs(wr, [SuccessGrid.from_rows(lot, n.accuracy_thresholds, "accuracy"),
                             SuccessGrid.from_rows(lot, n.loss_thresholds, "loss")],
                        config.delta, svg=config.svg)
    rnd = [r for r in rows if r.kind == "random"]
    if rnd:
        _write_grid_outputs(wr, [SuccessGrid.from_rows(rnd, n.accuracy_thresholds, "accuracy"),
                                 SuccessGrid.from_rows(rnd, n.loss_thresholds, "loss")],
                            config.delta, prefix="random_")
    wr.json("metadata.json", _metadata(
        config, num_params=D, widths=list(s.arch.widths),
        notes={"trajectory": f"{n.trajectory_mode}, not mean-centered",
               "rewind_step": n.rewind_step,
               "dims_above_trajectory_length": "skipped"}))


def _ticket_job(s: NetSetup, fractions: list[float], run: int, pretrain_epochs: int):
    w0 = _initial(s, run)
    pre_cfg = replace(s.full_optimizer, epochs=pretrain_epochs)
    trained = _train_to_end(s, w0, pre_cfg, s.root.child("pretrain", run))
    rows, info = [], []
    for frac in fractions:
        mask = lottery_ticket_mask(trained, frac)
        stream = s.root.child("train", "ticket", frac, run)
        rec = train_masked(s.arch, w0, mask, s.data, s.full_optimizer, stream, s.eval_every)
        rows.append(RunRow(s.experiment, "ticket", 0, mask.kept, run, stream.stream_id,
                           rec.best_loss, rec.best_acc))
        info.append((run, frac, mask.kept, compression_ratio(s.arch.num_params, mask.kept)
                     if mask.kept else None, rec.best_loss, rec.best_acc,
                     " ".join(str(i) for i in collapsed_layers(s.arch, mask))))
    return rows, info


def run_ticket(config: ExperimentConfig, wr: _Writer, workers: int) -> None:
    s = build_network(config)
    n = config.network
    jobs = [(_ticket_job, s, list(n.keep_fractions), run, n.pretrain_epochs)
            for run in range(config.runs)]
    results = execute(jobs, workers)
    rows = sorted((r for rr, _ in results for r in rr), key=lambda r: (r.t, r.d, r.run))
    info = sorted((x for _, ii in results for x in ii), key=lambda x: (x[0], -x[1]))
    wr.result.rows = rows
    wr.csv("runs.csv", RUNS_HEADER, runs_rows(rows))
    wr.csv("tickets.csv", ("run", "keep_fraction", "kept", "compression_ratio", "best_loss",
                           "best_acc", "collapsed_layers"), info)
    _write_grid_outputs(wr, [SuccessGrid.from_rows(rows, n.accuracy_thresholds, "accuracy"),
                             SuccessGrid.from_rows(rows, n.loss_thresholds, "loss")],
                        config.delta, svg=config.svg)
    wr.json("metadata.json", _metadata(
        config, num_params=s.arch.num_params, widths=list(s.arch.widths),
        notes={"pruning": "one-shot global magnitude pruning of weights and biases",
               "rewind": "kept weights rewound to init, pruned weights held at zero"}))


# ---------------------------------------------------------------- geometry

def run_width(config: ExperimentConfig, wr: _Writer, workers: int) -> None:
    p = config.width
    root = RngStream(config.seed).child(config.experiment)
    spec = build_spectrum(p.spectrum, root)
    rows = []
    for k, eps in enumerate(p.epsilons):
        e = EllipsoidSpec.quadratic_sublevel(spec.eigenvalues, eps)
        lo, hi = ellipsoid_width_sq_bounds(e)
        est = ellipsoid_width_mc(e, root.child("width", k), p.num_gaussians)
        rows.append((eps, hi, lo, hi, est.mean, est.std_error, est.squared,
                     local_angular_dimension_bound(spec, eps, p.R),
                     threshold_upper_bound(spec, eps, p.R)))
    wr.csv("widths.csv", ("epsilon", "sum_r2", "width_sq_lower", "width_sq_upper", "mc_width",
                          "mc_std_error", "mc_width_sq", "d_local_lower_bound",
                          "d_star_upper_bound"), rows)
    wr.json("metadata.json", _metadata(config, eigenvalues=spec.eigenvalues.tolist()))


def _affine_job(D: int, n: int, d: int, trials: int, stream: RngStream):
    out = np.empty(trials)
    for i in range(trials):
        cell = stream.child("affine", n, d, i)
        target = AffineTarget.random(D, n, sample_offset_at_distance(D, 1.0, cell.child("off")),
                                     cell.child("target"))
        basis = SubspaceBasis.random(D, d, np.zeros(D), cell.child("basis"))
        out[i] = affine_target_distance(target, basis)
    return n, d, out


def affine_scaling_fit(means: np.ndarray, scaling: np.ndarray) -> dict:
    """Least squares ``mean ≈ c * scaling`` through the origin."""
    c = float(scaling @ means / (scaling @ scaling))
    resid = means - c * scaling
    ss_tot = float(np.sum((means - means.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else math.nan
    ratios = means / scaling
    return {"constant": c, "r_squared": r2,
            "max_relative_deviation": float(np.max(np.abs(ratios / c - 1.0)))}


def run_affine(config: ExperimentConfig, wr: _Writer, workers: int) -> None:
    p = config.affine
    root = RngStream(config.seed).child(config.experiment)
    jobs = [(_affine_job, p.D, n, d, p.trials, root) for n, d in p.pairs]
    rows, means, scal = [], [], []
    for n, d, dist in execute(jobs, workers):
        k = p.D - n - d
        s = math.sqrt(k / p.D) if k > 0 else 0.0
        mean = float(dist.mean())
        rows.append((n, d, p.trials, mean, float(dist.std(ddof=1) / math.sqrt(dist.size)),
                     float(dist.max()), s, mean / s if s > 0 else None))
        if k > 0:
            means.append(mean)
            scal.append(s)
    wr.csv("distances.csv", ("n", "d", "trials", "mean_distance", "std_error", "max_distance",
                             "scaling", "ratio"), rows)
    fit = affine_scaling_fit(np.array(means), np.array(scal)) if len(means) >= 2 else {}
    wr.result.summary["fit"] = fit
    wr.json("metadata.json", _metadata(config, fit=fit,
                                       notes={"target_offset": "uniform direction at distance 1",
                                              "scaling": "sqrt(D - n - d) / sqrt(D)"}))


# ---------------------------------------------------------------- entry point

RUNNERS = {
    "quadratic-sweep": run_quadratic,
    "nn-sweep": run_nn_sweep,
    "lottery": run_lottery,
    "ticket": run_ticket,
    "width-estimate": run_width,
    "affine-distance": run_affine,
}


def run_sweep(config: ExperimentConfig, out_dir=None, workers: int | None = None) -> SweepResult:
    """Run one experiment and write its artifacts under ``out_dir``."""
    target = Path(out_dir or config.out or Path("runs") / config.experiment)
    result = SweepResult(target)
    result.summary["experiment"] = config.experiment
    wr = _Writer(target, result)
    RUNNERS[config.kind](config, wr, resolve_workers(config, workers))
    return result
