"""Synthetic landscapes with closed-form structure.

Quadratic wells are stored by their Hessian spectrum only. Random Gaussian
bases are rotation invariant, so a diagonal Hessian loses no generality.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .grid import RunRow, SuccessGrid
from .numerics import (RngLike, RngStream, as_generator, check_finite, gaussian_matrix,
                       normalize_columns, solve_symmetric)


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray

    def __post_init__(self) -> None:
        lam = check_finite(np.atleast_1d(self.eigenvalues), "eigenvalues")
        if lam.ndim != 1 or lam.size == 0:
            raise ValueError("spectrum must be a non-empty 1-D array")
        if np.any(lam <= 0):
            raise ValueError("eigenvalues must be strictly positive")
        if np.any(np.diff(lam) < 0):
            lam = np.sort(lam)
        lam.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)

    def __len__(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class QuadraticWell:
    spectrum: Spectrum

    @property
    def D(self) -> int:
        return len(self.spectrum)

    @property
    def hessian_diag(self) -> np.ndarray:
        return self.spectrum.eigenvalues


@dataclass(frozen=True)
class SubspaceBasis:
    """Affine chart ``w(θ) = A θ + offset`` with unit-norm columns in ``A``."""

    A: np.ndarray
    offset: np.ndarray

    def __post_init__(self) -> None:
        A = np.asarray(self.A, dtype=float)
        off = check_finite(self.offset, "offset")
        if A.ndim != 2 or off.ndim != 1 or A.shape[0] != off.size:
            raise ValueError(f"basis shape {A.shape} does not match offset {off.shape}")
        if A.shape[1] and np.max(np.abs(np.linalg.norm(A, axis=0) - 1.0)) > 1e-12:
            raise ValueError("basis columns must have unit norm")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "offset", off)

    @property
    def D(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.A.shape[1]

    def point(self, theta: np.ndarray) -> np.ndarray:
        if self.d == 0:
            return self.offset.copy()
        return self.A @ theta + self.offset

    @classmethod
    def random(cls, D: int, d: int, offset: np.ndarray, rng: RngLike) -> "SubspaceBasis":
        """Gaussian ``D x d`` matrix with columns normalized to 1."""
        if d == 0:
            return cls(np.zeros((D, 0)), offset)
        return cls(normalize_columns(gaussian_matrix(rng, D, d)), offset)


@dataclass(frozen=True)
class AffineTarget:
    basis: np.ndarray
    offset: np.ndarray

    def __post_init__(self) -> None:
        B = check_finite(self.basis, "target basis")
        off = check_finite(self.offset, "target offset")
        if B.ndim != 2 or B.shape[0] != off.size:
            raise ValueError("target basis and offset dimensions disagree")
        if B.shape[1] >= B.shape[0]:
            raise ValueError("target subspace dimension must be below D")
        if not np.allclose(B.T @ B, np.eye(B.shape[1]), atol=1e-10, rtol=0):
            raise ValueError("target basis columns must be orthonormal")
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "offset", off)

    @property
    def D(self) -> int:
        return self.basis.shape[0]

    @property
    def n(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def random(cls, D: int, n: int, offset: np.ndarray, rng: RngLike) -> "AffineTarget":
        if n == 0:
            return cls(np.zeros((D, 0)), offset)
        q, _ = np.linalg.qr(gaussian_matrix(rng, D, n))
        return cls(q, offset)


def make_bimodal_spectrum(D: int, num_small: int, lambda_small: float,
                          lambda_large: float) -> Spectrum:
    if D < 1 or not 0 <= num_small <= D:
        raise ValueError(f"need 0 <= num_small <= D, got num_small={num_small}, D={D}")
    if not 0 < lambda_small < lambda_large and not (num_small == D and lambda_small > 0):
        raise ValueError("need 0 < lambda_small < lambda_large")
    lam = np.full(D, float(lambda_large))
    lam[:num_small] = lambda_small
    return Spectrum(lam)


def make_bulk_spectrum(D: int, lambda_min: float, lambda_max: float, rng: RngLike) -> Spectrum:
    """``D`` eigenvalues drawn log-uniformly on ``[lambda_min, lambda_max]``."""
    if not 0 < lambda_min <= lambda_max:
        raise ValueError("need 0 < lambda_min <= lambda_max")
    if lambda_min == lambda_max:
        return Spectrum(np.full(D, float(lambda_min)))
    u = as_generator(rng).uniform(np.log(lambda_min), np.log(lambda_max), size=D)
    return Spectrum(np.clip(np.sort(np.exp(u)), lambda_min, lambda_max))


def well_loss(well: QuadraticWell, w: np.ndarray) -> float:
    w = np.asarray(w, dtype=float)
    if w.shape != (well.D,):
        raise ValueError(f"expected a vector of length {well.D}, got shape {w.shape}")
    return 0.5 * float(np.dot(well.hessian_diag, w * w))


def well_grad(well: QuadraticWell, w: np.ndarray) -> np.ndarray:
    return well.hessian_diag * w


class QuadraticObjective:
    """Full-batch objective adapter so the network optimizers can run on a well."""

    num_examples = None

    def __init__(self, well: QuadraticWell):
        self.well = well

    @property
    def dim(self) -> int:
        return self.well.D

    def loss_and_grad(self, w: np.ndarray, idx=None) -> tuple[float, np.ndarray]:
        return well_loss(self.well, w), well_grad(self.well, w)

    def evaluate(self, w: np.ndarray) -> tuple[float, float]:
        return well_loss(self.well, w), float("nan")


def min_loss_in_subspace_exact(well: QuadraticWell,
                               basis: SubspaceBasis) -> tuple[np.ndarray, float]:
    """Exact minimizer of the well restricted to an affine chart.

    Solves ``(AᵀHA) θ = -AᵀH offset`` with pseudo-inverse semantics.
    """
    if basis.D != well.D:
        raise ValueError(f"basis lives in R^{basis.D}, well in R^{well.D}")
    if basis.d == 0:
        return np.zeros(0), well_loss(well, basis.offset)
    HA = well.hessian_diag[:, None] * basis.A
    gram = basis.A.T @ HA
    gram = 0.5 * (gram + gram.T)
    theta = solve_symmetric(gram, -(HA.T @ basis.offset))
    loss = well_loss(well, basis.point(theta))
    start = well_loss(well, basis.offset)
    if loss > start:
        # round-off only; θ = 0 is feasible and at least as good
        return np.zeros(basis.d), start
    return theta, loss


def sample_offset_at_distance(D: int, R: float, rng: RngLike) -> np.ndarray:
    """Uniformly random direction scaled to norm ``R``."""
    if R <= 0:
        raise ValueError("R must be positive")
    gen = as_generator(rng)
    while True:
        g = gen.standard_normal(D)
        n = np.linalg.norm(g)
        if n > 0:
            break
    v = g / n
    return R * (v / np.linalg.norm(v))


def affine_target_distance(target: AffineTarget, basis: SubspaceBasis) -> float:
    """Minimum Euclidean distance between two affine subspaces.

    Least squares on ``[A, -B] [θ; φ] = b0 - a0``; the residual norm is the
    distance. It vanishes whenever ``d + n >= D`` for generic subspaces.
    """
    if target.D != basis.D:
        raise ValueError("target and basis live in different ambient dimensions")
    rhs = target.offset - basis.offset
    cols = np.hstack([basis.A, -target.basis])
    if cols.shape[1] == 0:
        return float(np.linalg.norm(rhs))
    sol, *_ = np.linalg.lstsq(cols, rhs, rcond=None)
    return float(np.linalg.norm(cols @ sol - rhs))


def quadratic_run(well: QuadraticWell, R: float, d: int, run: int, stream: RngStream,
                  experiment: str = "quadratic") -> RunRow:
    """One exact-solver run: fresh offset at distance ``R`` and fresh basis.

    The per-run stream is keyed by ``(d, run)`` only, so sweeps over ``R``
    share common random numbers.
    """
    cell = stream.child("quadratic-run", d, run)
    offset = sample_offset_at_distance(well.D, R, cell.child("offset"))
    basis = SubspaceBasis.random(well.D, d, offset, cell.child("basis"))
    _, loss = min_loss_in_subspace_exact(well, basis)
    return RunRow(experiment, "quadratic", 0, int(d), int(run), cell.stream_id, loss)


def quadratic_success_grid(well: QuadraticWell, R: float, dims: Sequence[int],
                           epsilons: Sequence[float], runs: int, rng: RngStream,
                           experiment: str = "quadratic") -> SuccessGrid:
    if len(dims) == 0 or len(epsilons) == 0:
        raise ValueError("dimension and epsilon grids must be non-empty")
    if runs < 1:
        raise ValueError("runs must be at least 1")
    rows = [quadratic_run(well, R, d, i, rng, experiment) for d in dims for i in range(runs)]
    return SuccessGrid.from_rows(rows, epsilons, "loss")
