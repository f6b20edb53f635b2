"""Gaussian widths, sphere projections and the escape-probability bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import RngLike, as_generator, check_finite

# rows of Gaussians processed per block in gaussian_width_mc
_BLOCK = 4096


@dataclass(frozen=True)
class WidthEstimate:
    mean: float
    std_error: float
    num_gaussians: int

    @property
    def squared(self) -> float:
        return self.mean * self.mean

    def squared_interval(self, k: float = 3.0) -> tuple[float, float]:
        """``(mean - k*se)^2 .. (mean + k*se)^2``, floored at zero."""
        lo = max(self.mean - k * self.std_error, 0.0)
        return lo * lo, (self.mean + k * self.std_error) ** 2


@dataclass(frozen=True)
class EllipsoidSpec:
    radii: np.ndarray

    def __post_init__(self) -> None:
        r = check_finite(np.atleast_1d(self.radii), "radii")
        if r.ndim != 1 or r.size == 0:
            raise ValueError("radii must be a non-empty 1-D array")
        if np.any(r <= 0):
            raise ValueError("ellipsoid radii must be strictly positive")
        object.__setattr__(self, "radii", r)

    @property
    def dim(self) -> int:
        return self.radii.size

    @classmethod
    def quadratic_sublevel(cls, eigenvalues, epsilon: float) -> "EllipsoidSpec":
        """Sublevel set ``{w : ½ Σ λ_i w_i² <= ε}``, radii ``sqrt(2ε/λ_i)``."""
        lam = np.asarray(eigenvalues, dtype=float)
        return cls(sublevel_radii(lam, epsilon))


def sublevel_radii(eigenvalues: np.ndarray, epsilon: float) -> np.ndarray:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    lam = np.asarray(eigenvalues, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("eigenvalues must be positive")
    return np.sqrt(2.0 * epsilon / lam)


def _as_cloud(points) -> np.ndarray:
    x = check_finite(np.atleast_2d(points), "point cloud")
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("point cloud must be a non-empty (N, D) array")
    return x


def _summarize(samples: np.ndarray) -> WidthEstimate:
    n = samples.size
    return WidthEstimate(float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(n)), n)


def gaussian_width_mc(points, rng: RngLike, num_gaussians: int) -> WidthEstimate:
    """Monte Carlo Gaussian width of a finite point cloud.

    Uses the two-sided form ``½ E sup_{x,y} <g, x - y>`` directly, which for a
    finite cloud is half the mean spread ``max_x <g,x> - min_y <g,y>``. A finite
    cloud only lower-bounds the width of the set it samples.
    """
    if num_gaussians < 2:
        raise ValueError("num_gaussians must be at least 2")
    x = _as_cloud(points)
    n_points, dim = x.shape
    if n_points == 1:
        return WidthEstimate(0.0, 0.0, num_gaussians)
    gen = as_generator(rng)
    samples = np.empty(num_gaussians)
    for start in range(0, num_gaussians, _BLOCK):
        stop = min(start + _BLOCK, num_gaussians)
        proj = gen.standard_normal((stop - start, dim)) @ x.T
        samples[start:stop] = 0.5 * (proj.max(axis=1) - proj.min(axis=1))
    return _summarize(samples)


def ellipsoid_width_sq_bounds(e: EllipsoidSpec) -> tuple[float, float]:
    """``((2/π) Σ r², Σ r²)``, the lower and upper bounds on squared width."""
    total = float(np.sum(e.radii ** 2))
    return 2.0 / math.pi * total, total


def ellipsoid_width_mc(e: EllipsoidSpec, rng: RngLike, num_gaussians: int) -> WidthEstimate:
    """Average of the exact support function ``sqrt(Σ g_i² r_i²)`` over Gaussian draws."""
    if num_gaussians < 2:
        raise ValueError("num_gaussians must be at least 2")
    gen = as_generator(rng)
    r2 = e.radii ** 2
    samples = np.empty(num_gaussians)
    for start in range(0, num_gaussians, _BLOCK):
        stop = min(start + _BLOCK, num_gaussians)
        g = gen.standard_normal((stop - start, e.dim))
        samples[start:stop] = np.sqrt((g * g) @ r2)
    return _summarize(samples)


def project_onto_sphere(points, center) -> np.ndarray:
    """Radially project each point onto the unit sphere around ``center``."""
    x = _as_cloud(points)
    c = check_finite(np.asarray(center, dtype=float), "center")
    if c.shape != (x.shape[1],):
        raise ValueError(f"center has shape {c.shape}, expected ({x.shape[1]},)")
    diff = x - c
    norms = np.linalg.norm(diff, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("a point coincides with the projection center")
    return diff / norms[:, None]


def _as_positive_spectrum(spectrum) -> np.ndarray:
    lam = np.asarray(getattr(spectrum, "eigenvalues", spectrum), dtype=float)
    if lam.ndim != 1 or lam.size == 0 or np.any(lam <= 0):
        raise ValueError("spectrum must be a non-empty list of positive eigenvalues")
    return lam


def local_angular_dimension_bound(spectrum, epsilon: float, R: float) -> float:
    """Lower bound ``Σ r_i² / (R² + r_i²)`` on the local angular dimension of a
    quadratic sublevel set seen from distance ``R``."""
    if R <= 0:
        raise ValueError("R must be positive")
    r2 = sublevel_radii(_as_positive_spectrum(spectrum), epsilon) ** 2
    return float(np.sum(r2 / (R * R + r2)))


def threshold_upper_bound(spectrum, epsilon: float, R: float, D: int | None = None) -> float:
    lam = _as_positive_spectrum(spectrum)
    if D is None:
        D = lam.size
    if D != lam.size:
        raise ValueError(f"spectrum has {lam.size} eigenvalues but D={D}")
    return D - local_angular_dimension_bound(lam, epsilon, R)


def escape_probability_bound(k: int, width: float) -> float:
    """Lower bound on the probability that a codimension-``k`` random subspace
    misses a subset of the unit sphere with Gaussian width ``width``.

    Outside the regime ``k > width²`` there is no guarantee and 0 is returned.
    """
    if k < 1:
        raise ValueError("codimension k must be at least 1")
    if width < 0:
        raise ValueError("width must be non-negative")
    if k <= width * width:
        return 0.0
    gap = k / math.sqrt(k + 1.0) - width
    return min(1.0, max(0.0, 1.0 - 3.5 * math.exp(-gap * gap / 18.0)))
