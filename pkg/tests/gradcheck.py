"""Central finite-difference gradient checks for ReLU networks.

A coordinate is only checked if the perturbation ``w ± h e_i`` leaves every
ReLU pattern unchanged, so the loss is smooth on the probe segment; kinked
coordinates are resampled.
"""

from __future__ import annotations

import numpy as np

from tomography.landscapes import SubspaceBasis
from tomography.neural import Dataset, MlpArchitecture, forward, init_params, loss_and_grad
from tomography.numerics import RngStream

STEP = 1e-6
FLOOR = 1e-6


def relative_error(a: float, b: float, floor: float = FLOOR) -> float:
    return abs(a - b) / max(abs(a), abs(b), floor)


def _pattern(arch, w, x):
    _, _, pre = forward(arch, w, x)
    return [p > 0 for p in pre[:-1]]


def _same_pattern(arch, w1, w2, x) -> bool:
    return all(np.array_equal(a, b) for a, b in zip(_pattern(arch, w1, x), _pattern(arch, w2, x)))


def random_config(seed: int, max_params: int = 2000):
    """Random small architecture, parameters and batch with ``D <= max_params``."""
    gen = RngStream(seed).child("gradcheck").generator()
    while True:
        depth = int(gen.integers(1, 3))
        widths = [int(gen.integers(2, 9))] + [int(gen.integers(2, 33)) for _ in range(depth)]
        widths.append(int(gen.integers(2, 6)))
        arch = MlpArchitecture(tuple(widths))
        if arch.num_params <= max_params:
            break
    w = init_params(arch, gen) + 0.1 * gen.standard_normal(arch.num_params)
    n = int(gen.integers(1, 17))
    data = Dataset.from_class_ids(gen.standard_normal((n, widths[0])),
                                  gen.integers(0, widths[-1], n), widths[-1])
    return arch, w, data, gen


def check_full_gradient(arch, w, data, gen, num_coords: int = 100, h: float = STEP) -> float:
    """Largest relative error over ``num_coords`` smooth coordinates."""
    _, g = loss_and_grad(arch, w, data)
    worst, checked, tries = 0.0, 0, 0
    while checked < min(num_coords, arch.num_params) and tries < 20 * num_coords:
        tries += 1
        i = int(gen.integers(arch.num_params))
        wp, wm = w.copy(), w.copy()
        wp[i] += h
        wm[i] -= h
        if not _same_pattern(arch, wp, wm, data.inputs):
            continue
        fd = (loss_and_grad(arch, wp, data)[0] - loss_and_grad(arch, wm, data)[0]) / (2 * h)
        worst = max(worst, relative_error(g[i], fd))
        checked += 1
    return worst


def check_subspace_gradient(arch, w, data, gen, d: int = 5, h: float = STEP) -> float:
    """Chain rule check: ``A^T grad_w`` against finite differences in ``θ``."""
    basis = SubspaceBasis.random(arch.num_params, d, w, gen)
    theta = 0.01 * gen.standard_normal(d)
    _, g = loss_and_grad(arch, basis.point(theta), data)
    pulled = basis.A.T @ g
    worst = 0.0
    for j in range(d):
        e = np.zeros(d)
        e[j] = h
        wp, wm = basis.point(theta + e), basis.point(theta - e)
        if not _same_pattern(arch, wp, wm, data.inputs):
            continue
        fd = (loss_and_grad(arch, wp, data)[0] - loss_and_grad(arch, wm, data)[0]) / (2 * h)
        worst = max(worst, relative_error(pulled[j], fd))
    return worst
