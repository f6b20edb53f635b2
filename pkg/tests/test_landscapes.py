import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tomography.landscapes import (AffineTarget, QuadraticObjective, QuadraticWell, Spectrum,
                                   SubspaceBasis, affine_target_distance, make_bimodal_spectrum,
                                   make_bulk_spectrum, min_loss_in_subspace_exact,
                                   quadratic_run, quadratic_success_grid,
                                   sample_offset_at_distance, well_grad, well_loss)
from tomography.neural.adam import AdamConfig
from tomography.neural.training import optimize_in_subspace
from tomography.numerics import RngStream


def unit_well(D):
    return QuadraticWell(Spectrum(np.ones(D)))


def test_bimodal_spectrum_examples():
    assert np.array_equal(make_bimodal_spectrum(4, 2, 0.01, 10.0).eigenvalues,
                          [0.01, 0.01, 10.0, 10.0])
    assert np.all(make_bimodal_spectrum(6, 6, 0.3, 0.3).eigenvalues == 0.3)
    with pytest.raises(ValueError):
        make_bimodal_spectrum(4, 5, 0.01, 10.0)


def test_bulk_spectrum():
    assert np.all(make_bulk_spectrum(5, 2.0, 2.0, RngStream(0)).eigenvalues == 2.0)
    lam = make_bulk_spectrum(100, 1e-3, 10.0, RngStream(1)).eigenvalues
    assert lam.min() >= 1e-3 and lam.max() <= 10.0
    geo = math.sqrt(1e-3 * 10.0)
    assert geo / 3 <= np.median(lam) <= geo * 3


def test_spectrum_rejects_nonpositive():
    with pytest.raises(ValueError):
        Spectrum(np.array([1.0, 0.0]))


def test_well_loss_examples():
    assert well_loss(unit_well(3), np.zeros(3)) == 0.0
    assert well_loss(QuadraticWell(Spectrum(np.array([2.0]))), np.array([1.0])) == 1.0
    assert well_loss(QuadraticWell(Spectrum(np.array([1.0, 4.0]))), np.array([2.0, 1.0])) == 4.0


def test_well_grad_matches_finite_differences():
    well = QuadraticWell(make_bulk_spectrum(6, 0.1, 5.0, RngStream(2)))
    w = np.random.default_rng(0).standard_normal(6)
    h = 1e-6
    fd = [(well_loss(well, w + h * e) - well_loss(well, w - h * e)) / (2 * h) for e in np.eye(6)]
    assert np.allclose(well_grad(well, w), fd, rtol=1e-7)


def test_exact_subspace_minimum_examples():
    well, off = unit_well(2), np.array([1.0, 0.0])
    theta, loss = min_loss_in_subspace_exact(well, SubspaceBasis(np.array([[0.0], [1.0]]), off))
    assert np.allclose(theta, 0.0) and loss == pytest.approx(0.5)
    theta, loss = min_loss_in_subspace_exact(well, SubspaceBasis(np.array([[1.0], [0.0]]), off))
    assert theta == pytest.approx([-1.0]) and loss == pytest.approx(0.0, abs=1e-30)
    for phi in np.linspace(0.1, 3.0, 7):
        A = np.array([[math.cos(phi)], [math.sin(phi)]])
        _, loss = min_loss_in_subspace_exact(well, SubspaceBasis(A, off))
        assert loss == pytest.approx(0.5 * math.sin(phi) ** 2, abs=1e-14)


def test_exact_minimum_full_space_and_empty_basis():
    well = QuadraticWell(make_bulk_spectrum(8, 0.1, 3.0, RngStream(3)))
    off = sample_offset_at_distance(8, 1.0, RngStream(4))
    _, loss = min_loss_in_subspace_exact(well, SubspaceBasis.random(8, 8, off, RngStream(5)))
    assert loss < 1e-20
    theta, loss0 = min_loss_in_subspace_exact(well, SubspaceBasis.random(8, 0, off, RngStream(5)))
    assert theta.size == 0 and loss0 == well_loss(well, off)


def test_exact_minimum_agrees_with_brute_lstsq():
    # dual route: minimize ||H^(1/2)(A θ + w0)|| by least squares
    rng = np.random.default_rng(6)
    well = QuadraticWell(make_bulk_spectrum(30, 1e-3, 10.0, RngStream(6)))
    off = rng.standard_normal(30)
    basis = SubspaceBasis.random(30, 7, off, RngStream(7))
    root = np.sqrt(well.hessian_diag)
    theta_ls, *_ = np.linalg.lstsq(root[:, None] * basis.A, -root * off, rcond=None)
    _, loss = min_loss_in_subspace_exact(well, basis)
    assert loss == pytest.approx(well_loss(well, basis.point(theta_ls)), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 20), st.integers(0, 2 ** 32))
def test_exact_minimum_never_above_offset_loss(D, seed):
    s = RngStream(seed)
    well = QuadraticWell(make_bulk_spectrum(D, 1e-3, 10.0, s.child("spec")))
    off = sample_offset_at_distance(D, 1.0, s.child("off"))
    for d in (1, D // 2, D):
        _, loss = min_loss_in_subspace_exact(well, SubspaceBasis.random(D, d, off, s.child(d)))
        assert 0.0 <= loss <= well_loss(well, off)


def test_adam_reaches_exact_minimum():
    cfg = AdamConfig(learning_rate=5e-2)
    well = QuadraticWell(make_bulk_spectrum(20, 1e-2, 10.0, RngStream(8)))
    off = sample_offset_at_distance(20, 1.0, RngStream(9))
    basis = SubspaceBasis.random(20, 5, off, RngStream(10))
    _, exact = min_loss_in_subspace_exact(well, basis)
    rec, _ = optimize_in_subspace(QuadraticObjective(well), basis, cfg, RngStream(11),
                                  num_steps=2000)
    assert rec.best_loss - exact <= 1e-3 * (1 + exact)
    assert rec.losses[0] == pytest.approx(well_loss(well, off))


def test_offset_at_distance():
    v = sample_offset_at_distance(17, 2.5, RngStream(12))
    assert np.linalg.norm(v) == pytest.approx(2.5, rel=1e-14)
    a = sample_offset_at_distance(5, 1.0, RngStream(13))
    b = sample_offset_at_distance(5, 1.0, RngStream(14))
    assert abs(abs(a @ b) - 1.0) > 1e-6


def test_offset_coordinates_are_centered():
    D, R = 10_000, 1.0
    first = [sample_offset_at_distance(D, R, RngStream(15).child(i))[0] for i in range(100)]
    assert abs(np.mean(first)) <= 4 * R / math.sqrt(D)


def test_subspace_basis_validation():
    with pytest.raises(ValueError):
        SubspaceBasis(np.array([[2.0], [0.0]]), np.zeros(2))
    with pytest.raises(ValueError):
        SubspaceBasis(np.eye(3), np.zeros(2))
    b = SubspaceBasis.random(30, 4, np.zeros(30), RngStream(16))
    assert np.all(np.abs(np.linalg.norm(b.A, axis=0) - 1) <= 1e-12)


def test_affine_distance_examples():
    target = AffineTarget(np.array([[1.0], [0.0]]), np.array([0.0, 1.0]))
    basis = SubspaceBasis(np.array([[1.0], [0.0]]), np.zeros(2))
    assert affine_target_distance(target, basis) == pytest.approx(1.0)
    target = AffineTarget.random(10, 4, np.ones(10), RngStream(17))
    basis = SubspaceBasis.random(10, 6, np.zeros(10), RngStream(18))
    assert affine_target_distance(target, basis) < 1e-10


def test_affine_distance_agrees_with_projection():
    # dual route: project the offset difference onto the complement of span[A, B]
    D, n, d = 40, 9, 13
    target = AffineTarget.random(D, n, sample_offset_at_distance(D, 1.0, RngStream(19)),
                                 RngStream(20))
    basis = SubspaceBasis.random(D, d, np.zeros(D), RngStream(21))
    q, _ = np.linalg.qr(np.hstack([basis.A, target.basis]))
    diff = target.offset - basis.offset
    expected = np.linalg.norm(diff - q @ (q.T @ diff))
    assert affine_target_distance(target, basis) == pytest.approx(expected, rel=1e-10)


def test_success_grid_edge_cases():
    well = QuadraticWell(make_bimodal_spectrum(12, 6, 0.01, 10.0))
    eps = [1e-6, 1e-3, 0.1, 10.0]
    grid = quadratic_success_grid(well, 1.0, [1, 6, 12], eps, 5, RngStream(22))
    p = grid.p_success[0]
    assert np.all(p[2] == 1.0)  # d = D
    assert np.all(p[:, 3] == 1.0)  # epsilon above the offset loss of any unit offset
    assert grid.successes.min() >= 0 and np.all(grid.successes <= grid.runs)


def test_success_nesting_per_run():
    well = QuadraticWell(make_bulk_spectrum(20, 1e-3, 10.0, RngStream(23)))
    eps = np.geomspace(1e-4, 5, 15)
    for d in (2, 10, 18):
        row = quadratic_run(well, 1.0, d, 0, RngStream(24))
        flags = [row.succeeds(e, "loss") for e in eps]
        assert flags == sorted(flags)


def test_common_random_numbers_across_distance():
    well = QuadraticWell(make_bulk_spectrum(20, 1e-3, 10.0, RngStream(25)))
    a = quadratic_run(well, 1.0, 7, 3, RngStream(26))
    b = quadratic_run(well, 2.0, 7, 3, RngStream(26))
    assert b.best_loss == pytest.approx(4 * a.best_loss, rel=1e-9)
