import math

import numpy as np
import pytest

from adsnull.curves import (BendingProfile, NullCurve, SGrid,
                            central_affine_curvature, closure_period, cousins,
                            curve_from_frames, frenet_generator,
                            integrate_spinor_frames, kappa_mn, torus_knot_type,
                            verify_null_geometry)
from adsnull.sl2 import det2, qform, sl2_exp
from adsnull.stencils import cross2


def test_frenet_generator_examples():
    np.testing.assert_allclose(frenet_generator(0.0, +1), [[0, 1], [1, 0]])
    k73 = kappa_mn(7, 3)
    assert abs(frenet_generator(k73, +1)[0, 1] - (-0.45)) <= 1e-15
    for k in (-1.7, 0.3, 2.0):
        gap = frenet_generator(k, +1) - frenet_generator(k, -1)
        np.testing.assert_allclose(gap, [[0, 2], [0, 0]], atol=0)
    with pytest.raises(ValueError):
        frenet_generator(0.0, 2)


def test_kappa_mn_values():
    assert abs(kappa_mn(7, 3) - (-58.0 / 40.0)) <= 1e-15
    assert abs(kappa_mn(4, 1) - (-17.0 / 15.0)) <= 1e-15
    assert abs(kappa_mn(2, 1) - (-5.0 / 3.0)) <= 1e-15


@pytest.mark.parametrize("m, n", [(3, 3), (1, 2), (6, 2), (4, 0)])
def test_kappa_mn_preconditions(m, n):
    with pytest.raises(ValueError):
        kappa_mn(m, n)
    with pytest.raises(ValueError):
        torus_knot_type(m, n)


def test_torus_knot_type():
    assert torus_knot_type(7, 3) == (2, 5)
    assert torus_knot_type(4, 1) == (3, 5)
    assert torus_knot_type(3, 1) == (1, 2)


@pytest.mark.parametrize("m, n", [(7, 3), (4, 1), (5, 2)])
def test_closure_period_against_parity_formula(m, n):
    # independent oracle: omega_+- = n,m * sqrt(2/(m^2-n^2)) so the joint
    # half-period condition closes after u pi sqrt((m^2-n^2)/2) with u = 1
    # when m - n is even and u = 2 otherwise
    u = 1 if (m - n) % 2 == 0 else 2
    expected = u * math.pi * math.sqrt((m * m - n * n) / 2.0)
    sigma_expected = (-1.0) ** (n * u)
    length, sigma = closure_period(kappa_mn(m, n))
    assert abs(length - expected) <= 1e-9 * expected
    assert sigma == sigma_expected


def test_closure_period_requires_elliptic():
    with pytest.raises(ValueError):
        closure_period(-0.5)


def test_constant_profile_uses_exact_flow():
    k0 = -1.3
    grid = SGrid(0.0, 0.01, 200)
    curve = integrate_spinor_frames(BendingProfile.constant(k0), grid)
    s = grid.points()[:, None, None]
    expected = sl2_exp(s * frenet_generator(k0, +1))
    np.testing.assert_allclose(curve.fplus, expected, atol=1e-12)
    # RK4 on the same constant bending must agree
    rk4 = integrate_spinor_frames(
        BendingProfile.from_callable(lambda s: np.full_like(np.asarray(s, float), k0)),
        grid)
    assert np.abs(rk4.fplus - curve.fplus).max() <= 1e-10


def test_rk4_self_convergence_is_fourth_order():
    # sampled sin bending, Richardson halving on the endpoint frame
    diffs = {}
    for h in (4e-3, 2e-3):
        grid = SGrid.over_length(0.0, 2.0, h)
        fine = SGrid.over_length(0.0, 2.0, h / 2.0)
        prof = BendingProfile.sampled(grid, np.sin(grid.points()))
        prof_f = BendingProfile.sampled(fine, np.sin(fine.points()))
        c = integrate_spinor_frames(prof, grid)
        cf = integrate_spinor_frames(prof_f, fine)
        diffs[h] = np.abs(c.fplus[-1] - cf.fplus[-1]).max()
    ratio = diffs[4e-3] / diffs[2e-3]
    assert 8.0 <= ratio <= 40.0  # fourth order would give 16


def test_closure_of_closed_curves(curve73):
    assert np.abs(curve73.gamma[-1] - curve73.gamma[0]).max() <= 1e-6
    # frames flip by the common sign, which cancels in gamma
    assert np.abs(curve73.fplus[-1] + curve73.fplus[0]).max() <= 1e-6
    assert np.abs(curve73.fminus[-1] + curve73.fminus[0]).max() <= 1e-6


def test_closure_of_4_1_curve():
    k0 = kappa_mn(4, 1)
    length, sigma = closure_period(k0)
    assert sigma == 1.0
    grid = SGrid.over_length(0.0, length, 1e-3)
    curve = integrate_spinor_frames(BendingProfile.constant(k0), grid)
    assert np.abs(curve.gamma[-1] - curve.gamma[0]).max() <= 1e-6


def test_sl_preservation(sin_curve):
    assert np.abs(det2(sin_curve.fplus) - 1.0).max() <= 1e-10
    assert np.abs(det2(sin_curve.fminus) - 1.0).max() <= 1e-10


def test_curve_from_frames():
    grid = SGrid(0.0, 0.01, 50)
    f = sl2_exp(grid.points()[:, None, None] * frenet_generator(-2.0, +1))
    np.testing.assert_allclose(curve_from_frames(f, f),
                               np.broadcast_to(np.eye(2), (50, 2, 2)), atol=1e-12)
    with pytest.raises(ValueError, match="same shape"):
        curve_from_frames(f, f[:-1])
    with pytest.raises(ValueError, match="SL"):
        curve_from_frames(1.1 * f, f)


def test_curve_points_lie_on_unit_pseudosphere(curve73):
    np.testing.assert_allclose(qform(curve73.gamma), -1.0, atol=2e-8)


def test_constant_curve_matches_exponential_product():
    k0 = kappa_mn(2, 1)
    grid = SGrid(0.0, 1e-3, 2000)
    curve = integrate_spinor_frames(BendingProfile.constant(k0), grid)
    s = grid.points()[:, None, None]
    expected = sl2_exp(s * frenet_generator(k0, +1)) @ sl2_exp(-s * frenet_generator(k0, -1))
    assert np.abs(curve.gamma - expected).max() <= 1e-10


def test_cousins_are_frame_columns(curve73):
    eta_p, eta_m = cousins(curve73)
    # second frame column is the exact derivative, det(eta, eta') = det F = 1
    assert np.abs(cross2(eta_p, curve73.fplus[:, :, 1]) - 1.0).max() <= 1e-8
    assert np.abs(cross2(eta_m, curve73.fminus[:, :, 1]) - 1.0).max() <= 1e-8
    # central-difference check of the unit-area normalization
    h = curve73.grid.h
    dp = (eta_p[2:] - eta_p[:-2]) / (2 * h)
    assert np.abs(cross2(eta_p[1:-1], dp) - 1.0).max() <= 5e-6


def test_cousins_close_up_to_sign(curve73):
    eta_p, eta_m = cousins(curve73)
    assert np.abs(eta_p[-1] + eta_p[0]).max() <= 1e-6
    assert np.abs(eta_m[-1] + eta_m[0]).max() <= 1e-6


def test_central_affine_curvature_circle_oracle():
    # eta = (cos(w s), sin(w s)/w) has det(eta, eta') = 1 and eta'' = -w^2 eta;
    # the stencil error constant is w^4 / 4
    w = 1.2
    grid = SGrid(0.0, 1e-3, 4000)
    s = grid.points()
    eta = np.stack([np.cos(w * s), np.sin(w * s) / w], axis=-1)
    k, one_sided = central_affine_curvature(eta, grid)
    assert np.abs(k[~one_sided] + w * w).max() <= 1e-6
    assert one_sided.sum() == 2 and one_sided[0] and one_sided[-1]


def test_cousin_curvatures_of_constant_curve():
    k0 = kappa_mn(4, 1)
    grid = SGrid(0.0, 1e-3, 4000)
    curve = integrate_spinor_frames(BendingProfile.constant(k0), grid)
    eta_p, _ = cousins(curve)
    k, one_sided = central_affine_curvature(eta_p, grid)
    assert np.abs(k[~one_sided] - (k0 + 1.0)).max() <= 1e-6
    assert abs((k0 + 1.0) - (-2.0 / 15.0)) <= 1e-15


def test_cousin_curvature_difference(sin_curve):
    eta_p, eta_m = cousins(sin_curve)
    kp, one_sided = central_affine_curvature(eta_p, sin_curve.grid)
    km, _ = central_affine_curvature(eta_m, sin_curve.grid)
    assert np.abs(kp[~one_sided] - km[~one_sided] - 2.0).max() <= 2e-4


def test_geometry_report_constant(curve73):
    rep = verify_null_geometry(curve73)
    assert rep.max_null_defect <= 1e-4
    assert rep.max_proper_time_defect <= 1e-4
    assert rep.max_bending_defect <= 1e-4
    assert rep.min_inflection_norm > 1.0
    assert rep.future_directed


def test_geometry_report_sin(sin_curve):
    rep = verify_null_geometry(sin_curve)
    assert rep.max_bending_defect <= 1e-3
    assert rep.future_directed


def test_reparameterized_curve_fails_proper_time():
    # relabel gamma(2s) as if sampled at step h: the second derivative gains
    # a factor 4, its self-pairing 16, so the defect is |16 * 4 - 4| = 60
    k0 = kappa_mn(7, 3)
    h = 1e-3
    wide = SGrid(0.0, 2.0 * h, 4000)
    curve = integrate_spinor_frames(BendingProfile.constant(k0), wide)
    relabeled = NullCurve(SGrid(0.0, h, 4000), curve.gamma, curve.fplus,
                          curve.fminus, curve.kappa)
    rep = verify_null_geometry(relabeled)
    assert abs(rep.max_proper_time_defect - 60.0) <= 1.0
    assert rep.max_null_defect <= 1e-4  # the curve stays null, just mislabeled


def test_roundtrip_defect_ratios():
    # second-order convergence of all three defects under step halving,
    # measured where truncation dominates the fp floor of the stencils
    prof = BendingProfile.from_callable(np.sin, np.cos, lambda s: -np.sin(s))
    reps = {}
    for h in (8e-3, 4e-3):
        grid = SGrid.over_length(0.0, 2.0 * math.pi, h)
        reps[h] = verify_null_geometry(
            integrate_spinor_frames(prof, grid, base=math.pi))
    for field in ("max_null_defect", "max_proper_time_defect",
                  "max_bending_defect"):
        ratio = getattr(reps[8e-3], field) / getattr(reps[4e-3], field)
        assert 3.2 <= ratio <= 4.8, (field, ratio)


def test_bending_self_consistency_sin(sin_curve):
    rep = verify_null_geometry(sin_curve)
    assert rep.max_bending_defect <= 1e-3


def test_frames_rebuilt_from_cousins(curve73):
    eta_p, eta_m = cousins(curve73)
    fplus = np.stack([eta_p, curve73.fplus[:, :, 1]], axis=-1)
    fminus = np.stack([eta_m, curve73.fminus[:, :, 1]], axis=-1)
    gamma = curve_from_frames(fplus, fminus)
    assert np.abs(gamma - curve73.gamma).max() <= 1e-8


def test_integrate_rejects_bad_initial_frame():
    grid = SGrid(0.0, 1e-2, 10)
    with pytest.raises(ValueError, match="SL"):
        integrate_spinor_frames(BendingProfile.constant(-2.0), grid,
                                f0_plus=1.5 * np.eye(2))


def test_rk4_step_too_large():
    # a violently varying bending at a coarse step drives the determinant of
    # the truncated update negative
    grid = SGrid(0.0, 0.5, 10)
    prof = BendingProfile.from_callable(
        lambda s: 100.0 * np.sin(10.0 * np.asarray(s, float)))
    with pytest.raises(ValueError, match="step"):
        integrate_spinor_frames(prof, grid)


def test_sgrid_and_profile_validation():
    with pytest.raises(ValueError):
        SGrid(0.0, -1.0, 10)
    with pytest.raises(ValueError):
        SGrid(0.0, 1.0, 3)
    grid = SGrid(0.0, 0.5, 8)
    with pytest.raises(ValueError, match="finite"):
        BendingProfile.sampled(grid, np.full(8, np.nan))
    with pytest.raises(ValueError, match="match"):
        BendingProfile.sampled(grid, np.zeros(5))
    with pytest.raises(ValueError, match="not constant"):
        BendingProfile.from_callable(np.sin).constant_value


def test_profile_fd_derivatives():
    prof = BendingProfile.from_callable(np.sin)
    s = np.linspace(0.0, 3.0, 7)
    assert np.abs(prof.derivative(s) - np.cos(s)).max() <= 1e-8
    assert np.abs(prof.second_derivative(s) + np.sin(s)).max() <= 1e-6
