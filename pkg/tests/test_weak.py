import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crackdiff.errors import BetaUnsupported, DeltaMisaligned, InconsistentMode, ProfileMassMismatch
from crackdiff.fixed_point import FixedPointRunConfig, run_fixed_point
from crackdiff.grid import build_interval_grid
from crackdiff.params import make_profile, validate_params
from crackdiff.weak import WeakRunConfig, assemble_p1, p1_integral, run_approx, run_profile_variant, run_weak


def _dense(system):
    lo, d, up = system.matrix
    return np.diag(d) + np.diag(lo, -1) + np.diag(up, 1)


def test_p1_matrices_by_hand():
    # 4 elements on (-1, 1), h = 0.5, dt = 1, no crack terms
    g = build_interval_grid(-1, 1, 4, "vertex_p1")
    s = assemble_p1(g, 1.0, 1.0, None)
    h = 0.5
    M = h / 6 * (np.diag([2, 4, 4, 4, 2]) + np.diag([1] * 4, 1) + np.diag([1] * 4, -1))
    K = 1 / h * (np.diag([1, 2, 2, 2, 1]) - np.diag([1] * 4, 1) - np.diag([1] * 4, -1))
    assert np.allclose(_dense(s), M + K)
    assert s.load == pytest.approx([1, 0, 0, 0, 0])


def test_dipole_columns_sum_to_zero():
    # h = 0.125, delta = 0.25 spans the elements [x8, x9] and [x9, x10]
    g = build_interval_grid(-1, 1, 16, "vertex_p1")
    plain = _dense(assemble_p1(g, 1.0, 0.0, None))
    dip = _dense(assemble_p1(g, 1.0, 0.0, None, dipole_alpha=0.4, delta=0.25)) - plain
    assert np.allclose(dip.sum(axis=0), 0.0)
    c = 0.4 / (2 * 0.25)
    expect = np.zeros_like(dip)
    expect[8, 8:10] = c
    expect[9, 8:10] -= c
    expect[9, 9:11] += c
    expect[10, 9:11] = -c
    assert np.allclose(dip, expect)


def test_source_and_point_loads():
    g = build_interval_grid(-1, 1, 4, "vertex_p1")
    # alpha = 0.1, beta = 0.05: source alpha - beta on x < 0, point load beta at x = 0
    s = assemble_p1(g, 1.0, 0.9, lambda x: np.where(x < 0, 0.05, 0.0), point_load=0.05)
    # hat integrals over (-1, 0) are h/2, h, h/2
    assert s.load == pytest.approx([0.9 + 0.0125, 0.025, 0.0125 + 0.05, 0, 0])
    assert s.load.sum() == pytest.approx(1.0)


@pytest.mark.parametrize("alpha,beta", [(0.1, 0.0), (0.6, 0.0), (0.3, 0.1), (0.0, 0.0)])
def test_energy_identity(alpha, beta):
    tr = run_weak(WeakRunConfig(validate_params(alpha, beta), n=100, t_end=0.05))
    assert tr.meta["max_mass_rate_deviation"] <= 1e-8


def test_delta_validation():
    p = validate_params(0.1)
    with pytest.raises(DeltaMisaligned):
        run_weak(WeakRunConfig(p, n=100, t_end=0.01, delta=0.03))
    with pytest.raises(DeltaMisaligned):
        run_weak(WeakRunConfig(p, n=100, t_end=0.01, delta=0.3))
    with pytest.raises(DeltaMisaligned):
        run_weak(WeakRunConfig(p, n=100, t_end=0.01, delta=0.0))


def test_zero_alpha_matches_p1_baseline_and_fixed_point():
    # all crack terms vanish: same as the approximate model with alpha = 0
    p = validate_params(0.0)
    w = run_weak(WeakRunConfig(p, n=200, t_end=0.1))
    a = run_approx(WeakRunConfig(p, n=200, t_end=0.1))
    assert np.abs(w.final.values - a.final.values).max() <= 1e-12
    fp = run_fixed_point(FixedPointRunConfig(p, n=100, t_end=0.1))
    ui = np.interp(fp.final.grid.nodes, w.final.grid.nodes, w.final.values)
    assert np.linalg.norm(ui - fp.final.values) / np.linalg.norm(fp.final.values) < 1e-3


def test_weak_close_to_fixed_point_small_alpha():
    p = validate_params(0.1)
    w = run_weak(WeakRunConfig(p, n=400, t_end=0.2))
    fp = run_fixed_point(FixedPointRunConfig(p, n=200, t_end=0.2))
    x = fp.final.grid.nodes
    m = np.abs(x) > 0.1
    ui = np.interp(x, w.final.grid.nodes, w.final.values)
    assert np.linalg.norm((ui - fp.final.values)[m]) / np.linalg.norm(fp.final.values[m]) < 0.02


def test_approx_mass_law_and_beta_guard():
    tr = run_approx(WeakRunConfig(validate_params(0.1), n=100, t_end=0.05))
    assert tr.meta["max_mass_rate_deviation"] <= 1e-8
    with pytest.raises(BetaUnsupported):
        run_approx(WeakRunConfig(validate_params(0.3, 0.1), n=100, t_end=0.05))


def test_profile_variant_linear():
    p = validate_params(0.1, 0.0, 1.0, "profile", "linear")
    tr = run_profile_variant(WeakRunConfig(p, n=200, t_end=0.1))
    assert tr.meta["max_mass_rate_deviation"] <= 1e-8
    h = 2 / 200
    unorm = np.abs(tr.final.values).max()
    assert tr.meta["max_abs_jump_u"] == 0.0
    assert tr.meta["max_abs_jump_flux"] <= 10 * h * unorm


def test_profile_variant_guards():
    p = validate_params(0.1)
    with pytest.raises(ProfileMassMismatch):
        run_profile_variant(WeakRunConfig(p, n=100, t_end=0.01), make_profile("linear", 0.2))
    with pytest.raises(InconsistentMode):
        run_profile_variant(WeakRunConfig(p, n=100, t_end=0.01), lambda x: 0.05 + 0 * np.asarray(x))


def test_profile_variant_zero_alpha_is_baseline():
    p0 = validate_params(0.0, 0.0, 1.0, "profile", "linear")
    a = run_profile_variant(WeakRunConfig(p0, n=100, t_end=0.05))
    b = run_approx(WeakRunConfig(validate_params(0.0), n=100, t_end=0.05))
    assert np.abs(a.final.values - b.final.values).max() <= 1e-13


def test_p1_integral_trapezoid():
    g = build_interval_grid(-1, 1, 10, "vertex_p1")
    assert p1_integral(g, np.ones(11)) == pytest.approx(2.0)
    assert p1_integral(g, g.nodes) == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.01, 0.95), st.floats(0.0, 0.99), st.integers(1, 5), st.sampled_from([40, 80, 120]))
def test_energy_identity_property(alpha, frac, m, n):
    p = validate_params(alpha, frac * alpha)
    tr = run_weak(WeakRunConfig(p, n=n, t_end=0.02, delta=m * 2 / n))
    assert tr.meta["max_mass_rate_deviation"] <= 1e-8
