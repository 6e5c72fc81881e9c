"""Acceptance criteria, one test per criterion (two for the contraction criterion).

Each test records a PASS/FAIL line that is echoed in the terminal summary.
"""

import numpy as np
import pytest

from crackdiff.analysis import (
    SweepConfig, drift_profile, energy_audit, epsilon_error, sweep_epsilon, sweep_ny, transmission_residuals,
)
from crackdiff.cli import main
from crackdiff.direct import DirectRunConfig, mirror_y, run_direct, y_profile, y_spread
from crackdiff.fixed_point import FixedPointRunConfig, SubdomainPair, coupled_step, run_fixed_point
from crackdiff.params import validate_params
from crackdiff.weak import WeakRunConfig, run_approx, run_profile_variant, run_weak

pytestmark = pytest.mark.acceptance

T1 = 0.5
TOL = 1e-10


def _fp(alpha, beta=0.0, n=400, t_end=T1, accelerate=False):
    return run_fixed_point(FixedPointRunConfig(validate_params(alpha, beta), n=n, t_end=t_end, accelerate=accelerate))


def _l2_away(x_ref, u_ref, x, u, cut=0.1):
    m = np.abs(x_ref) > cut
    ui = np.interp(x_ref[m], x, u)
    return float(np.linalg.norm(ui - u_ref[m]) / np.linalg.norm(u_ref[m]))


def test_criterion_01_energy_identities(acceptance):
    devs = {}
    for a, b in [(0.1, 0.0), (0.6, 0.0), (0.3, 0.1)]:
        devs[f"fp({a},{b})"] = energy_audit(_fp(a, b), 1.0)
        devs[f"weak({a},{b})"] = energy_audit(run_weak(WeakRunConfig(validate_params(a, b), n=800)), 1.0)
    devs["approx(0.1)"] = energy_audit(run_approx(WeakRunConfig(validate_params(0.1), n=800)), 1.0)
    pv = validate_params(0.1, 0.0, 1.0, "profile", "linear")
    devs["profile(0.1)"] = energy_audit(run_profile_variant(WeakRunConfig(pv, n=800)), 1.0)
    for eps in (0.2, 1.0):
        p = validate_params(0.1, 0.0, eps)
        d = run_direct(DirectRunConfig(p, 400, sweep_ny(0.1, eps, 400)))
        devs[f"direct(eps={eps})"] = energy_audit(d, eps)
    pd = validate_params(0.1, 0.0, 0.2, "profile", "linear")
    devs["direct-profile(eps=0.2)"] = energy_audit(run_direct(DirectRunConfig(pd, 400, 40)), 0.2)
    worst = max(devs, key=devs.get)
    ok = all(v <= 1e-8 for v in devs.values())
    acceptance(1, "energy identities", ok, f"max |dM/dt - rate| = {devs[worst]:.2e} ({worst}) over {len(devs)} runs, bound 1e-8")
    assert ok


ALPHAS = (0.1, 0.3, 0.6, 0.9)


@pytest.fixture(scope="module")
def contraction_runs():
    return {a: _fp(a) for a in ALPHAS}


def test_criterion_02a_contraction_ratio(acceptance):
    # re-run the coupled steps to see full iterate histories
    worst, steps, min_count = 0.0, 0, np.inf
    for a in ALPHAS:
        p = validate_params(a)
        pair, F = SubdomainPair.zeros(400), 0.0
        for _ in range(int(T1 / 1e-3)):
            pair, st = coupled_step(pair, 1e-3, p, F, TOL)
            F = st.F_next
            r = np.array(st.significant_ratios())
            min_count = min(min_count, len(r))
            if len(r):
                worst = max(worst, float(np.max(np.abs(r / (1 - a) - 1))))
            steps += 1
    ok = worst <= 1e-8 and min_count >= 1
    acceptance(2, "exact contraction", ok,
               f"ratio/(1-alpha) - 1 max {worst:.1e} over {steps} steps, >= {min_count} ratio(s) per step")
    assert ok


def test_criterion_02b_iteration_cost_in_alpha(acceptance, contraction_runs):
    total = {a: contraction_runs[a].meta["total_iterations"] for a in ALPHAS}
    first = {a: int(contraction_runs[a].interface["iters"][0]) for a in ALPHAS}
    monotone = all(total[a] <= total[b] for a, b in zip(ALPHAS, ALPHAS[1:]))
    factor = total[0.9] / total[0.1]
    ok = monotone and factor >= 5
    acceptance(2, "exact contraction", ok,
               f"iterations per run {total} (first step {first}); nondecreasing={monotone}, "
               f"alpha 0.9/0.1 = {factor:.2f} (needs >= 5)")
    assert ok


def test_criterion_03_transmission_conditions(acceptance):
    worst = 0.0
    for a, b in [(0.1, 0.0), (0.6, 0.0), (0.3, 0.1)]:
        r = transmission_residuals(_fp(a, b))
        bound = 10 * TOL * r["scale"]
        worst = max(worst, float(np.max(np.abs(r["jump_u"]) / bound)), float(np.max(np.abs(r["jump_flux"]) / bound)))
    ok = worst <= 1.0
    acceptance(3, "transmission conditions", ok, f"max residual / (10 tol scale) = {worst:.3f}")
    assert ok


def test_criterion_04_long_time_drift(acceptance):
    errs = {}
    for a in (0.0, 0.1, 0.6):
        w = drift_profile(a)
        assert abs(w.mean_zero_residual()) <= 1e-12
        tr = _fp(a, t_end=5.0)
        x = tr.final.grid.nodes
        errs[a] = float(np.max(np.abs(tr.final.values - w.drift(x, 5.0))))
    ok = all(e <= 5e-3 for e in errs.values())
    acceptance(4, "long-time oracle", ok,
               "sup|u(x,5) - r(x) 5 - w(x)| = " + ", ".join(f"{e:.1e} (alpha={a})" for a, e in errs.items()) + ", bound 5e-3")
    assert ok


def test_criterion_05_no_crack_equivalence(acceptance):
    errs = {}
    for eps in (0.2, 1.0):
        p = validate_params(0.0, 0.0, eps)
        d = run_direct(DirectRunConfig(p, 400, 4))
        h = run_fixed_point(FixedPointRunConfig(p, n=200))
        x, u_avg, _ = y_profile(d.final)
        errs[eps] = float(np.linalg.norm(u_avg - h.final.values) / np.linalg.norm(h.final.values))
        errs[f"{eps}+"] = epsilon_error(d.final, h.final, T1)
    ok = all(e <= 1e-6 for e in errs.values())
    acceptance(5, "alpha = 0 equivalence", ok, f"max relative L2 {max(errs.values()):.1e}, bound 1e-6")
    assert ok


def test_criterion_06_epsilon_convergence(acceptance):
    eps = [0.4, 0.2, 0.1, 0.05]
    table, fit = sweep_epsilon(SweepConfig(alpha=0.1, nx=400), eps)
    fine, fit_fine = sweep_epsilon(SweepConfig(alpha=0.1, nx=800), eps)
    err = table.errors
    decreasing = bool(np.all(np.diff(err) < 0))
    ratios = err[:-1] / err[1:]
    regime = set(fit.regime)
    in_regime = [r for e0, e1, r in zip(eps, eps[1:], ratios) if e0 in regime and e1 in regime]
    ratios_ok = bool(in_regime) and all(1.6 <= r <= 2.4 for r in in_regime)
    floor, floor_fine = float(err[-1]), float(fine.errors[-1])
    ok = decreasing and ratios_ok and floor_fine < floor
    acceptance(6, "epsilon convergence", ok,
               f"err {np.array2string(err, precision=3)}, ratios {np.array2string(ratios, precision=2)}, "
               f"pre-floor regime {sorted(regime, reverse=True)}, floor {floor:.2e} -> {floor_fine:.2e} at h/2 "
               f"(intercepts {fit.intercept:.1e} -> {fit_fine.intercept:.1e})")
    assert ok


def test_criterion_07_y_independence(acceptance):
    spreads = {}
    rel = None
    for eps in (1.0, 0.5, 0.2, 0.02):
        d = run_direct(DirectRunConfig(validate_params(0.1, 0.0, eps), 400, sweep_ny(0.1, eps, 400)))
        s = y_spread(d.final)
        spreads[eps] = float(s.max())
        if eps == 0.02:
            rel = float(s.max() / (d.final.values.max() - d.final.values.min()))
    vals = list(spreads.values())
    monotone = all(b < a for a, b in zip(vals, vals[1:]))
    ok = monotone and rel <= 0.01
    acceptance(7, "y-independence onset", ok,
               f"spread/range at eps=0.02 {rel:.1e} (bound 1e-2); max spreads "
               + ", ".join(f"{e:g}:{v:.1e}" for e, v in spreads.items()))
    assert ok


def test_criterion_08_weak_vs_fixed_point(acceptance):
    dist, res = {}, {}
    for a in (0.1, 0.6):
        p = validate_params(a)
        fp = _fp(a)
        wk = run_weak(WeakRunConfig(p, n=800))
        dist[a] = _l2_away(fp.final.grid.nodes, fp.final.values, wk.final.grid.nodes, wk.final.values)
        rf, rw = transmission_residuals(fp), transmission_residuals(wk)
        res[a] = (
            max(np.abs(rf["jump_u"]).max(), np.abs(rf["jump_flux"]).max()),
            max(np.abs(rw["jump_u"]).max(), np.abs(rw["jump_flux"]).max()),
        )
    ok = dist[0.1] <= 0.02 and dist[0.6] > dist[0.1] and all(w > f for f, w in res.values())
    acceptance(8, "weak vs fixed point", ok,
               f"L2 on |x|>0.1: {dist[0.1]:.2e} (alpha=0.1, bound 2e-2), {dist[0.6]:.2e} (alpha=0.6); "
               "max residual fp/weak " + ", ".join(f"{f:.1e}/{w:.1e}" for f, w in res.values()))
    assert ok


def test_criterion_09_profile_variant(acceptance):
    p = validate_params(0.1, 0.0, 1.0, "profile", "linear")
    n = 800
    tr = run_profile_variant(WeakRunConfig(p, n=n))
    dev = energy_audit(tr, 1.0)
    r = transmission_residuals(tr)
    h = 2.0 / n
    unorm = float(np.abs(tr.final.values).max())
    ju, jf = float(np.abs(r["jump_u"][-1])), float(np.abs(r["jump_flux"][-1]))
    ok = dev <= 1e-8 and ju <= 10 * h * unorm and jf <= 10 * h * unorm
    acceptance(9, "profile variant", ok,
               f"rate deviation {dev:.1e}; jumps u {ju:.1e}, u_x {jf:.1e} vs 10 h |u| = {10 * h * unorm:.1e}")
    assert ok


def test_criterion_10_properties(acceptance, tmp_path):
    checks = {}
    d = run_direct(DirectRunConfig(validate_params(0.3, 0.1, 0.5), 200, 20))
    fp = _fp(0.3, 0.1, n=100)
    pv = run_profile_variant(WeakRunConfig(validate_params(0.1, 0.0, 1.0, "profile", "linear"), n=200))
    checks["nonnegative"] = min(d.meta["min_value"], fp.meta["min_value"], pv.meta["min_value"]) >= -1e-12
    checks["mirror"] = all(np.abs(mirror_y(s) - s.values).max() <= 1e-12 * np.abs(s.values).max() for s in d.snapshots)

    args = ["run", "--mode", "compare", "--alpha", "0.1", "--epsilon", "0.2", "--nx", "40", "--t-end", "0.05"]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert main([*args, "--out", str(tmp_path / "b")]) == 0
    files = sorted((tmp_path / "a").rglob("*.csv"))
    checks["deterministic"] = bool(files) and all(
        f.read_bytes() == (tmp_path / "b" / f.relative_to(tmp_path / "a")).read_bytes() for f in files
    )

    # extrapolated flux against the fully iterated one, on a non-trivial state
    p = validate_params(0.1)
    pair, F = SubdomainPair.zeros(400), 0.0
    for _ in range(20):
        pair, st = coupled_step(pair, 1e-3, p, F)
        F = st.F_next
    _, plain = coupled_step(pair, 1e-3, p, F, tol=1e-12, max_iter=2000)
    _, acc = coupled_step(pair, 1e-3, p, F, accelerate=True)
    f_star = acc.iterates[2]
    acc_err = abs(f_star - plain.F_next) / abs(plain.F_next)
    fa, fb = _fp(0.1, n=100, accelerate=True), _fp(0.1, n=100)
    run_err = float(np.max(np.abs(fa.interface["F"] - fb.interface["F"]) / np.abs(fb.interface["F"])))
    checks["acceleration"] = acc_err <= 1e-8 and run_err <= 1e-8

    ok = all(checks.values())
    acceptance(10, "property suite", ok,
               ", ".join(f"{k}={'ok' if v else 'FAILED'}" for k, v in checks.items())
               + f" (F* rel err {acc_err:.1e}, run F rel diff {run_err:.1e})")
    assert ok
