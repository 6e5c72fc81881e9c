"""Single-domain homogenized formulations with P1 elements on (-1, 1).

Three models share one assembly:

``full_weak``
    the weak form with the interface value jump written as a dipole at x = 0,
    regularized over (0, delta):  ... - (alpha/delta) * int_0^delta u v' dx,
    plus a point load beta at x = 0 and the source alpha - beta on x < 0;
``approx_small_alpha``
    source alpha on x < 0 and no interface terms;
``profile_variant``
    source 2 f(x) on x < 0 for a crack-wall profile f with int f = alpha/2.

All three use influx 1 - alpha at x = -1, zero flux at x = 1, consistent mass
and backward Euler. The dipole term is assembled implicitly, so the system is
a nonsymmetric tridiagonal matrix factored once per run.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy.linalg import lapack

from .errors import BetaUnsupported, DeltaMisaligned, InconsistentMode, ProfileMassMismatch, SolverDivergence
from .fv import Field
from .grid import IntervalGrid, build_interval_grid
from .params import PROFILE_MASS_TOL, ParamSet, WallProfile
from .trajectory import INTERFACE_COLUMNS, Trajectory, snapshot_steps, step_count

WeakModel = Literal["full_weak", "approx_small_alpha", "profile_variant"]

_GX, _GW = np.polynomial.legendre.leggauss(3)


@dataclass(frozen=True)
class WeakRunConfig:
    params: ParamSet
    n: int = 800  # elements on (-1, 1)
    dt: float = 1e-3
    t_end: float = 0.5
    delta: float | None = None  # defaults to 2h
    model: WeakModel = "full_weak"
    snapshot_times: tuple[float, ...] | None = None
    probe_x: tuple[float, ...] = (0.5,)

    @property
    def h(self) -> float:
        return 2.0 / self.n

    @property
    def resolved_delta(self) -> float:
        return 2.0 * self.h if self.delta is None else float(self.delta)

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "n": self.n,
            "dt": self.dt,
            "t_end": self.t_end,
            "model": self.model,
            "dirac_delta": self.resolved_delta if self.model == "full_weak" else None,
            "snapshot_times": list(self.snapshot_times or (self.t_end,)),
            "probe_x": list(self.probe_x),
        }


def _delta_cells(grid: IntervalGrid, delta: float) -> int:
    m = delta / grid.h
    mi = int(round(m))
    if abs(m - mi) > 1e-9 or mi < 1:
        raise DeltaMisaligned(f"delta={delta} must be a positive multiple of h={grid.h}")
    if delta > 0.25 + 1e-12:
        raise DeltaMisaligned(f"delta={delta} exceeds 0.25")
    return mi


@dataclass(frozen=True, eq=False)
class P1System:
    """Assembled P1 operators; tridiagonals stored as (lower, diag, upper)."""

    grid: IntervalGrid
    dt: float
    mass: tuple[np.ndarray, np.ndarray, np.ndarray]
    matrix: tuple[np.ndarray, np.ndarray, np.ndarray]
    load: np.ndarray
    interface: int  # vertex index of x = 0
    plus_trace: int  # vertex read as u(0+)

    def apply_mass(self, u: np.ndarray) -> np.ndarray:
        lo, d, up = self.mass
        out = d * u
        out[1:] += lo * u[:-1]
        out[:-1] += up * u[1:]
        return out

    def apply_matrix(self, u: np.ndarray) -> np.ndarray:
        lo, d, up = self.matrix
        out = d * u
        out[1:] += lo * u[:-1]
        out[:-1] += up * u[1:]
        return out


def assemble_p1(
    grid: IntervalGrid,
    dt: float,
    flux_left: float,
    source: Callable[[np.ndarray], np.ndarray] | None,
    point_load: float = 0.0,
    dipole_alpha: float = 0.0,
    delta: float | None = None,
) -> P1System:
    n, h = grid.n, grid.h
    N = n + 1
    i0 = grid.index_of(0.0)

    m_d = np.full(N, 2 * h / 3)
    m_d[[0, -1]] = h / 3
    m_off = np.full(n, h / 6)
    k_d = np.full(N, 2 / h)
    k_d[[0, -1]] = 1 / h
    k_off = np.full(n, -1 / h)

    lo = m_off / dt + k_off
    up = m_off / dt + k_off
    d = m_d / dt + k_d

    plus_trace = i0
    if dipole_alpha != 0.0:
        m = _delta_cells(grid, delta)
        c = dipole_alpha / (2.0 * delta)
        for k in range(i0, i0 + m):
            # element [x_k, x_k+1]: row k gets +c on (k, k+1), row k+1 gets -c
            d[k] += c
            up[k] += c
            lo[k] -= c
            d[k + 1] -= c
        plus_trace = i0 + m

    load = np.zeros(N)
    load[0] += flux_left
    load[i0] += point_load
    if source is not None:
        x = grid.nodes
        a, b = x[:-1], x[1:]
        pts = 0.5 * (a + b)[:, None] + 0.5 * h * _GX[None, :]
        s = np.asarray(source(pts), dtype=float)
        phi_r = (pts - a[:, None]) / h
        w = 0.5 * h * _GW[None, :]
        load[:-1] += (s * (1 - phi_r) * w).sum(axis=1)
        load[1:] += (s * phi_r * w).sum(axis=1)

    return P1System(grid, dt, (m_off, m_d, m_off), (lo, d, up), load, i0, plus_trace)


def _factor(system: P1System):
    lo, d, up = system.matrix
    dl, dd, du, du2, ipiv, info = lapack.dgttrf(lo, d, up)
    if info != 0:
        raise SolverDivergence(f"P1 system factorization failed (info={info})")
    return dl, dd, du, du2, ipiv


def _check_profile(params: ParamSet, f_alpha) -> Callable:
    if f_alpha is None:
        f_alpha = params.profile
    if f_alpha is None:
        raise InconsistentMode("profile_variant needs a wall profile")
    if isinstance(f_alpha, WallProfile):
        mass = f_alpha.integral()
    else:
        from scipy import integrate

        mass, _ = integrate.quad(lambda s: float(f_alpha(s)), -1.0, 0.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    if abs(mass - params.alpha / 2.0) > PROFILE_MASS_TOL:
        raise ProfileMassMismatch(f"profile integrates to {mass!r}; expected alpha/2 = {params.alpha / 2.0!r}")
    if abs(float(f_alpha(0.0))) > 1e-12:
        raise InconsistentMode("profile_variant needs f(0) = 0 (no interface singularity)")
    return f_alpha


def _build(config: WeakRunConfig, f_alpha=None) -> P1System:
    p = config.params
    grid = build_interval_grid(-1.0, 1.0, config.n, "vertex_p1")
    if config.model == "full_weak":
        rate = p.alpha - p.beta
        return assemble_p1(
            grid, config.dt, 1.0 - p.alpha,
            (lambda x: np.where(x < 0, rate, 0.0)) if rate else None,
            point_load=p.beta, dipole_alpha=p.alpha, delta=config.resolved_delta,
        )
    if p.beta != 0.0:
        raise BetaUnsupported(f"model {config.model!r} requires beta = 0")
    if config.model == "approx_small_alpha":
        a = p.alpha
        return assemble_p1(grid, config.dt, 1.0 - a, (lambda x: np.where(x < 0, a, 0.0)) if a else None)
    if config.model == "profile_variant":
        f = _check_profile(p, f_alpha)
        return assemble_p1(grid, config.dt, 1.0 - p.alpha, lambda x: np.where(x < 0, 2.0 * f(x), 0.0))
    raise InconsistentMode(f"unknown weak model {config.model!r}")


def p1_integral(grid: IntervalGrid, u: np.ndarray) -> float:
    return float(grid.h * (u.sum() - 0.5 * (u[0] + u[-1])))


def _run(config: WeakRunConfig, system: P1System) -> Trajectory:
    grid = system.grid
    factors = _factor(system)
    n_steps = step_count(config.t_end, config.dt)
    snaps = snapshot_steps(config.snapshot_times or (config.t_end,), config.dt, n_steps)
    x = grid.nodes
    h = grid.h
    i0, ip = system.interface, system.plus_trace
    alpha, beta = config.params.alpha, config.params.beta

    u = np.zeros(grid.n + 1)
    times, mass = [0.0], [0.0]
    probe = [list(np.interp(config.probe_x, x, u))]
    snapshots = [Field(grid, u, 0.0)] if 0 in snaps else []
    cols = {k: [] for k in INTERFACE_COLUMNS}
    min_value = 0.0
    max_res = 0.0
    for k in range(1, n_steps + 1):
        rhs = system.apply_mass(u) / config.dt + system.load
        u_new, info = lapack.dgttrs(*factors, rhs)
        if info != 0 or not np.all(np.isfinite(u_new)):
            raise SolverDivergence(f"P1 solve failed at step {k}")
        res = np.linalg.norm(system.apply_matrix(u_new) - rhs) / np.linalg.norm(rhs)
        max_res = max(max_res, float(res))
        u = u_new
        t = k * config.dt
        times.append(t)
        mass.append(p1_integral(grid, u))
        probe.append(list(np.interp(config.probe_x, x, u)))
        min_value = min(min_value, float(u.min()))
        dx_minus = (u[i0] - u[i0 - 1]) / h
        dx_plus = (u[ip + 1] - u[ip]) / h
        cols["t"].append(t)
        cols["F"].append(-dx_plus)
        cols["u0minus"].append(u[i0])
        cols["u0plus"].append(u[ip])
        cols["dxu0minus"].append(dx_minus)
        cols["dxu0plus"].append(dx_plus)
        cols["iters"].append(0)
        cols["last_ratio"].append(np.nan)
        if k in snaps:
            snapshots.append(Field(grid, u, t))

    times_a, mass_a = np.array(times), np.array(mass)
    interface = {key: np.array(v, dtype=float) for key, v in cols.items()}
    if config.model != "full_weak":
        alpha, beta = 0.0, 0.0  # u and u_x continuous at x = 0
    jump_u = interface["u0minus"] - (1 - alpha) * interface["u0plus"]
    jump_flux = interface["dxu0minus"] - interface["dxu0plus"] - beta
    meta = {
        "config": config.as_dict(),
        "model": config.model,
        "interface_law": "transmission" if config.model == "full_weak" else "continuity",
        "dirac_delta": config.resolved_delta if config.model == "full_weak" else None,
        "expected_mass_rate": 1.0,
        "max_mass_rate_deviation": float(np.max(np.abs(np.diff(mass_a) / np.diff(times_a) - 1.0))),
        "max_linear_residual": max_res,
        "min_value": min_value,
        "max_abs_jump_u": float(np.max(np.abs(jump_u))),
        "max_abs_jump_flux": float(np.max(np.abs(jump_flux))),
    }
    return Trajectory(
        kind=config.model,
        times=times_a,
        mass=mass_a,
        probe=np.array(probe),
        probe_x=tuple(config.probe_x),
        snapshots=snapshots,
        final=Field(grid, u, times_a[-1]),
        interface=interface,
        meta=meta,
    )


def run_weak(config: WeakRunConfig) -> Trajectory:
    if config.model != "full_weak":
        raise InconsistentMode(f"run_weak needs model 'full_weak', got {config.model!r}")
    return _run(config, _build(config))


def run_approx(config: WeakRunConfig) -> Trajectory:
    if config.model != "approx_small_alpha":
        config = WeakRunConfig(**{**config.__dict__, "model": "approx_small_alpha"})
    return _run(config, _build(config))


def run_profile_variant(config: WeakRunConfig, f_alpha=None) -> Trajectory:
    if config.model != "profile_variant":
        config = WeakRunConfig(**{**config.__dict__, "model": "profile_variant"})
    return _run(config, _build(config, f_alpha))
