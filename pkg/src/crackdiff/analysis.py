"""Metrics and oracles for comparing the cracked and homogenized solutions."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .direct import DirectRunConfig, run_direct
from .errors import BetaUnsupported, DomainMismatch, InsufficientPoints, ZeroDenominator
from .fixed_point import FixedPointRunConfig, run_fixed_point
from .fv import Field
from .grid import CrackedGrid, IntervalGrid, alignment_modulus
from .params import validate_params
from .trajectory import Trajectory

logger = logging.getLogger(__name__)

DRIFT_CHECK_TOL = 1e-12


# ---------------------------------------------------------------- drift oracle


@dataclass(frozen=True)
class DriftProfile:
    """Long-time shape of the homogenized solution for beta = 0, u0 = 0.

    For large t, u(x, t) ~ r(x) t + w(x) with r = c on (0, 1), r = (1 - alpha) c
    on (-1, 0) and c = 1/(2 - alpha). Writing

        w+(x) = c (x^2/2 - x) + C+,
        w-(x) = a2 x^2 - c x + (1 - alpha) C+,  a2 = ((1 - alpha) c - alpha) / 2,

    the stationary-drift problem fixes every coefficient except C+, which the
    mass law int u = t pins down through int w = 0. At alpha = 0 both sides
    reduce to x^2/4 - x/2 - 1/12.
    """

    alpha: float
    c: float
    a2_minus: float
    c_plus: float
    beta: float = 0.0

    @property
    def rate_plus(self) -> float:
        return self.c

    @property
    def rate_minus(self) -> float:
        return (1.0 - self.alpha) * self.c

    def w_plus(self, x):
        x = np.asarray(x, dtype=float)
        return self.c * (0.5 * x**2 - x) + self.c_plus

    def w_minus(self, x):
        x = np.asarray(x, dtype=float)
        return self.a2_minus * x**2 - self.c * x + (1.0 - self.alpha) * self.c_plus

    def dw_plus(self, x):
        return self.c * (np.asarray(x, dtype=float) - 1.0)

    def dw_minus(self, x):
        return 2.0 * self.a2_minus * np.asarray(x, dtype=float) - self.c

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, self.w_minus(x), self.w_plus(x))

    def rate(self, x):
        return np.where(np.asarray(x) < 0, self.rate_minus, self.rate_plus)

    def drift(self, x, t: float):
        """Predicted u(x, t) for t beyond the transient."""
        return self.rate(x) * t + self(x)

    def mean_zero_residual(self) -> float:
        # three Gauss points are exact for the quadratic pieces
        lo, _ = integrate.fixed_quad(self.w_minus, -1.0, 0.0, n=3)
        hi, _ = integrate.fixed_quad(self.w_plus, 0.0, 1.0, n=3)
        return lo + hi

    def check(self) -> dict:
        a = self.alpha
        res = {
            "integral": self.mean_zero_residual(),
            "value_jump": float(self.w_minus(0.0) - (1 - a) * self.w_plus(0.0)),
            "slope_jump": float(self.dw_minus(0.0) - self.dw_plus(0.0)),
            "left_flux": float(-self.dw_minus(-1.0) - (1 - a)),
            "right_flux": float(self.dw_plus(1.0)),
        }
        bad = {k: v for k, v in res.items() if abs(v) > DRIFT_CHECK_TOL}
        if bad:
            raise ArithmeticError(f"drift profile self-check failed: {bad}")
        return res


def drift_profile(alpha: float, beta: float = 0.0) -> DriftProfile:
    if beta != 0.0:
        raise BetaUnsupported("the closed-form drift profile is derived for beta = 0")
    validate_params(alpha, 0.0, 1.0)
    c = 1.0 / (2.0 - alpha)
    prof = DriftProfile(
        alpha=float(alpha),
        c=c,
        a2_minus=0.5 * ((1.0 - alpha) * c - alpha),
        c_plus=-(1.0 - alpha) / (6.0 * (2.0 - alpha)),
    )
    prof.check()
    return prof


# ------------------------------------------------------------- projection


@dataclass(frozen=True, eq=False)
class RegionField:
    """Values on a subset of the active cells of a cracked grid."""

    grid: CrackedGrid
    cells: np.ndarray
    values: np.ndarray

    def l2(self) -> float:
        return math.sqrt(float(np.sum(self.values**2)) * self.grid.hx * self.grid.hy)


def region_cells(grid: CrackedGrid, side: str = "plus") -> np.ndarray:
    if side == "plus":
        return np.flatnonzero(grid.cell_x > 0)
    if side == "minus":
        return np.flatnonzero(grid.cell_x < 0)
    raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")


def _side_nodes(u_1d: Field, side: str) -> tuple[np.ndarray, np.ndarray]:
    g = u_1d.grid
    if not isinstance(g, IntervalGrid):
        raise DomainMismatch("homogenized field must live on an interval grid")
    x = g.nodes
    tol = 1e-12
    if side == "plus":
        if g.a > tol or g.b < 1.0 - tol:
            raise DomainMismatch(f"1-D field on ({g.a}, {g.b}) does not cover (0, 1)")
        keep = x >= -tol
    else:
        if g.a > -1.0 + tol or g.b < -tol:
            raise DomainMismatch(f"1-D field on ({g.a}, {g.b}) does not cover (-1, 0)")
        keep = x <= tol
    return x[keep], u_1d.values[keep]


def project_homog_to_cracked(u_1d: Field, grid: CrackedGrid, side: str = "plus") -> RegionField:
    """Piecewise-linear interpolation of u(x) at the active cell centers of one side.

    Only 1-D nodes on the requested side are used, so the interface jump is
    never smeared into the projection.
    """
    xs, us = _side_nodes(u_1d, side)
    cells = region_cells(grid, side)
    return RegionField(grid, cells, np.interp(grid.cell_x[cells], xs, us))


def _check_times(u_direct: Field, u_homog: Field, t1) -> None:
    if abs(u_direct.time - u_homog.time) > 1e-9:
        raise ValueError(f"fields at different times: {u_direct.time} vs {u_homog.time}")
    if t1 is not None and abs(u_direct.time - t1) > 1e-9:
        raise ValueError(f"fields are at t={u_direct.time}, expected t1={t1}")


def epsilon_error(u_direct: Field, u_homog: Field, t1: float | None = None) -> float:
    """Relative L2 distance on the crack-free half x > 0."""
    _check_times(u_direct, u_homog, t1)
    proj = project_homog_to_cracked(u_homog, u_direct.grid, "plus")
    ref = u_direct.values[proj.cells]
    den = float(np.sqrt(np.sum(ref**2)))
    if den == 0.0:
        raise ZeroDenominator(f"direct field vanishes on x > 0 at t={u_direct.time}")
    return float(np.sqrt(np.sum((proj.values - ref) ** 2)) / den)


def epsilon_error_minus(u_direct: Field, u_homog: Field, alpha: float, t1: float | None = None) -> float:
    """Companion metric on the cracked half: material values against u/(1 - alpha)."""
    _check_times(u_direct, u_homog, t1)
    proj = project_homog_to_cracked(u_homog, u_direct.grid, "minus")
    ref = u_direct.values[proj.cells]
    den = float(np.sqrt(np.sum(ref**2)))
    if den == 0.0:
        raise ZeroDenominator(f"direct field vanishes on x < 0 at t={u_direct.time}")
    return float(np.sqrt(np.sum((proj.values / (1.0 - alpha) - ref) ** 2)) / den)


# ------------------------------------------------------------ trajectory audits


def transmission_residuals(trajectory: Trajectory) -> dict[str, np.ndarray]:
    """Per-step jumps u(0-) - (1-alpha) u(0+) and u_x(0-) - u_x(0+) - beta.

    Models without interface terms (approximate and profile variants) are
    measured against plain continuity instead.
    """
    if trajectory.interface is None:
        raise ValueError(f"{trajectory.kind} trajectory carries no interface data")
    p = trajectory.meta["config"]["params"]
    alpha, beta = p["alpha"], p["beta"]
    if trajectory.meta.get("interface_law") == "continuity":
        alpha, beta = 0.0, 0.0
    itf = trajectory.interface
    return {
        "t": itf["t"],
        "jump_u": itf["u0minus"] - (1.0 - alpha) * itf["u0plus"],
        "jump_flux": itf["dxu0minus"] - itf["dxu0plus"] - beta,
        "scale": np.maximum(1.0, np.abs(itf["u0plus"])),
    }


def energy_audit(trajectory: Trajectory, expected_rate: float | None = None) -> float:
    """max over steps of |dM/dt - expected_rate|."""
    if expected_rate is None:
        expected_rate = trajectory.meta["expected_mass_rate"]
    rates = np.diff(trajectory.mass) / np.diff(trajectory.times)
    return float(np.max(np.abs(rates - expected_rate)))


# ------------------------------------------------------------------ sweeps


@dataclass(frozen=True)
class ErrorRow:
    epsilon: float
    nx: int
    ny: int
    err: float
    err_minus: float | None = None


@dataclass(frozen=True)
class ErrorTable:
    rows: tuple[ErrorRow, ...]
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        eps = [r.epsilon for r in self.rows]
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError(f"epsilons must be strictly decreasing, got {eps}")
        if any(not r.err >= 0 for r in self.rows):
            raise ValueError("negative or NaN error in table")

    @property
    def epsilons(self) -> np.ndarray:
        return np.array([r.epsilon for r in self.rows])

    @property
    def errors(self) -> np.ndarray:
        return np.array([r.err for r in self.rows])


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    regime: tuple[float, ...]  # epsilons used in the fit
    floor_threshold: float

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "regime": list(self.regime),
            "floor_threshold": self.floor_threshold,
        }


@dataclass(frozen=True)
class SweepConfig:
    alpha: float = 0.1
    beta: float = 0.0
    nx: int = 400
    dt: float = 1e-3
    t_end: float = 0.5
    with_minus: bool = False
    tol: float = 1e-10


def sweep_ny(alpha: float, epsilon: float, nx: int) -> int:
    """Smallest multiple of the alignment modulus with hy <= hx."""
    m = alignment_modulus(alpha)
    hx = 2.0 / nx
    k = max(1, math.ceil(epsilon / (hx * m) - 1e-9))
    return k * m


def fit_pre_floor(table: ErrorTable) -> LinearFit:
    """Least-squares err = slope * eps + intercept over rows with err > 3 * min(err)."""
    eps, err = table.epsilons, table.errors
    if len(eps) < 3:
        raise InsufficientPoints(f"need at least 3 epsilon values, got {len(eps)}")
    thr = 3.0 * float(err.min())
    mask = err > thr
    if mask.sum() < 2:
        mask = np.ones_like(mask)
    A = np.column_stack([eps[mask], np.ones(mask.sum())])
    (slope, intercept), *_ = np.linalg.lstsq(A, err[mask], rcond=None)
    return LinearFit(float(slope), float(intercept), tuple(float(e) for e in eps[mask]), thr)


def _sweep_one(args) -> ErrorRow:
    cfg, eps, u_homog = args
    params = validate_params(cfg.alpha, cfg.beta, eps)
    ny = sweep_ny(cfg.alpha, eps, cfg.nx)
    traj = run_direct(DirectRunConfig(params, cfg.nx, ny, cfg.dt, cfg.t_end))
    err = epsilon_error(traj.final, u_homog, cfg.t_end)
    err_m = epsilon_error_minus(traj.final, u_homog, cfg.alpha, cfg.t_end) if cfg.with_minus else None
    logger.info("eps=%g nx=%d ny=%d err=%.4e", eps, cfg.nx, ny, err)
    return ErrorRow(float(eps), cfg.nx, ny, err, err_m)


def sweep_epsilon(cfg: SweepConfig, eps_list, workers: int = 1) -> tuple[ErrorTable, LinearFit]:
    """Direct runs over ``eps_list`` against one homogenized run at matched hx."""
    eps_list = sorted((float(e) for e in eps_list), reverse=True)
    if len(eps_list) < 3:
        raise InsufficientPoints(f"need at least 3 epsilon values, got {len(eps_list)}")
    if cfg.nx % 2:
        raise ValueError("nx must be even")
    params = validate_params(cfg.alpha, cfg.beta, eps_list[0])
    homog = run_fixed_point(FixedPointRunConfig(params, n=cfg.nx // 2, dt=cfg.dt, t_end=cfg.t_end, tol=cfg.tol))
    jobs = [(cfg, e, homog.final) for e in eps_list]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_one, jobs))  # map keeps input order
    else:
        rows = [_sweep_one(j) for j in jobs]
    table = ErrorTable(
        tuple(rows),
        {"alpha": cfg.alpha, "beta": cfg.beta, "t1": cfg.t_end, "dt": cfg.dt, "nx": cfg.nx, "n_1d": cfg.nx // 2},
    )
    return table, fit_pre_floor(table)
