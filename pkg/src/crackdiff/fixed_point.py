"""Homogenized two-subdomain model solved by Dirichlet-Neumann iteration.

Within each backward-Euler step the interface flux F is iterated:

1. solve (0, 1) with outward derivative F at x = 0,
2. take g = (1 - alpha) * trace of that solution at x = 0,
3. solve (-1, 0) with u = g at x = 0,
4. F <- beta - du/dx(0-) of the (-1, 0) solution.

On mirrored grids the map F -> F' is affine with slope exactly -(1 - alpha),
which is what the contraction diagnostics and the optional closed-form
extrapolation rely on.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergence
from .fv import (
    DEFAULT_RTOL,
    BoundaryData,
    Field,
    StepSystem,
    assemble_step_system,
    boundary_loads,
    face_flux_dirichlet,
    face_trace,
    step,
    step_rhs,
)
from .grid import build_interval_grid
from .params import ParamSet
from .trajectory import INTERFACE_COLUMNS, Trajectory, snapshot_steps, step_count

logger = logging.getLogger(__name__)

FLUX_FLOOR = 1e-12
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 500


@dataclass(frozen=True)
class SubdomainPair:
    minus: Field  # on (-1, 0)
    plus: Field  # on (0, 1)

    def __post_init__(self) -> None:
        if abs(self.minus.time - self.plus.time) > 1e-12:
            raise ValueError("subdomain fields carry different times")
        if self.minus.grid.n != self.plus.grid.n:
            raise ValueError("subdomain grids must mirror each other (same cell count)")

    @property
    def time(self) -> float:
        return self.plus.time

    @classmethod
    def zeros(cls, n: int) -> "SubdomainPair":
        return cls(
            Field.constant(build_interval_grid(-1.0, 0.0, n)),
            Field.constant(build_interval_grid(0.0, 1.0, n)),
        )

    def concatenated(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.concatenate([self.minus.grid.nodes, self.plus.grid.nodes]),
            np.concatenate([self.minus.values, self.plus.values]),
        )

    def integral(self) -> float:
        return self.minus.integral() + self.plus.integral()


@dataclass
class InterfaceState:
    """Interface data and iteration history of one coupled step.

    ``F`` is the flux behind the returned (0, 1) solution, ``g`` the value
    imposed on the returned (-1, 0) solution and ``F_next`` the last update,
    used as the warm start of the next step.
    """

    F: float
    g: float
    F_next: float
    iterates: list[float] = field(default_factory=list)
    ratios: list[float] = field(default_factory=list)
    differences: list[float] = field(default_factory=list)  # signed, plain iterates only
    accelerated: bool = False

    @property
    def iterations(self) -> int:
        """Number of subdomain sweeps (extrapolated values are not counted)."""
        return len(self.iterates) - 1 - int(self.accelerated)

    @property
    def last_ratio(self) -> float:
        return self.ratios[-1] if self.ratios else float("nan")

    def signed_ratios(self) -> list[float]:
        d = self.differences
        return [b / a for a, b in zip(d[:-1], d[1:]) if a != 0.0]

    def significant_ratios(self, rel: float = 1e-4) -> list[float]:
        """Ratios whose denominator exceeds ``rel * max(|F|, FLUX_FLOOR)``.

        Smaller differences are dominated by rounding in F itself.
        """
        floor = rel * max(abs(self.F_next), FLUX_FLOOR)
        d = self.differences
        return [abs(b / a) for a, b in zip(d[:-1], d[1:]) if abs(a) >= floor]


def plus_system(pair_or_n, dt: float) -> StepSystem:
    grid = pair_or_n.plus.grid if isinstance(pair_or_n, SubdomainPair) else build_interval_grid(0.0, 1.0, pair_or_n)
    return assemble_step_system(grid, dt)


def minus_system(pair_or_n, dt: float) -> StepSystem:
    grid = pair_or_n.minus.grid if isinstance(pair_or_n, SubdomainPair) else build_interval_grid(-1.0, 0.0, pair_or_n)
    return assemble_step_system(grid, dt, dirichlet_tags=("right",))


def step_plus(prev_plus: Field, F: float, dt: float, system: StepSystem | None = None, rtol: float = DEFAULT_RTOL) -> Field:
    """One step on (0, 1) with du/dn = F at x = 0 (outward normal -x) and du/dn = 0 at x = 1."""
    if system is None:
        system = assemble_step_system(prev_plus.grid, dt)
    bc = BoundaryData(flux_by_tag={"left": float(F), "right": 0.0})
    return step(prev_plus, system, bc, 0.0, rtol)


def step_minus(
    prev_minus: Field,
    g: float,
    dt: float,
    params: ParamSet,
    system: StepSystem | None = None,
    rtol: float = DEFAULT_RTOL,
) -> Field:
    """One step on (-1, 0): source alpha - beta, influx 1 - alpha at x = -1, u = g at x = 0."""
    if system is None:
        system = assemble_step_system(prev_minus.grid, dt, dirichlet_tags=("right",))
    bc = BoundaryData(flux_by_tag={"left": 1.0 - params.alpha}, dirichlet={"right": float(g)})
    return step(prev_minus, system, bc, params.alpha - params.beta, rtol)


def coupled_step(
    pair: SubdomainPair,
    dt: float,
    params: ParamSet,
    F_init: float = 0.0,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    accelerate: bool = False,
    systems: tuple[StepSystem, StepSystem] | None = None,
    rtol: float = DEFAULT_RTOL,
) -> tuple[SubdomainPair, InterfaceState]:
    """Advance both subdomains one step, iterating the interface flux to ``tol``.

    Stops when |F' - F| <= tol * max(|F|, FLUX_FLOOR). With ``accelerate`` the
    first update is followed by the closed-form limit F0 + (F1 - F0)/(2 - alpha)
    and a confirmation iteration. For alpha = 0 the plain map is an isometry
    and never settles, so the extrapolation is always used there.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if systems is None:
        systems = (plus_system(pair, dt), minus_system(pair, dt))
    sys_plus, sys_minus = systems
    alpha, beta = params.alpha, params.beta
    accelerate = accelerate or alpha == 0.0

    # Both subdomain right-hand sides are affine in the interface datum, so
    # each sweep only adds a multiple of a fixed load vector before solving.
    plus_grid, minus_grid = pair.plus.grid, pair.minus.grid
    r_plus = step_rhs(pair.plus, sys_plus, BoundaryData({"left": 0.0, "right": 0.0}))
    e_plus = boundary_loads(plus_grid, BoundaryData({"left": 1.0, "right": 0.0}))
    minus_bc0 = BoundaryData({"left": 1.0 - alpha}, {"right": 0.0})
    r_minus = step_rhs(pair.minus, sys_minus, minus_bc0, alpha - beta)
    e_minus = step_rhs(Field.constant(minus_grid), sys_minus, BoundaryData({"left": 0.0}, {"right": 1.0}))
    half_h = plus_grid.h / 2.0

    def sweep(F: float):
        rhs_p = r_plus + F * e_plus
        up = sys_plus.solve_tridiagonal(rhs_p)
        g = (1.0 - alpha) * (up[0] + half_h * F)
        rhs_m = r_minus + g * e_minus
        um = sys_minus.solve_tridiagonal(rhs_m)
        dxu_minus = (g - um[-1]) / half_h
        return (up, rhs_p), g, (um, rhs_m), beta - dxu_minus

    F = float(F_init)
    iterates = [F]
    diffs: list[float] = []  # plain differences since the last extrapolation
    ratios: list[float] = []
    used_extrapolation = False
    for _ in range(max_iter):
        plus, g, minus, F_new = sweep(F)
        iterates.append(F_new)
        diffs.append(F_new - F)
        if len(diffs) >= 2 and diffs[-2] != 0.0:
            ratios.append(abs(diffs[-1] / diffs[-2]))
        if abs(F_new - F) <= tol * max(abs(F), FLUX_FLOOR):
            sys_plus.residual_ok(*plus, rtol)
            sys_minus.residual_ok(*minus, rtol)
            t_new = pair.time + dt
            out = SubdomainPair(Field(minus_grid, minus[0], t_new), Field(plus_grid, plus[0], t_new))
            state = InterfaceState(F, g, F_new, iterates, ratios, diffs, used_extrapolation)
            return out, state
        if accelerate and not used_extrapolation:
            F_new = F + (F_new - F) / (2.0 - alpha)
            iterates.append(F_new)
            diffs = []
            used_extrapolation = True
        F = F_new
    last = ratios[-1] if ratios else None
    raise NoConvergence(
        f"interface flux not converged after {max_iter} iterations (alpha={alpha}, last ratio {last})",
        max_iter,
        last,
    )


@dataclass(frozen=True)
class FixedPointRunConfig:
    params: ParamSet
    n: int = 400  # cells per unit length on each subdomain
    dt: float = 1e-3
    t_end: float = 0.5
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    accelerate: bool = False
    snapshot_times: tuple[float, ...] | None = None
    probe_x: tuple[float, ...] = (0.5,)
    rtol: float = DEFAULT_RTOL

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "n": self.n,
            "dt": self.dt,
            "t_end": self.t_end,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "accelerate": self.accelerate,
            "snapshot_times": list(self.snapshot_times or (self.t_end,)),
            "probe_x": list(self.probe_x),
            "rtol": self.rtol,
            "flux_floor": FLUX_FLOOR,
        }


def concatenated_field(pair: SubdomainPair) -> Field:
    """The (-1, 1) cell-centered field made of both subdomains."""
    n = pair.minus.grid.n
    grid = build_interval_grid(-1.0, 1.0, 2 * n)
    return Field(grid, np.concatenate([pair.minus.values, pair.plus.values]), pair.time)


def run_fixed_point(config: FixedPointRunConfig) -> Trajectory:
    params = config.params
    pair = SubdomainPair.zeros(config.n)
    systems = (plus_system(pair, config.dt), minus_system(pair, config.dt))
    n_steps = step_count(config.t_end, config.dt)
    snaps = snapshot_steps(config.snapshot_times or (config.t_end,), config.dt, n_steps)
    x_all, _ = pair.concatenated()
    probe_idx = [int(np.argmin(np.abs(x_all - xp))) for xp in config.probe_x]
    h = pair.plus.grid.h

    times = [0.0]
    mass = [pair.integral()]
    probe = [[0.0] * len(probe_idx)]
    snapshots = [concatenated_field(pair)] if 0 in snaps else []
    cols = {k: [] for k in INTERFACE_COLUMNS}
    min_ratio, max_ratio = np.inf, -np.inf
    min_value = 0.0
    F = 0.0
    for k in range(1, n_steps + 1):
        pair, state = coupled_step(
            pair, config.dt, params, F, config.tol, config.max_iter, config.accelerate, systems, config.rtol
        )
        t = k * config.dt
        pair = SubdomainPair(Field(pair.minus.grid, pair.minus.values, t), Field(pair.plus.grid, pair.plus.values, t))
        F = state.F_next
        _, u = pair.concatenated()
        times.append(t)
        mass.append(float(u.sum() * h))
        probe.append([float(u[i]) for i in probe_idx])
        min_value = min(min_value, float(u.min()))
        cols["t"].append(t)
        cols["F"].append(state.F)
        cols["u0minus"].append(state.g)
        cols["u0plus"].append(face_trace(pair.plus, "left", state.F))
        cols["dxu0minus"].append(face_flux_dirichlet(pair.minus, "right", state.g))
        cols["dxu0plus"].append(-state.F)
        cols["iters"].append(state.iterations)
        cols["last_ratio"].append(state.last_ratio)
        if state.ratios:
            min_ratio = min(min_ratio, min(state.ratios))
            max_ratio = max(max_ratio, max(state.ratios))
        if k in snaps:
            snapshots.append(concatenated_field(pair))

    times_a, mass_a = np.array(times), np.array(mass)
    interface = {key: np.array(v, dtype=float) for key, v in cols.items()}
    meta = {
        "config": config.as_dict(),
        "expected_mass_rate": 1.0,
        "max_mass_rate_deviation": float(np.max(np.abs(np.diff(mass_a) / np.diff(times_a) - 1.0))),
        "total_iterations": int(interface["iters"].sum()),
        "max_iterations": int(interface["iters"].max()),
        "ratio_range": [float(min_ratio), float(max_ratio)] if np.isfinite(min_ratio) else None,
        "min_value": min_value,
    }
    return Trajectory(
        kind="fixed_point",
        times=times_a,
        mass=mass_a,
        probe=np.array(probe),
        probe_x=tuple(config.probe_x),
        snapshots=snapshots,
        final=concatenated_field(pair),
        interface=interface,
        meta=meta,
    )
