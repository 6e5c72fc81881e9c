"""Model parameters for the cracked slab and its homogenized limit."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy import integrate

from .errors import InconsistentMode, OutOfRange, ProfileMassMismatch

WallFluxMode = Literal["constant", "profile"]

PROFILE_MASS_TOL = 1e-12


@dataclass(frozen=True)
class WallProfile:
    """Spatially varying crack-wall influx density f(x) on -1 < x < 0.

    ``profile_id`` is ``"linear"`` (f(x) = -alpha*x) or ``"tabulated"``
    (piecewise-linear through ``nodes``/``values``).
    """

    profile_id: str
    alpha: float
    nodes: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.profile_id == "linear":
            return -self.alpha * x
        return np.interp(x, self.nodes, self.values)

    def integral(self) -> float:
        """Gauss quadrature of f over (-1, 0), split at the table nodes.

        Five points per piece integrate the piecewise-linear family exactly.
        """
        cuts = sorted({-1.0, 0.0, *(p for p in self.nodes if -1.0 < p < 0.0)})
        return float(sum(integrate.fixed_quad(self, a, b, n=5)[0] for a, b in zip(cuts, cuts[1:])))

    def as_dict(self) -> dict:
        out: dict = {"profile_id": self.profile_id}
        if self.profile_id == "tabulated":
            out["nodes"] = list(self.nodes)
            out["values"] = list(self.values)
        return out


def make_profile(profile_id: str, alpha: float, profile_params: dict | None = None) -> WallProfile:
    profile_params = profile_params or {}
    if profile_id == "linear":
        return WallProfile("linear", float(alpha))
    if profile_id == "tabulated":
        nodes = tuple(float(v) for v in profile_params["nodes"])
        values = tuple(float(v) for v in profile_params["values"])
        if len(nodes) != len(values) or len(nodes) < 2:
            raise InconsistentMode("tabulated profile needs matching nodes/values of length >= 2")
        if any(b <= a for a, b in zip(nodes, nodes[1:])):
            raise InconsistentMode("tabulated profile nodes must be strictly increasing")
        if nodes[0] > -1.0 or nodes[-1] < 0.0:
            raise InconsistentMode("tabulated profile must cover [-1, 0]")
        return WallProfile("tabulated", float(alpha), nodes, values)
    raise InconsistentMode(f"unknown profile_id {profile_id!r}")


@dataclass(frozen=True)
class ParamSet:
    """Validated physical parameters.

    alpha   crack width as a fraction of the period
    beta    fraction of the crack-mouth flux reaching the crack bottom
    epsilon period length in y
    """

    alpha: float
    beta: float
    epsilon: float
    wall_flux_mode: WallFluxMode = "constant"
    profile: WallProfile | None = None

    @property
    def wall_flux_density(self) -> Callable | float:
        """Per-unit-length influx on each crack wall, divided by epsilon."""
        if self.wall_flux_mode == "profile":
            return self.profile
        return (self.alpha - self.beta) / 2.0

    @property
    def bottom_flux(self) -> float:
        if self.wall_flux_mode == "profile" or self.alpha == 0.0:
            return 0.0
        return self.beta / self.alpha

    def as_dict(self) -> dict:
        out = {
            "alpha": self.alpha,
            "beta": self.beta,
            "epsilon": self.epsilon,
            "wall_flux_mode": self.wall_flux_mode,
        }
        if self.profile is not None:
            out["profile"] = self.profile.as_dict()
        return out


def validate_params(
    alpha: float,
    beta: float = 0.0,
    epsilon: float = 1.0,
    wall_flux_mode: WallFluxMode = "constant",
    profile: WallProfile | str | None = None,
    profile_params: dict | None = None,
) -> ParamSet:
    alpha, beta, epsilon = float(alpha), float(beta), float(epsilon)
    for name, v in (("alpha", alpha), ("beta", beta), ("epsilon", epsilon)):
        if not np.isfinite(v):
            raise OutOfRange(f"{name} must be finite, got {v}")
    if not 0.0 <= alpha < 1.0:
        raise OutOfRange(f"alpha must lie in [0, 1), got {alpha}")
    if alpha == 0.0:
        if beta != 0.0:
            raise OutOfRange(f"beta must be 0 when alpha = 0, got {beta}")
    elif not 0.0 <= beta < alpha:
        raise OutOfRange(f"beta must lie in [0, alpha) = [0, {alpha}), got {beta}")
    if epsilon <= 0.0:
        raise OutOfRange(f"epsilon must be positive, got {epsilon}")

    if wall_flux_mode == "constant":
        if profile is not None:
            raise InconsistentMode("a wall profile was given but wall_flux_mode is 'constant'")
        return ParamSet(alpha, beta, epsilon, "constant", None)
    if wall_flux_mode != "profile":
        raise InconsistentMode(f"wall_flux_mode must be 'constant' or 'profile', got {wall_flux_mode!r}")
    if beta != 0.0:
        raise InconsistentMode("profile wall flux requires beta = 0")
    if profile is None:
        profile = "linear"
    if isinstance(profile, str):
        profile = make_profile(profile, alpha, profile_params)
    mass = profile.integral()
    if abs(mass - alpha / 2.0) > PROFILE_MASS_TOL:
        raise ProfileMassMismatch(
            f"wall profile integrates to {mass!r} over (-1, 0); expected alpha/2 = {alpha / 2.0!r}"
        )
    return ParamSet(alpha, beta, epsilon, "profile", profile)
