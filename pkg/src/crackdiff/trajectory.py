from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fv import Field

INTERFACE_COLUMNS = ("t", "F", "u0minus", "u0plus", "dxu0minus", "dxu0plus", "iters", "last_ratio")


@dataclass(eq=False)
class Trajectory:
    """Time-ordered record of one run.

    ``times``/``mass``/``probe`` hold one entry per step including t = 0.
    ``interface`` (homogenized runs only) maps each column of
    :data:`INTERFACE_COLUMNS` to an array with one entry per step after t = 0.
    """

    kind: str
    times: np.ndarray
    mass: np.ndarray
    probe: np.ndarray
    probe_x: float
    snapshots: list[Field]
    final: Field
    interface: dict[str, np.ndarray] | None = None
    meta: dict = field(default_factory=dict)

    def snapshot_at(self, t: float) -> Field:
        for s in self.snapshots:
            if abs(s.time - t) <= 1e-9 * max(1.0, abs(t)):
                return s
        raise KeyError(f"no snapshot at t={t}; have {[s.time for s in self.snapshots]}")


def step_count(t_end: float, dt: float) -> int:
    n = int(round(t_end / dt))
    if n < 1 or abs(n * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError(f"t_end={t_end} is not a whole number of steps dt={dt}")
    return n


def snapshot_steps(times, dt: float, n_steps: int) -> dict[int, float]:
    """Map step index -> requested snapshot time (nearest step)."""
    out: dict[int, float] = {}
    for t in times:
        k = int(round(t / dt))
        if not 0 <= k <= n_steps:
            raise ValueError(f"snapshot time {t} outside [0, {n_steps * dt}]")
        out[k] = k * dt
    return out
