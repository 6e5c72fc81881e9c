"""Structured discrete domains.

Two kinds of grid are built here:

* :class:`CrackedGrid` -- one y-period of the cracked slab, x in [-1, 1],
  y in [-eps/2, eps/2], with the notch {-1 < x < 0, |y| < alpha*eps/2}
  removed by deactivating cells.
* :class:`IntervalGrid` -- uniform 1-D grids for the homogenized problems,
  either cell-centered (finite volumes) or vertex-based (P1 elements).

Both finite-volume grids expose the same connectivity arrays (``volumes``,
``interior_faces`` and ``boundary``) so the operators in :mod:`crackdiff.fv`
never need to know which one they are working on.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

from .errors import AlignmentError, DegenerateInterval, EmptyGrid, OddCellCount
from .params import ParamSet

Layout = Literal["cell_centered", "vertex_p1"]

_ALIGN_TOL = 1e-9


class Tag(str, enum.Enum):
    GAMMA0 = "GAMMA0"  # x = 1
    GAMMA1 = "GAMMA1"  # x = -1, material part
    GAMMA_ALPHA = "GAMMA_ALPHA"  # crack walls
    GAMMA_BETA = "GAMMA_BETA"  # crack bottom
    PERIODIC_Y = "PERIODIC_Y"


def tag_key(tag) -> str:
    return tag.value if isinstance(tag, enum.Enum) else str(tag)


def _frozen(a) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class InteriorFaces:
    """Pairs of adjacent cells with two-point transmissibility measure/distance."""

    left: np.ndarray
    right: np.ndarray
    trans: np.ndarray
    periodic: np.ndarray


@dataclass(frozen=True, eq=False)
class BoundaryFaces:
    """Boundary faces of the active region.

    ``dist`` is the distance from the adjacent cell center to the face,
    ``normal`` the outward unit normal, ``x_lo``/``x_hi`` the x-extent of the
    face (equal for faces normal to x).
    """

    cell: np.ndarray
    measure: np.ndarray
    dist: np.ndarray
    tag: np.ndarray  # dtype object, tag strings
    normal: np.ndarray  # (nfaces, dim)
    x_lo: np.ndarray
    x_hi: np.ndarray

    def __len__(self) -> int:
        return len(self.cell)

    def select(self, tag) -> np.ndarray:
        return np.flatnonzero(self.tag == tag_key(tag))

    def measure_of(self, tag) -> float:
        return float(self.measure[self.select(tag)].sum())

    @property
    def tags(self) -> list:
        seen: list = []
        for t in self.tag:
            if t not in seen:
                seen.append(t)
        return seen


@dataclass(frozen=True, eq=False)
class CrackedGrid:
    nx: int
    ny: int
    hx: float
    hy: float
    alpha: float
    epsilon: float
    crack_rows: int  # cell rows of the notch on each side of y = 0
    x_centers: np.ndarray
    y_centers: np.ndarray
    active_mask: np.ndarray  # (nx, ny)
    index: np.ndarray  # (nx, ny) active-cell number or -1
    cell_i: np.ndarray
    cell_j: np.ndarray
    interior_faces: InteriorFaces
    boundary: BoundaryFaces

    dim = 2

    @property
    def n_cells(self) -> int:
        return len(self.cell_i)

    @property
    def cell_x(self) -> np.ndarray:
        return self.x_centers[self.cell_i]

    @property
    def cell_y(self) -> np.ndarray:
        return self.y_centers[self.cell_j]

    @property
    def volumes(self) -> np.ndarray:
        return np.full(self.n_cells, self.hx * self.hy)

    @property
    def active_area(self) -> float:
        return self.n_cells * self.hx * self.hy

    def face_tags(self) -> dict[str, int]:
        counts = {t.value: len(self.boundary.select(t)) for t in Tag if t is not Tag.PERIODIC_Y}
        counts[Tag.PERIODIC_Y.value] = int(np.count_nonzero(self.interior_faces.periodic))
        return counts

    def summary(self) -> dict:
        return {
            "nx": self.nx,
            "ny": self.ny,
            "hx": self.hx,
            "hy": self.hy,
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "crack_rows": self.crack_rows,
            "active_cells": self.n_cells,
            "active_area": self.active_area,
            "measures": {
                t.value: self.boundary.measure_of(t) for t in Tag if t is not Tag.PERIODIC_Y
            },
            "tag_counts": self.face_tags(),
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def alignment_modulus(alpha: float, max_ny: int = 100000) -> int:
    """Smallest even ny with alpha*ny/2 integral."""
    for ny in range(2, max_ny + 1, 2):
        k = alpha * ny / 2.0
        if abs(k - round(k)) < _ALIGN_TOL:
            return ny
    raise AlignmentError(f"no ny <= {max_ny} aligns the crack walls for alpha={alpha}")


def build_cracked_grid(params: ParamSet, nx: int, ny: int) -> CrackedGrid:
    nx, ny = int(nx), int(ny)
    if nx < 2 or ny < 2:
        raise EmptyGrid(f"need nx >= 2 and ny >= 2, got nx={nx}, ny={ny}")
    if nx % 2:
        raise AlignmentError(f"nx must be even so that x = 0 is a cell face, got {nx}")
    if ny % 2:
        raise AlignmentError(f"ny must be even so that y = 0 is a cell face, got {ny}")
    alpha, eps = params.alpha, params.epsilon
    k_float = alpha * ny / 2.0
    k = int(round(k_float))
    if abs(k_float - k) > _ALIGN_TOL:
        raise AlignmentError(f"alpha*ny/2 = {k_float:g} is not an integer; crack walls would cut cells")

    hx, hy = 2.0 / nx, eps / ny
    x_centers = -1.0 + hx * (np.arange(nx) + 0.5)
    y_centers = -eps / 2.0 + hy * (np.arange(ny) + 0.5)

    active = np.ones((nx, ny), dtype=bool)
    notch_rows = slice(ny // 2 - k, ny // 2 + k)
    active[: nx // 2, notch_rows] = False
    if not active.any():
        raise EmptyGrid("grid has no active cells")

    index = np.full((nx, ny), -1, dtype=np.int64)
    ci, cj = np.nonzero(active)  # row-major: i outer, j inner
    index[ci, cj] = np.arange(len(ci))

    # interior faces in x
    both_x = active[:-1, :] & active[1:, :]
    fi, fj = np.nonzero(both_x)
    xl, xr = index[fi, fj], index[fi + 1, fj]
    # interior faces in y, wrapping the last row onto the first
    jn = (np.arange(ny) + 1) % ny
    both_y = active & active[:, jn]
    gi, gj = np.nonzero(both_y)
    yl, yr = index[gi, gj], index[gi, jn[gj]]
    wrap = gj == ny - 1
    interior = InteriorFaces(
        left=_frozen(np.concatenate([xl, yl])),
        right=_frozen(np.concatenate([xr, yr])),
        trans=_frozen(np.concatenate([np.full(len(xl), hy / hx), np.full(len(yl), hx / hy)])),
        periodic=_frozen(np.concatenate([np.zeros(len(xl), bool), wrap])),
    )

    cell, measure, dist, tag, normal, x_lo, x_hi = [], [], [], [], [], [], []

    def add(cells, m, d, t, nrm, lo, hi):
        cells = np.asarray(cells, dtype=np.int64)
        cell.append(cells)
        measure.append(np.full(len(cells), m))
        dist.append(np.full(len(cells), d))
        tag.append(np.array([t.value] * len(cells), dtype=object))
        normal.append(np.tile(np.asarray(nrm, float), (len(cells), 1)))
        x_lo.append(np.broadcast_to(np.asarray(lo, float), len(cells)).copy())
        x_hi.append(np.broadcast_to(np.asarray(hi, float), len(cells)).copy())

    # x = 1
    add(index[nx - 1, :], hy, hx / 2, Tag.GAMMA0, (1.0, 0.0), 1.0, 1.0)
    # x = -1, material rows only
    rows = np.flatnonzero(active[0, :])
    add(index[0, rows], hy, hx / 2, Tag.GAMMA1, (-1.0, 0.0), -1.0, -1.0)
    if k > 0:
        left_cols = np.arange(nx // 2)
        lo, hi = x_centers[left_cols] - hx / 2, x_centers[left_cols] + hx / 2
        # lower wall y = -alpha*eps/2: material cell below, normal +y
        add(index[left_cols, ny // 2 - k - 1], hx, hy / 2, Tag.GAMMA_ALPHA, (0.0, 1.0), lo, hi)
        # upper wall y = +alpha*eps/2: material cell above, normal -y
        add(index[left_cols, ny // 2 + k], hx, hy / 2, Tag.GAMMA_ALPHA, (0.0, -1.0), lo, hi)
        # crack bottom x = 0
        add(index[nx // 2, ny // 2 - k: ny // 2 + k], hy, hx / 2, Tag.GAMMA_BETA, (-1.0, 0.0), 0.0, 0.0)

    boundary = BoundaryFaces(
        cell=_frozen(np.concatenate(cell)),
        measure=_frozen(np.concatenate(measure)),
        dist=_frozen(np.concatenate(dist)),
        tag=_frozen(np.concatenate(tag)),
        normal=_frozen(np.concatenate(normal)),
        x_lo=_frozen(np.concatenate(x_lo)),
        x_hi=_frozen(np.concatenate(x_hi)),
    )
    return CrackedGrid(
        nx=nx, ny=ny, hx=hx, hy=hy, alpha=alpha, epsilon=eps, crack_rows=k,
        x_centers=_frozen(x_centers), y_centers=_frozen(y_centers),
        active_mask=_frozen(active), index=_frozen(index),
        cell_i=_frozen(ci), cell_j=_frozen(cj),
        interior_faces=interior, boundary=boundary,
    )


@dataclass(frozen=True, eq=False)
class IntervalGrid:
    a: float
    b: float
    n: int
    layout: Layout = "cell_centered"

    dim = 1

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def nodes(self) -> np.ndarray:
        """Cell centers (cell_centered) or vertices (vertex_p1)."""
        if self.layout == "vertex_p1":
            return self.a + self.h * np.arange(self.n + 1)
        return self.a + self.h * (np.arange(self.n) + 0.5)

    @property
    def n_cells(self) -> int:
        return self.n

    @property
    def n_values(self) -> int:
        return self.n + 1 if self.layout == "vertex_p1" else self.n

    @property
    def volumes(self) -> np.ndarray:
        return np.full(self.n, self.h)

    @cached_property
    def interior_faces(self) -> InteriorFaces:
        i = np.arange(self.n - 1)
        return InteriorFaces(i, i + 1, np.full(self.n - 1, 1.0 / self.h), np.zeros(self.n - 1, bool))

    @cached_property
    def boundary(self) -> BoundaryFaces:
        h = self.h
        return BoundaryFaces(
            cell=np.array([0, self.n - 1]),
            measure=np.ones(2),
            dist=np.full(2, h / 2),
            tag=np.array(["left", "right"], dtype=object),
            normal=np.array([[-1.0], [1.0]]),
            x_lo=np.array([self.a, self.b]),
            x_hi=np.array([self.a, self.b]),
        )

    def index_of(self, x: float) -> int:
        """Vertex index of ``x`` (vertex_p1 layout); x must be a grid vertex."""
        s = (x - self.a) / self.h
        i = int(round(s))
        if abs(s - i) > _ALIGN_TOL or not 0 <= i <= self.n:
            raise ValueError(f"x={x} is not a vertex of the grid")
        return i


def build_interval_grid(a: float, b: float, n: int, layout: Layout = "cell_centered") -> IntervalGrid:
    a, b, n = float(a), float(b), int(n)
    if not (np.isfinite(a) and np.isfinite(b)) or b <= a:
        raise DegenerateInterval(f"need a < b, got ({a}, {b})")
    if n < 2:
        raise DegenerateInterval(f"need n >= 2 cells, got {n}")
    if layout not in ("cell_centered", "vertex_p1"):
        raise ValueError(f"unknown layout {layout!r}")
    if a < 0.0 < b:
        s = -a * n / (b - a)
        if abs(s - round(s)) > _ALIGN_TOL:
            raise OddCellCount(f"n={n} does not place a face/vertex at x = 0 on ({a}, {b})")
    return IntervalGrid(a, b, n, layout)
