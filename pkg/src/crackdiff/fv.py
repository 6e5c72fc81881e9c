"""Cell-centered finite-volume operators shared by the time-dependent solvers.

The discrete heat operator is written in integrated form: for each cell,

    vol/dt * (u_new - u_old) + sum_faces T_f (u_cell - u_neighbour) = boundary loads + vol * source

with two-point transmissibility T_f = |face| / |center distance|. Prescribed
outward normal derivatives (influx densities) only enter the right-hand side,
so discrete mass is conserved exactly; Dirichlet faces use the half-cell
distance and add |face| / (h/2) to the diagonal.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Mapping, Union

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lapack
from scipy.sparse.linalg import cg, splu

from .errors import NaNDetected, NotBoundaryFace, SolverDivergence
from .grid import CrackedGrid, IntervalGrid, tag_key

logger = logging.getLogger(__name__)

Grid = Union[CrackedGrid, IntervalGrid]
FluxValue = Union[float, Callable[[np.ndarray], np.ndarray]]

DEFAULT_RTOL = 1e-10

_GAUSS3_X, _GAUSS3_W = np.polynomial.legendre.leggauss(3)


@dataclass(frozen=True, eq=False)
class Field:
    """Values of u on a grid (one per active cell, or per vertex for P1) at a time."""

    grid: Grid
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        expected = self.grid.n_values if isinstance(self.grid, IntervalGrid) else self.grid.n_cells
        if values.shape != (expected,):
            raise ValueError(f"field has {values.shape} values, grid expects ({expected},)")
        if not np.all(np.isfinite(values)):
            raise NaNDetected(f"non-finite values in field at t={self.time}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, grid: Grid, c: float = 0.0, time: float = 0.0) -> "Field":
        n = grid.n_values if isinstance(grid, IntervalGrid) else grid.n_cells
        return cls(grid, np.full(n, float(c)), time)

    def integral(self) -> float:
        """Discrete integral sum(u * cell volume) (finite-volume layouts)."""
        return float(np.dot(self.values, self.grid.volumes))


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Boundary conditions keyed by face tag.

    ``flux_by_tag`` gives the prescribed outward normal derivative (influx
    density), a scalar or a function of x averaged over each face;
    ``dirichlet`` gives a prescribed value per tag.
    """

    flux_by_tag: Mapping = field(default_factory=dict)
    dirichlet: Mapping = field(default_factory=dict)

    def check(self, grid: Grid) -> None:
        tags = list(grid.boundary.tags)
        flux = {tag_key(t) for t in self.flux_by_tag}
        dirichlet = {tag_key(t) for t in self.dirichlet}
        both = flux & dirichlet
        if both:
            raise ValueError(f"tags given both flux and Dirichlet data: {sorted(both)}")
        given = flux | dirichlet
        missing = [t for t in tags if t not in given]
        if missing:
            raise ValueError(f"boundary faces without a condition: {missing}")
        unknown = [t for t in given if t not in tags]
        if unknown:
            raise ValueError(f"conditions for tags absent from the grid: {unknown}")


def _face_average(fn: Callable, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * _GAUSS3_X[None, :]
    return (np.asarray(fn(pts), dtype=float) * _GAUSS3_W[None, :]).sum(axis=1) / 2.0


def boundary_loads(grid: Grid, bc: BoundaryData) -> np.ndarray:
    """Per-cell integrated influx from the Neumann faces."""
    bf = grid.boundary
    load = np.zeros(grid.n_cells)
    for tag, q in bc.flux_by_tag.items():
        idx = bf.select(tag)
        if callable(q):
            vals = _face_average(q, bf.x_lo[idx], bf.x_hi[idx])
        else:
            vals = np.full(len(idx), float(q))
        np.add.at(load, bf.cell[idx], vals * bf.measure[idx])
    return load


@dataclass(frozen=True, eq=False)
class StepSystem:
    """Backward-Euler operator vol/dt + A, immutable after assembly."""

    matrix: sp.csr_matrix
    dt: float
    mass: np.ndarray
    symmetric: bool = True
    grid: Grid | None = None
    dirichlet_tags: frozenset = frozenset()
    banded: np.ndarray | None = None  # (3, n) tridiagonal storage for 1-D grids

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def _lu(self):
        return splu(self.matrix.tocsc())

    @cached_property
    def _tridiag(self):
        ab = self.banded
        if ab.shape[1] < 3:
            return None  # LAPACK's f2py wrapper rejects n = 2; use the sparse LU
        dl, d, du, du2, ipiv, info = lapack.dgttrf(ab[2, :-1], ab[1, :], ab[0, 1:])
        if info != 0:
            raise SolverDivergence(f"tridiagonal factorization failed (info={info})")
        return dl, d, du, du2, ipiv

    def solve_tridiagonal(self, rhs: np.ndarray) -> np.ndarray:
        """Solve with the cached LU factors of a 1-D system (no residual check)."""
        if self._tridiag is None:
            return self._lu.solve(rhs)
        x, info = lapack.dgttrs(*self._tridiag, rhs)
        if info != 0:
            raise SolverDivergence(f"tridiagonal solve failed (info={info})")
        return x

    def residual_ok(self, x: np.ndarray, rhs: np.ndarray, rtol: float = DEFAULT_RTOL) -> float:
        """Relative residual of ``x``; raises SolverDivergence above ``rtol``."""
        res = float(np.linalg.norm(rhs - self.matrix @ x))
        bnorm = float(np.linalg.norm(rhs))
        rel = res / bnorm if bnorm > 0 else res
        if res > rtol * bnorm and res > 1e-300:
            raise SolverDivergence(f"relative residual {rel:.3e} exceeds rtol {rtol:.1e}", None, res)
        return rel


def _laplacian(grid: Grid, dirichlet_tags) -> sp.csr_matrix:
    n = grid.n_cells
    f = grid.interior_faces
    rows = np.concatenate([f.left, f.right, f.left, f.right])
    cols = np.concatenate([f.left, f.right, f.right, f.left])
    vals = np.concatenate([f.trans, f.trans, -f.trans, -f.trans])
    diag = np.zeros(n)
    bf = grid.boundary
    for tag in dirichlet_tags:
        idx = bf.select(tag)
        if len(idx) == 0:
            raise NotBoundaryFace(f"no boundary faces tagged {tag!r}")
        np.add.at(diag, bf.cell[idx], bf.measure[idx] / bf.dist[idx])
    A = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return (A + sp.diags(diag)).tocsr()


def assemble_step_system(grid: Grid, dt: float, dirichlet_tags=()) -> StepSystem:
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    dirichlet_tags = frozenset(tag_key(t) for t in dirichlet_tags)
    mass = np.asarray(grid.volumes, dtype=float)
    matrix = (sp.diags(mass / dt) + _laplacian(grid, dirichlet_tags)).tocsr()
    matrix.sort_indices()
    banded = None
    if isinstance(grid, IntervalGrid):
        n = grid.n_cells
        banded = np.zeros((3, n))
        banded[0, 1:] = matrix.diagonal(1)
        banded[1, :] = matrix.diagonal(0)
        banded[2, :-1] = matrix.diagonal(-1)
        banded.setflags(write=False)
    return StepSystem(matrix, float(dt), mass, True, grid, dirichlet_tags, banded)


def solve_linear(system: StepSystem, rhs: np.ndarray, rtol: float = DEFAULT_RTOL, method: str = "auto") -> np.ndarray:
    """Solve ``system.matrix @ x = rhs``.

    ``method``: ``"auto"`` (banded for 1-D, sparse LU otherwise), ``"direct"``
    or ``"cg"`` (Jacobi-preconditioned conjugate gradients, SPD systems only).
    """
    rhs = np.asarray(rhs, dtype=float)
    if not np.all(np.isfinite(rhs)):
        raise NaNDetected("non-finite right-hand side")
    A = system.matrix
    if method == "auto":
        method = "banded" if system.banded is not None else "direct"
    if method == "banded":
        x = system.solve_tridiagonal(rhs)
        iters = 1
    elif method == "direct":
        x = system._lu.solve(rhs)
        iters = 1
    elif method == "cg":
        if not system.symmetric:
            raise ValueError("conjugate gradients needs a symmetric system")
        maxiter = 10 * system.n
        count = [0]

        def cb(_):
            count[0] += 1

        M = sp.diags(1.0 / A.diagonal())
        x, info = cg(A, rhs, rtol=rtol, atol=0.0, maxiter=maxiter, M=M, callback=cb)
        iters = count[0]
        if info > 0:
            res = float(np.linalg.norm(rhs - A @ x))
            raise SolverDivergence(
                f"CG hit the iteration cap ({maxiter}) with residual {res:.3e}", iters, res
            )
    else:
        raise ValueError(f"unknown linear solver method {method!r}")
    if not np.all(np.isfinite(x)):
        raise NaNDetected("linear solve produced non-finite values")
    try:
        system.residual_ok(x, rhs, rtol)
    except SolverDivergence as exc:
        exc.iterations = iters
        raise
    return x


def step(
    prev: Field,
    system: StepSystem,
    bc: BoundaryData,
    source=0.0,
    rtol: float = DEFAULT_RTOL,
    method: str = "auto",
) -> Field:
    """Advance ``prev`` by one backward-Euler step of du/dt - Laplace(u) = source."""
    rhs = step_rhs(prev, system, bc, source)
    values = solve_linear(system, rhs, rtol, method)
    return Field(prev.grid, values, prev.time + system.dt)


def step_rhs(prev: Field, system: StepSystem, bc: BoundaryData, source=0.0) -> np.ndarray:
    """Right-hand side vol/dt * u_prev + boundary loads + vol * source."""
    grid = prev.grid
    if system.grid is not None and system.grid is not grid:
        raise ValueError("field and step system live on different grids")
    if {tag_key(t) for t in bc.dirichlet} != system.dirichlet_tags:
        raise ValueError("Dirichlet tags of the boundary data do not match the assembled system")
    bc.check(grid)
    rhs = system.mass / system.dt * prev.values + boundary_loads(grid, bc)
    src = np.asarray(source, dtype=float)
    if src.ndim == 0:
        if src != 0.0:
            rhs = rhs + float(src) * system.mass
    else:
        rhs = rhs + src * system.mass
    bf = grid.boundary
    for tag, g in bc.dirichlet.items():
        idx = bf.select(tag)
        np.add.at(rhs, bf.cell[idx], bf.measure[idx] / bf.dist[idx] * float(g))
    return rhs


def _boundary_face(grid: Grid, face) -> int:
    bf = grid.boundary
    if isinstance(face, (int, np.integer)):
        if not 0 <= face < len(bf):
            raise NotBoundaryFace(f"face index {face} out of range")
        return int(face)
    idx = bf.select(face)
    if len(idx) != 1:
        raise NotBoundaryFace(f"{face!r} does not identify a single boundary face")
    return int(idx[0])


def face_trace(field: Field, interface_face, q: float) -> float:
    """Face value u_cell + dist * q, with q the outward normal derivative on the face."""
    f = _boundary_face(field.grid, interface_face)
    bf = field.grid.boundary
    return float(field.values[bf.cell[f]] + bf.dist[f] * q)


def face_flux_dirichlet(field: Field, interface_face, g: float) -> float:
    """One-sided derivative at a face carrying the value g.

    Returns du/dx on 1-D grids and the outward normal derivative otherwise.
    """
    f = _boundary_face(field.grid, interface_face)
    bf = field.grid.boundary
    dn = (g - field.values[bf.cell[f]]) / bf.dist[f]
    if field.grid.dim == 1:
        return float(dn * bf.normal[f, 0])
    return float(dn)
