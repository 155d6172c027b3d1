"""Uniform-grid solvers for ``lap(u) = f`` with Dirichlet data.

A grid labelled ``N`` has ``(N+1) x (N+1)`` nodes covering the closed unit
square with spacing ``h = 1/N``; ``values[i, j]`` sits at ``(i h, j h)``.
Boundary nodes carry Dirichlet values and are never touched by the solvers.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numba as nb
import numpy as np

from .problems import Problem, eval_boundary, eval_source

log = logging.getLogger(__name__)


@dataclass
class Grid2D:
    N: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.N + 1, self.N + 1):
            raise ValueError(f"grid {self.N} needs {(self.N + 1,) * 2} nodes, got {self.values.shape}")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @classmethod
    def zeros(cls, N: int) -> "Grid2D":
        return cls(N, np.zeros((N + 1, N + 1)))

    @classmethod
    def sample(cls, N: int, fn) -> "Grid2D":
        X, Y = node_coords(N)
        return cls(N, np.asarray(fn(X, Y), dtype=np.float64) * np.ones_like(X))

    def coords(self):
        return node_coords(self.N)

    def copy(self) -> "Grid2D":
        return Grid2D(self.N, self.values.copy())

    def interior(self) -> np.ndarray:
        return self.values[1:-1, 1:-1]

    def set_boundary(self, g) -> None:
        """Overwrite the boundary ring with ``g`` (array on the full grid or callable)."""
        if callable(g):
            X, Y = self.coords()
            g = np.asarray(g(X, Y)) * np.ones_like(X)
        v = self.values
        v[0, :], v[-1, :], v[:, 0], v[:, -1] = g[0, :], g[-1, :], g[:, 0], g[:, -1]


def node_coords(N: int):
    xs = np.arange(N + 1) / N
    return np.meshgrid(xs, xs, indexing="ij")


def source_grid(problem: Problem, N: int) -> Grid2D:
    X, Y = node_coords(N)
    return Grid2D(N, np.asarray(eval_source(problem, X, Y), dtype=np.float64) * np.ones_like(X))


def boundary_grid(problem: Problem, N: int) -> Grid2D:
    """Full grid holding ``g`` on the boundary ring and zero inside."""
    X, Y = node_coords(N)
    g = np.asarray(eval_boundary(problem, X, Y), dtype=np.float64) * np.ones_like(X)
    out = Grid2D.zeros(N)
    out.set_boundary(g)
    return out


def _check_shapes(grid: Grid2D, f: Grid2D):
    if grid.values.shape != f.values.shape:
        raise ValueError(f"grid {grid.N} and source {f.N} shapes differ")


@nb.njit(cache=True)
def _gs_sweep(u, f, hh):
    n = u.shape[0] - 1
    change = 0.0
    for i in range(1, n):
        for j in range(1, n):
            new = 0.25 * (u[i + 1, j] + u[i - 1, j] + u[i, j + 1] + u[i, j - 1] - hh * f[i, j])
            d = new - u[i, j]
            change += d * d
            u[i, j] = new
    return np.sqrt(change)


def gs_sweep(grid: Grid2D, f: Grid2D) -> float:
    """One in-place lexicographic Gauss-Seidel sweep; returns ``||u_new - u_old||_2``."""
    _check_shapes(grid, f)
    return float(_gs_sweep(grid.values, f.values, grid.h * grid.h))


@dataclass
class GSResult:
    iterations: int
    converged: bool
    last_update: float


def gs_solve(grid: Grid2D, f: Grid2D, delta: float, max_iters: int = 1_000_000) -> GSResult:
    """Sweep until the update norm is ``<= delta``; the grid keeps its state either way."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    _check_shapes(grid, f)
    hh = grid.h * grid.h
    upd = np.inf
    for it in range(1, max_iters + 1):
        upd = float(_gs_sweep(grid.values, f.values, hh))
        if upd <= delta:
            return GSResult(it, True, upd)
    log.warning("Gauss-Seidel did not reach delta=%g in %d sweeps (last update %g)",
                delta, max_iters, upd)
    return GSResult(max_iters, False, upd)


def prolongate(coarse: Grid2D) -> Grid2D:
    """Bilinear interpolation from grid ``N`` to grid ``2N``."""
    c = coarse.values
    N = coarse.N
    fine = np.empty((2 * N + 1, 2 * N + 1))
    fine[::2, ::2] = c
    fine[1::2, ::2] = 0.5 * (c[:-1, :] + c[1:, :])
    fine[::2, 1::2] = 0.5 * (c[:, :-1] + c[:, 1:])
    fine[1::2, 1::2] = 0.25 * (c[:-1, :-1] + c[1:, :-1] + c[:-1, 1:] + c[1:, 1:])
    return Grid2D(2 * N, fine)


def apply_stencil(u: np.ndarray, h: float) -> np.ndarray:
    """``(4 u_C - u_E - u_W - u_N - u_S) / h**2`` on the interior, zero on the ring."""
    out = np.zeros_like(u)
    out[1:-1, 1:-1] = (4.0 * u[1:-1, 1:-1] - u[2:, 1:-1] - u[:-2, 1:-1]
                       - u[1:-1, 2:] - u[1:-1, :-2]) / (h * h)
    return out


@dataclass
class CGResult:
    grid: Grid2D
    iterations: int
    converged: bool
    residual_norms: list[float]


def cg_solve(f: Grid2D, g: Grid2D | None = None, rtol: float = 1e-10,
             max_iters: int | None = None) -> CGResult:
    """Unpreconditioned CG on ``-lap_h u = -f`` with Dirichlet data lifted from ``g``.

    ``g`` supplies the boundary ring (its interior is ignored). Stops when
    ``||r_k|| / ||r_0|| <= rtol``.
    """
    if rtol <= 0:
        raise ValueError("rtol must be positive")
    N, h = f.N, f.h
    lift = np.zeros((N + 1, N + 1))
    if g is not None:
        lift = g.values.copy()
        lift[1:-1, 1:-1] = 0.0
    if max_iters is None:
        max_iters = 10 * (N - 1) ** 2
    b = np.zeros_like(lift)
    b[1:-1, 1:-1] = -f.values[1:-1, 1:-1]
    b -= apply_stencil(lift, h)
    x = np.zeros_like(lift)
    r = b.copy()
    rr = float(np.sum(r * r))
    r0 = np.sqrt(rr)
    norms = [r0]
    if r0 == 0.0:
        return CGResult(Grid2D(N, lift), 0, True, norms)
    p = r.copy()
    it = 0
    converged = False
    while it < max_iters:
        Ap = apply_stencil(p, h)
        alpha = rr / float(np.sum(p * Ap))
        x += alpha * p
        r -= alpha * Ap
        rr_new = float(np.sum(r * r))
        it += 1
        norms.append(np.sqrt(rr_new))
        if np.sqrt(rr_new) <= rtol * r0:
            converged = True
            break
        p = r + (rr_new / rr) * p
        rr = rr_new
    if not converged:
        log.warning("CG hit max_iters=%d at relative residual %g", max_iters, norms[-1] / r0)
    return CGResult(Grid2D(N, x + lift), it, converged, norms)


def write_grid_csv(grid: Grid2D, path, header: str = "") -> None:
    """``# N=..,h=..`` style header then ``N+1`` rows of comma-separated values."""
    path = Path(path)
    with path.open("w") as fh:
        if header:
            fh.write(header)
        fh.write(f"N,h\n{grid.N},{grid.h!r}\n")
        for row in grid.values:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")


def read_grid_csv(path) -> Grid2D:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    N = int(lines[1].split(",")[0])
    values = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:2 + N + 1]])
    return Grid2D(N, values)


def write_grid_raw(grid: Grid2D, path) -> None:
    Path(path).write_bytes(b"GRID" + struct.pack("<I", grid.N)
                           + grid.values.astype("<f8").tobytes())


def read_grid_raw(path) -> Grid2D:
    data = Path(path).read_bytes()
    if data[:4] != b"GRID":
        raise ValueError(f"{path}: not a raw grid file")
    (N,) = struct.unpack_from("<I", data, 4)
    values = np.frombuffer(data, dtype="<f8", offset=8)
    if values.size != (N + 1) ** 2:
        raise ValueError(f"{path}: expected {(N + 1) ** 2} values, found {values.size}")
    return Grid2D(N, values.reshape(N + 1, N + 1).copy())
