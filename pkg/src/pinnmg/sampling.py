"""Collocation point sets for training."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .problems import Problem, eval_boundary, eval_source

DISTRIBUTIONS = ("uniform", "pseudo-random", "sobol")


@dataclass(frozen=True)
class TrainingSet:
    interior: np.ndarray          # (n, 2), strictly inside the unit square
    boundary: np.ndarray          # (m, 2), on the perimeter
    boundary_values: np.ndarray   # (m,)
    distribution: str = "sobol"
    seed: int | None = None

    def __post_init__(self):
        if self.interior.ndim != 2 or self.interior.shape[1] != 2:
            raise ValueError("interior points must have shape (n, 2)")
        if self.boundary.shape[0] != self.boundary_values.shape[0]:
            raise ValueError("one Dirichlet value per boundary point")

    @property
    def n_interior(self) -> int:
        return self.interior.shape[0]

    @property
    def n_boundary(self) -> int:
        return self.boundary.shape[0]

    def duplicated(self) -> "TrainingSet":
        return TrainingSet(np.concatenate([self.interior, self.interior]),
                           np.concatenate([self.boundary, self.boundary]),
                           np.concatenate([self.boundary_values, self.boundary_values]),
                           self.distribution, self.seed)


def sobol2d(count: int, skip: int = 1) -> np.ndarray:
    """Unscrambled 2-D Sobol points ``skip .. skip+count-1`` (Joe-Kuo directions)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    engine = qmc.Sobol(d=2, scramble=False)
    if skip:
        engine.fast_forward(skip)
    with warnings.catch_warnings():
        # balance warning for non power-of-two counts
        warnings.simplefilter("ignore", UserWarning)
        return engine.random(count)


def parse_shape(shape) -> tuple[int, int | None]:
    """Accept ``n``, ``(nx, ny)`` or the strings ``"n"`` / ``"nx x ny"``."""
    if isinstance(shape, str):
        parts = shape.lower().replace("×", "x").split("x")
        if len(parts) == 1:
            return int(parts[0]), None
        if len(parts) == 2:
            return int(parts[0]), int(parts[1])
        raise ValueError(f"bad shape {shape!r}")
    if isinstance(shape, (tuple, list)):
        if len(shape) != 2:
            raise ValueError(f"bad shape {shape!r}")
        return int(shape[0]), int(shape[1])
    return int(shape), None


def generate_interior(dist: str, shape, seed: int | None = 0) -> np.ndarray:
    """Interior collocation points for ``dist`` in {uniform, pseudo-random, sobol}.

    ``shape`` is a count or ``nx x ny``; a two-part shape asks for ``nx*ny``
    points for the non-grid distributions.
    """
    a, b = parse_shape(shape)
    if dist == "uniform":
        if b is None:
            raise ValueError("uniform distribution needs an nx x ny shape")
        xs = np.arange(1, a + 1) / (a + 1)
        ys = np.arange(1, b + 1) / (b + 1)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])
    count = a if b is None else a * b
    if count < 1:
        raise ValueError("need at least one interior point")
    if dist == "pseudo-random":
        rng = np.random.default_rng(seed)
        pts = rng.random((count, 2))
        # default_rng draws from [0, 1); redraw exact zeros to stay strictly inside
        while np.any(pts == 0.0):
            bad = np.any(pts == 0.0, axis=1)
            pts[bad] = rng.random((int(bad.sum()), 2))
        return pts
    if dist == "sobol":
        return sobol2d(count, skip=1)
    raise ValueError(f"unknown distribution {dist!r}; expected one of {DISTRIBUTIONS}")


def perimeter_points(count: int) -> np.ndarray:
    """``count`` points equispaced along the perimeter, starting at the origin corner."""
    if count < 4:
        raise ValueError("need at least 4 boundary points")
    s = 4.0 * np.arange(count) / count
    edge = np.minimum(np.floor(s).astype(int), 3)
    t = s - edge
    pts = np.empty((count, 2))
    # walk counter-clockwise: bottom, right, top, left
    pts[edge == 0] = np.column_stack([t[edge == 0], np.zeros((edge == 0).sum())])
    pts[edge == 1] = np.column_stack([np.ones((edge == 1).sum()), t[edge == 1]])
    pts[edge == 2] = np.column_stack([1.0 - t[edge == 2], np.ones((edge == 2).sum())])
    pts[edge == 3] = np.column_stack([np.zeros((edge == 3).sum()), 1.0 - t[edge == 3]])
    return pts


def sobol_edge_points(count: int) -> np.ndarray:
    """``count/4`` points per edge from the 1-D Sobol sequence plus the corners."""
    if count < 4:
        raise ValueError("need at least 4 boundary points")
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    per_edge = [(count - 4) // 4 + (1 if i < (count - 4) % 4 else 0) for i in range(4)]
    out = [corners]
    for i, n in enumerate(per_edge):
        if n == 0:
            continue
        t = sobol2d(n, skip=1)[:, 0]
        if i == 0:
            out.append(np.column_stack([t, np.zeros(n)]))
        elif i == 1:
            out.append(np.column_stack([np.ones(n), t]))
        elif i == 2:
            out.append(np.column_stack([t, np.ones(n)]))
        else:
            out.append(np.column_stack([np.zeros(n), t]))
    return np.concatenate(out)


def generate_boundary(count: int, problem: Problem, layout: str = "perimeter"):
    """Boundary points and their Dirichlet values."""
    if layout == "perimeter":
        pts = perimeter_points(count)
    elif layout == "sobol":
        pts = sobol_edge_points(count)
    else:
        raise ValueError(f"unknown boundary layout {layout!r}")
    return pts, np.asarray(eval_boundary(problem, pts[:, 0], pts[:, 1]), dtype=float)


def make_training_set(problem: Problem, dist: str = "sobol", interior=(64, 64),
                      n_boundary: int = 2000, seed: int | None = 0,
                      boundary_layout: str = "perimeter") -> TrainingSet:
    interior_pts = generate_interior(dist, interior, seed)
    bpts, g = generate_boundary(n_boundary, problem, boundary_layout)
    return TrainingSet(interior_pts, bpts, g, dist, seed)


def source_values(problem: Problem, tset: TrainingSet) -> np.ndarray:
    return np.asarray(eval_source(problem, tset.interior[:, 0], tset.interior[:, 1]), dtype=float)
