"""Source terms, Dirichlet data and exact solutions for the unit-square Poisson
problem ``lap(u) = f``, plus error metrics and a sine-mode projection.

Problem ids are stable CLI tokens: ``foursines``, ``disk``, ``disk2``,
``polytrig`` and ``pretrain``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

PROBLEM_IDS = ("foursines", "disk", "disk2", "polytrig", "pretrain")
POLYTRIG_VARIANTS = ("literal", "sines")

ArrayFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


class MissingExactSolution(ValueError):
    pass


def _zero(x, y):
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)


def _foursines_source(x, y):
    out = 0.0
    for k in range(1, 5):
        out = out + (-1) ** (k + 1) * 2 * k * np.sin(k * np.pi * x) * np.sin(k * np.pi * y)
    return 0.25 * out


def _foursines_exact(x, y):
    out = 0.0
    for k in range(1, 5):
        out = out + (-1) ** k / (4 * k * np.pi**2) * np.sin(k * np.pi * x) * np.sin(k * np.pi * y)
    return out


def _disk_source(x, y):
    inside = (np.asarray(x) - 0.5) ** 2 + (np.asarray(y) - 0.5) ** 2 <= 0.2**2
    return np.where(inside, 1.0, 0.0)


def _disk2_source(x, y):
    inside = (np.asarray(x) - 0.7) ** 2 + (np.asarray(y) - 0.7) ** 2 <= 0.1**2
    return np.where(inside, -10.0, 0.0)


def _pretrain_source(x, y):
    s1 = np.sin(np.pi * x) * np.sin(np.pi * y)
    s6 = np.sin(6 * np.pi * x) * np.sin(6 * np.pi * y)
    return -2.0 * s1 - 72.0 * s6


def _pretrain_exact(x, y):
    s1 = np.sin(np.pi * x) * np.sin(np.pi * y)
    s6 = np.sin(6 * np.pi * x) * np.sin(6 * np.pi * y)
    return (s1 + s6) / np.pi**2


def _polytrig_source(variant: str) -> ArrayFn:
    def literal(x, y):
        # third term exactly as printed: 5 * (2 pi x) * sin(2 pi y)
        return (10 * (x * (x - 1) + y * (y - 1))
                - 2 * np.sin(np.pi * x) * np.sin(np.pi * y)
                + 5 * (2 * np.pi * x) * np.sin(2 * np.pi * y))

    def sines(x, y):
        return (10 * (x * (x - 1) + y * (y - 1))
                - 2 * np.sin(np.pi * x) * np.sin(np.pi * y)
                + 5 * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y))

    return literal if variant == "literal" else sines


@dataclass(frozen=True)
class Problem:
    """A Poisson problem on the unit square with Dirichlet data."""

    id: str
    source: ArrayFn
    boundary: ArrayFn = _zero
    exact: ArrayFn | None = None
    variant: str | None = None

    @property
    def tag(self) -> str:
        return self.id if self.variant is None else f"{self.id}:{self.variant}"


def get_problem(problem_id: str, variant: str = "literal") -> Problem:
    """Look up a problem by CLI token.

    ``variant`` only matters for ``polytrig``: ``literal`` keeps the printed
    ``5(2 pi x) sin(2 pi y)`` term, ``sines`` reads it as a product of sines.
    """
    if problem_id == "foursines":
        return Problem("foursines", _foursines_source, exact=_foursines_exact)
    if problem_id == "disk":
        return Problem("disk", _disk_source)
    if problem_id == "disk2":
        return Problem("disk2", _disk2_source)
    if problem_id == "pretrain":
        return Problem("pretrain", _pretrain_source, exact=_pretrain_exact)
    if problem_id == "polytrig":
        if variant not in POLYTRIG_VARIANTS:
            raise ValueError(f"unknown polytrig variant {variant!r}")
        return Problem("polytrig", _polytrig_source(variant), variant=variant)
    raise ValueError(f"unknown problem id {problem_id!r}; expected one of {PROBLEM_IDS}")


def eval_source(problem: Problem, x, y):
    return problem.source(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def eval_boundary(problem: Problem, x, y):
    return problem.boundary(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def exact_solution(problem: Problem, x, y):
    if problem.exact is None:
        raise MissingExactSolution(f"problem {problem.tag} has no analytic solution")
    return problem.exact(np.asarray(x, dtype=float), np.asarray(y, dtype=float))


def error_metrics(grid, problem: Problem) -> tuple[float, float]:
    """Return ``(L_inf, L2)`` of ``grid - u*`` over all nodes, L2 scaled by h."""
    X, Y = grid.coords()
    diff = grid.values - exact_solution(problem, X, Y)
    return float(np.max(np.abs(diff))), float(grid.h * np.sqrt(np.sum(diff**2)))


def mode_projection(grid, k: int) -> float:
    """Coefficient of ``sin(k pi x) sin(k pi y)`` via discrete sine orthogonality."""
    if k < 1:
        raise ValueError("mode index must be >= 1")
    X, Y = grid.coords()
    inner = (slice(1, -1), slice(1, -1))
    basis = np.sin(k * np.pi * X[inner]) * np.sin(k * np.pi * Y[inner])
    return float(4.0 * grid.h**2 * np.sum(grid.values[inner] * basis))
