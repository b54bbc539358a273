"""Independent references: exhaustive grid search, closed-form convex minimum, gradient checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .model import Assignment, Problem, global_cost, local_objective

DEFAULT_GRID_CAP = 10**7


class GridTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    points_per_variable: int
    inclusive: bool = True
    cap: int = DEFAULT_GRID_CAP

    def __post_init__(self):
        if self.points_per_variable < 1:
            raise ValueError("points_per_variable must be >= 1")

    def axis(self, lb: float, ub: float) -> np.ndarray:
        m = self.points_per_variable
        if m == 1:
            return np.array([(lb + ub) / 2.0])
        if self.inclusive:
            return np.linspace(lb, ub, m)
        # cell midpoints
        return lb + (np.arange(m) + 0.5) * (ub - lb) / m


def exhaustive_search(p: Problem, points: Mapping[int, Sequence[float]],
                      cap: int = DEFAULT_GRID_CAP) -> tuple[Assignment, float]:
    """Minimum of the global cost over the product of per-variable point sets.

    Ties go to the lexicographically smallest index vector.
    """
    axes = [np.asarray(points[i], dtype=float) for i in p.agents]
    size = math.prod(len(a) for a in axes)
    if size > cap:
        raise GridTooLarge(f"joint grid has {size} points, cap is {cap}")
    n = p.n
    # the first variable is looped over, the rest is broadcast as an open mesh
    rest = np.ix_(*axes[1:]) if n > 1 else ()
    best_cost, best_idx = math.inf, None
    for i0, x0 in enumerate(axes[0]):
        grids = [np.float64(x0), *rest]
        total = np.zeros(tuple(len(a) for a in axes[1:]))
        for e in p.edges:
            total = total + e.cost(grids[e.first], grids[e.second])
        flat = int(np.argmin(total))
        c = float(total.flat[flat])
        if c < best_cost:
            best_cost = c
            best_idx = (i0, *np.unravel_index(flat, total.shape)) if n > 1 else (i0,)
    assignment = {i: float(axes[i][best_idx[i]]) for i in p.agents}
    return assignment, global_cost(p, assignment)


def grid_search(p: Problem, g: GridSpec) -> tuple[Assignment, float]:
    points = {i: g.axis(d.lb, d.ub) for i, d in enumerate(p.domains)}
    return exhaustive_search(p, points, g.cap)


def hessian(p: Problem) -> np.ndarray:
    h = np.zeros((p.n, p.n))
    for e in p.edges:
        i, j = e.first, e.second
        h[i, i] += 2 * e.cost.a
        h[j, j] += 2 * e.cost.c
        h[i, j] += e.cost.b
        h[j, i] += e.cost.b
    return h


@dataclass(frozen=True)
class QuadMin:
    assignment: Assignment
    cost: float
    feasible: bool  # minimizer lies inside every domain


def quadratic_global_min(p: Problem) -> QuadMin | None:
    """Unconstrained minimum of the global cost, or ``None`` if the Hessian is not positive definite."""
    h = hessian(p)
    try:
        chol = np.linalg.cholesky(h)
    except np.linalg.LinAlgError:
        return None
    if np.min(np.diag(chol)) <= 1e-12 * max(1.0, np.max(np.abs(h))):
        return None
    # costs are homogeneous quadratics: no linear term
    rhs = np.zeros(p.n)
    x = np.linalg.solve(h, rhs)
    assignment = {i: float(x[i]) for i in p.agents}
    feasible = all(d.contains(assignment[i]) for i, d in enumerate(p.domains))
    return QuadMin(assignment, global_cost(p, assignment), feasible)


def finite_diff_check(
    f: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    point: Sequence[float],
    h: float = 1e-5,
    atol: float = 1e-9,
) -> float:
    """Largest error between ``grad`` and central differences of ``f``.

    Errors are relative to ``max(|partial|, 1)``; coordinates where both
    partials are below ``atol`` and agree within it count as exact.
    """
    if not h > 0:
        raise ValueError("h must be > 0")
    x = np.asarray(point, dtype=float)
    analytic = np.asarray(grad(x), dtype=float)
    worst = 0.0
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        numeric = (f(x + e) - f(x - e)) / (2 * h)
        err = abs(numeric - analytic[k])
        scale = max(abs(numeric), abs(analytic[k]))
        if scale < atol and err < atol:
            continue
        worst = max(worst, err / max(scale, 1.0))
    return worst


def local_objective_functions(p: Problem, i: int):
    """``(scope, f, grad)`` over the vector (x_i, *neighbors of i), for :func:`finite_diff_check`."""
    scope = (i, *p.neighbors[i])

    def as_assignment(x):
        return dict(zip(scope, map(float, x)))

    def f(x):
        return local_objective(p, i, as_assignment(x))[0]

    def grad(x):
        g = local_objective(p, i, as_assignment(x))[1]
        return np.array([g[v] for v in scope])

    return scope, f, grad
