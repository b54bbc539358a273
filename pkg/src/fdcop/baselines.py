"""Comparison solvers: discrete CoCoA and hybrid continuous Max-Sum (HCMS)."""

from __future__ import annotations

import time
from typing import Mapping, Sequence

import numpy as np

from .ccocoa import CCoCoA, SolverConfig, discretize
from .engine import AgentRuntime, RunMetrics
from .model import Problem, global_cost


class CoCoA(CCoCoA):
    """CoCoA over the sampled points: the elected point is committed as is."""

    name = "cocoa"

    def commit(self, p: Problem, agent: AgentRuntime, theta: float, chi: Mapping[int, float]) -> float:
        return theta


def cocoa_solve(p: Problem, cfg: SolverConfig | None = None, seed: int | None = None, **kwargs) -> RunMetrics:
    return CoCoA(cfg).solve(p, seed, **kwargs)


class MaxSumState:
    """Min-sum messages on the factor graph with one function node per edge.

    Row ``e`` of ``q_first``/``r_first`` belongs to the first (x-role)
    endpoint of edge ``e``, ``q_second``/``r_second`` to the second one.
    Columns are aligned with that variable's current points.
    """

    def __init__(self, p: Problem, points: np.ndarray):
        self.problem = p
        self.points = points
        self.first = np.array([e.first for e in p.edges], dtype=int)
        self.second = np.array([e.second for e in p.edges], dtype=int)
        self.a = np.array([e.cost.a for e in p.edges])
        self.b = np.array([e.cost.b for e in p.edges])
        self.c = np.array([e.cost.c for e in p.edges])
        self.lb = np.array([d.lb for d in p.domains])
        self.ub = np.array([d.ub for d in p.domains])
        n_edges, k = len(p.edges), points.shape[1]
        self.q_first = np.zeros((n_edges, k))
        self.q_second = np.zeros((n_edges, k))
        self.r_first = np.zeros((n_edges, k))
        self.r_second = np.zeros((n_edges, k))
        self.iteration = 0

    def cost_tensor(self) -> np.ndarray:
        x = self.points[self.first][:, :, None]
        y = self.points[self.second][:, None, :]
        a, b, c = (v[:, None, None] for v in (self.a, self.b, self.c))
        return a * x * x + b * x * y + c * y * y

    def beliefs(self) -> np.ndarray:
        bel = np.zeros_like(self.points)
        np.add.at(bel, self.first, self.r_first)
        np.add.at(bel, self.second, self.r_second)
        return bel

    def step(self) -> None:
        bel = self.beliefs()
        self.q_first = _normalize(bel[self.first] - self.r_first)
        self.q_second = _normalize(bel[self.second] - self.r_second)
        f = self.cost_tensor()
        self.r_first = _normalize((f + self.q_second[:, None, :]).min(axis=2))
        self.r_second = _normalize((f + self.q_first[:, :, None]).min(axis=1))
        self.iteration += 1

    def selection(self) -> np.ndarray:
        return self.beliefs().argmin(axis=1)

    def current_values(self) -> np.ndarray:
        sel = self.selection()
        return self.points[np.arange(len(sel)), sel]

    def adjust(self, alpha: float) -> None:
        """One gradient step of every point against the current best-response values."""
        xhat = self.current_values()
        x, y = self.points[self.first], self.points[self.second]
        grad = np.zeros_like(self.points)
        np.add.at(grad, self.first, 2 * self.a[:, None] * x + (self.b * xhat[self.second])[:, None])
        np.add.at(grad, self.second, (self.b * xhat[self.first])[:, None] + 2 * self.c[:, None] * y)
        self.points = np.clip(self.points - alpha * grad, self.lb[:, None], self.ub[:, None])


def _normalize(m: np.ndarray) -> np.ndarray:
    return m - m.min(axis=1, keepdims=True)


def hcms_solve(
    p: Problem,
    cfg: SolverConfig | None = None,
    seed: int | None = None,
    points: Mapping[int, Sequence[float]] | None = None,
    iters: int | None = None,
    adjust: bool | None = None,
) -> RunMetrics:
    """Synchronous min-sum over sampled points with a gradient adjustment per round.

    Each round every variable sends one q-message to each incident function
    and every function one r-message to each of its two variables, so a
    round costs 4|E| messages.
    """
    cfg = cfg or SolverConfig()
    seed = cfg.seed if seed is None else seed
    iters = cfg.maxsum_iters if iters is None else iters
    adjust = cfg.maxsum_adjust if adjust is None else adjust
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    if points is None:
        points = {i: discretize(p.domains[i], cfg.k, rng) for i in p.agents}
    state = MaxSumState(p, np.array([list(points[i]) for i in p.agents], dtype=float))
    n_edges = len(p.edges)
    for _ in range(iters):
        state.step()
        if adjust:
            state.adjust(cfg.alpha)
    values = state.current_values()
    assignment = {i: float(values[i]) for i in p.agents}
    return RunMetrics(
        algo="hcms",
        assignment=assignment,
        cost=global_cost(p, assignment),
        messages={"q": 2 * n_edges * iters, "r": 2 * n_edges * iters},
        elapsed=time.perf_counter() - start,
        seed=seed,
    )
