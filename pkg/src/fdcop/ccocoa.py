"""C-CoCoA: discrete cooperative cost-map election followed by local gradient refinement."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from . import engine
from .engine import AgentRuntime, EngineFault, RunMetrics
from .model import IntervalDomain, Problem, local_objective

FREEZE_POLICIES = ("latest", "committed", "none")


@dataclass(frozen=True)
class SolverConfig:
    """Parameters shared by C-CoCoA and the baselines.

    ``freeze`` selects which neighbor variables stay fixed while an agent
    refines its local objective: ``"latest"`` holds the neighbor whose value
    arrived last, ``"committed"`` holds every committed neighbor and
    ``"none"`` lets all of them move.  Refined neighbor copies are always
    discarded; only the agent's own value is committed.
    """

    k: int = 3
    beta0: int = 1
    alpha: float = 0.01
    max_refine_iters: int = 100
    refine_tol: float = 1e-8
    tie_tol: float = 1e-9
    seed: int = 0
    freeze: str = "latest"
    third_party: bool = False
    maxsum_iters: int = 100
    maxsum_adjust: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.beta0 < 1:
            raise ValueError("beta0 must be >= 1")
        if not self.alpha > 0:
            raise ValueError("alpha must be > 0")
        if self.max_refine_iters < 1:
            raise ValueError("max_refine_iters must be >= 1")
        if not self.refine_tol > 0:
            raise ValueError("refine_tol must be > 0")
        if self.tie_tol < 0:
            raise ValueError("tie_tol must be >= 0")
        if self.freeze not in FREEZE_POLICIES:
            raise ValueError(f"freeze must be one of {FREEZE_POLICIES}")
        if self.maxsum_iters < 0:
            raise ValueError("maxsum_iters must be >= 0")


class CostEntry(NamedTuple):
    value: float  # responder value achieving the minimum
    cost: float


CostMap = tuple[CostEntry, ...]


class Aggregate(NamedTuple):
    delta: float
    rho: tuple[int, ...]
    totals: tuple[float, ...]


def discretize(d: IntervalDomain, k: int, rng: np.random.Generator, max_tries: int = 100) -> list[float]:
    """Draw ``k`` distinct points uniformly from ``d``, in draw order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    pts = [float(x) for x in rng.uniform(d.lb, d.ub, size=k)]
    for _ in range(max_tries):
        pts = [d.clamp(x) for x in pts]
        if len(set(pts)) == k:
            return pts
        seen: set[float] = set()
        for idx, x in enumerate(pts):
            if x in seen:
                pts[idx] = float(rng.uniform(d.lb, d.ub))
            seen.add(pts[idx])
    raise ValueError(f"cannot draw {k} distinct points from {d}")


def inquiry_reply(
    p: Problem,
    j: int,
    i: int,
    inquirer_points: Sequence[float],
    responder_points: Sequence[float],
    committed: float | None = None,
    known: Mapping[int, float] | None = None,
    third_party: bool = False,
) -> CostMap:
    """Cost map agent ``j`` returns to inquirer ``i``.

    For every point of ``i`` the entry holds the cheapest cost over ``j``'s
    candidates: its committed value if it has one, else its own points.
    Only the (i, j) constraint is summed unless ``third_party`` is set, in
    which case constraints from ``j`` to agents with a value in ``known``
    are added.
    """
    if not p.has_edge(i, j) or i == j:
        raise EngineFault(f"agent {i} cannot inquire non-neighbor {j}")
    edge = p.edge(i, j)
    candidates = (committed,) if committed is not None else tuple(responder_points)
    extra = [0.0] * len(candidates)
    if third_party and known:
        for e in p.incident[j]:
            m = e.other(j)
            if m != i and m in known:
                for l, xj in enumerate(candidates):
                    extra[l] += e.cost_from(j, xj, known[m])
    zeta = []
    for xi in inquirer_points:
        best_v, best_c = candidates[0], edge.cost_from(i, xi, candidates[0]) + extra[0]
        for l in range(1, len(candidates)):
            c = edge.cost_from(i, xi, candidates[l]) + extra[l]
            if c < best_c:
                best_v, best_c = candidates[l], c
        zeta.append(CostEntry(best_v, best_c))
    return tuple(zeta)


def aggregate(zetas: Sequence[CostMap], k: int, tie_tol: float = 1e-9) -> Aggregate:
    if any(len(z) != k for z in zetas):
        raise ValueError(f"cost maps must all have {k} entries, got {[len(z) for z in zetas]}")
    totals = tuple(sum(z[idx].cost for z in zetas) for idx in range(k))
    delta = min(totals)
    slack = tie_tol * max(1.0, abs(delta))
    rho = tuple(idx for idx, t in enumerate(totals) if abs(t - delta) <= slack)
    return Aggregate(delta, rho, totals)


def unique_first(rho: Sequence[int], beta: int, idle_active: int, rng: np.random.Generator) -> int | None:
    """Point index to assign, or ``None`` when the agent should hold."""
    if not rho:
        raise ValueError("rho is empty")
    if len(rho) <= beta or idle_active == 0:
        if len(rho) == 1:
            return rho[0]
        return rho[int(rng.integers(len(rho)))]
    return None


def local_refine(
    p: Problem,
    i: int,
    chi: Mapping[int, float],
    cfg: SolverConfig,
    frozen: frozenset[int] | set[int] = frozenset(),
    history: list[float] | None = None,
) -> float:
    """Projected gradient descent on agent ``i``'s local objective.

    All partials are taken at the previous iterate, then every free variable
    moves and is clamped to its domain.  Returns the refined value of x_i.
    If ``history`` is given, the objective at every iterate is appended to it.
    """
    v = {x: float(chi[x]) for x in (i, *p.neighbors[i])}
    free = [x for x in v if x == i or x not in frozen]
    for _ in range(cfg.max_refine_iters):
        value, grad = local_objective(p, i, v)
        if history is not None:
            history.append(value)
        step = 0.0
        for x in free:
            new = p.domains[x].clamp(v[x] - cfg.alpha * grad[x])
            step = max(step, abs(new - v[x]))
            v[x] = new
        if step < cfg.refine_tol:
            break
    if history is not None:
        history.append(local_objective(p, i, v)[0])
    return p.domains[i].clamp(v[i])


def frozen_neighbors(agent: AgentRuntime, policy: str) -> frozenset[int]:
    if policy == "latest":
        return frozenset() if agent.last_commit is None else frozenset({agent.last_commit})
    if policy == "committed":
        return frozenset(agent.cpa)
    return frozenset()


class CCoCoA:
    name = "ccocoa"

    def __init__(self, cfg: SolverConfig | None = None):
        self.cfg = cfg or SolverConfig()

    def discretize(self, d: IntervalDomain, k: int, rng: np.random.Generator) -> list[float]:
        return discretize(d, k, rng)

    def reply(self, p: Problem, responder: AgentRuntime, inquirer: int,
              cpa: Mapping[int, float], points: Mapping[int, Sequence[float]]) -> CostMap:
        committed = responder.committed
        if committed is None:
            committed = cpa.get(responder.id)
        known = {**responder.cpa, **cpa} if self.cfg.third_party else None
        return inquiry_reply(p, responder.id, inquirer, points[inquirer], points[responder.id],
                             committed, known, self.cfg.third_party)

    def elect(self, agent: AgentRuntime, points: Sequence[float], cost_maps: Sequence[CostMap],
              beta: int, idle_active: int, rng: np.random.Generator):
        agg = aggregate(cost_maps, len(points), self.cfg.tie_tol)
        idx = unique_first(agg.rho, beta, idle_active, rng)
        if idx is None:
            return None
        chi = {j: zeta[idx].value for j, zeta in zip(agent.neighbors, cost_maps)}
        chi[agent.id] = points[idx]
        return points[idx], chi

    def commit(self, p: Problem, agent: AgentRuntime, theta: float, chi: Mapping[int, float]) -> float:
        return local_refine(p, agent.id, chi, self.cfg, frozen_neighbors(agent, self.cfg.freeze))

    def solve(self, p: Problem, seed: int | None = None, **kwargs) -> RunMetrics:
        """Run to completion; ``points``/``order``/``trace`` are passed to the simulator."""
        return engine.run(self, p, self.cfg, self.cfg.seed if seed is None else seed, **kwargs)


def solve(p: Problem, cfg: SolverConfig | None = None, seed: int | None = None, **kwargs) -> RunMetrics:
    return CCoCoA(cfg).solve(p, seed, **kwargs)
