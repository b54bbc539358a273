"""Random benchmark instances and the experiment runner behind ``fdcop bench``."""

from __future__ import annotations

import csv
import heapq
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence, TextIO

import numpy as np

from .baselines import cocoa_solve, hcms_solve
from .ccocoa import SolverConfig
from .ccocoa import solve as ccocoa_solve
from .engine import RunMetrics
from .model import Edge, IntervalDomain, Problem, QuadraticCost

TOPOLOGIES = ("sparse", "dense", "scalefree", "tree")
DEFAULT_EDGE_PROB = {"sparse": 0.2, "dense": 0.6}
CSV_FIELDS = ("topology", "n", "k", "algo", "seed", "cost", "messages", "hold_events", "time_s", "status")


@dataclass(frozen=True)
class GeneratorConfig:
    topology: str = "sparse"
    n: int = 50
    edge_prob: float | None = None
    attach: int = 2
    coeff_range: tuple[float, float] = (-5.0, 5.0)
    domain_range: tuple[float, float] = (-50.0, 50.0)

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise ValueError(f"topology must be one of {TOPOLOGIES}")
        if self.n < 2:
            raise ValueError("need at least 2 agents")
        if self.topology in DEFAULT_EDGE_PROB:
            p = self.prob
            if not 0 < p <= 1:
                raise ValueError(f"edge probability must be in (0, 1], got {p}")
        if self.attach < 1:
            raise ValueError("attach must be >= 1")

    @property
    def prob(self) -> float:
        if self.edge_prob is not None:
            return self.edge_prob
        return DEFAULT_EDGE_PROB.get(self.topology, 0.2)


def _build(n: int, pairs: Iterable[tuple[int, int]], rng: np.random.Generator,
           coeff_range=(-5.0, 5.0), domain_range=(-50.0, 50.0)) -> Problem:
    lo, hi = coeff_range
    edges = tuple(
        Edge(i, j, QuadraticCost(*(float(v) for v in rng.uniform(lo, hi, 3)))) for i, j in sorted(pairs)
    )
    dom = IntervalDomain(*domain_range)
    return Problem((dom,) * n, edges)


def _components(n: int, pairs: Iterable[tuple[int, int]]) -> list[int]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in pairs:
        parent[find(i)] = find(j)
    return [find(x) for x in range(n)]


def er_pairs(n: int, p: float, rng: np.random.Generator) -> set[tuple[int, int]]:
    """Erdős–Rényi pairs, then random bridging edges until the graph is connected."""
    pairs = {(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p}
    while True:
        comp = _components(n, pairs)
        if len(set(comp)) == 1:
            return pairs
        u = int(rng.integers(n))
        outside = [v for v in range(n) if comp[v] != comp[u]]
        v = outside[int(rng.integers(len(outside)))]
        pairs.add((min(u, v), max(u, v)))


def scale_free_pairs(n: int, attach: int, rng: np.random.Generator) -> set[tuple[int, int]]:
    """Barabási–Albert growth from a clique on ``attach`` nodes."""
    m = min(attach, n)
    pairs = {(i, j) for i in range(m) for j in range(i + 1, m)}
    degree = np.zeros(n)
    degree[:m] = m - 1
    for t in range(m, n):
        w = degree[:t]
        prob = w / w.sum() if w.sum() > 0 else None
        targets = rng.choice(t, size=min(m, t), replace=False, p=prob)
        for s in targets:
            pairs.add((int(s), t))
            degree[s] += 1
        degree[t] = len(targets)
    return pairs


def tree_pairs(n: int, rng: np.random.Generator) -> set[tuple[int, int]]:
    """Uniform random labelled tree from a random Prüfer sequence."""
    if n == 2:
        return {(0, 1)}
    seq = [int(x) for x in rng.integers(n, size=n - 2)]
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    pairs = set()
    for x in seq:
        leaf = heapq.heappop(leaves)
        pairs.add((min(leaf, x), max(leaf, x)))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    pairs.add((u, v))
    return pairs


def gen_erdos_renyi(n: int, p: float, rng: np.random.Generator, **ranges) -> Problem:
    return _build(n, er_pairs(n, p, rng), rng, **ranges)


def gen_scale_free(n: int, attach: int, rng: np.random.Generator, **ranges) -> Problem:
    return _build(n, scale_free_pairs(n, attach, rng), rng, **ranges)


def gen_random_tree(n: int, rng: np.random.Generator, **ranges) -> Problem:
    return _build(n, tree_pairs(n, rng), rng, **ranges)


def generate(g: GeneratorConfig, seed: int) -> Problem:
    rng = np.random.default_rng(seed)
    ranges = {"coeff_range": g.coeff_range, "domain_range": g.domain_range}
    if g.topology == "tree":
        return gen_random_tree(g.n, rng, **ranges)
    if g.topology == "scalefree":
        return gen_scale_free(g.n, g.attach, rng, **ranges)
    return gen_erdos_renyi(g.n, g.prob, rng, **ranges)


# -- experiments ---------------------------------------------------------------

SOLVERS = {"ccocoa": ccocoa_solve, "cocoa": cocoa_solve, "hcms": hcms_solve}


@dataclass(frozen=True)
class AlgoSpec:
    label: str
    solver: str
    cfg: SolverConfig = field(default_factory=SolverConfig)

    def run(self, p: Problem, seed: int) -> RunMetrics:
        return SOLVERS[self.solver](p, self.cfg, seed=seed)


def parse_algos(text: str, base: SolverConfig | None = None) -> list[AlgoSpec]:
    """Parse ``"ccocoa,cocoa,hcms@500"``; ``@N`` sets the Max-Sum round count."""
    base = base or SolverConfig()
    out = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        name, _, iters = tok.partition("@")
        if name not in SOLVERS:
            raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(SOLVERS)}")
        cfg = base
        if iters:
            if name != "hcms":
                raise ValueError(f"only hcms takes an iteration count, got {tok!r}")
            cfg = replace(base, maxsum_iters=int(iters))
        out.append(AlgoSpec(tok, name, cfg))
    if not out:
        raise ValueError("no algorithms given")
    return out


@dataclass(frozen=True)
class ExperimentSpec:
    generator: GeneratorConfig
    algorithms: Sequence[AlgoSpec]
    instances: int = 50
    base_seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.instances < 1:
            raise ValueError("instances must be >= 1")


def _run_instance(spec: ExperimentSpec, index: int) -> list[dict]:
    seed = spec.base_seed + index
    g = spec.generator
    p = generate(g, seed)
    rows = []
    for algo in spec.algorithms:
        row = {"topology": g.topology, "n": g.n, "k": algo.cfg.k, "algo": algo.label, "seed": seed}
        try:
            m = algo.run(p, seed)
        except Exception as exc:  # recorded as an error row, excluded from means
            row.update(cost="", messages="", hold_events="", time_s="",
                       status=f"error: {type(exc).__name__}: {exc}")
        else:
            row.update(cost=m.cost, messages=m.total_messages, hold_events=m.hold_events,
                       time_s=m.elapsed, status="ok")
        rows.append(row)
    return rows


def run_experiment(spec: ExperimentSpec) -> list[dict]:
    """Per-run rows in (instance, algorithm) order followed by one mean row per algorithm."""
    indices = range(1, spec.instances + 1)
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            chunks = list(pool.map(_run_instance, [spec] * spec.instances, indices))
    else:
        chunks = [_run_instance(spec, i) for i in indices]
    rows = [r for chunk in chunks for r in chunk]
    return rows + aggregate_rows(rows, spec)


def aggregate_rows(rows: Sequence[dict], spec: ExperimentSpec) -> list[dict]:
    out = []
    for algo in spec.algorithms:
        mine = [r for r in rows if r["algo"] == algo.label]
        ok = [r for r in mine if r["status"] == "ok"]

        def mean(key):
            return math.fsum(r[key] for r in ok) / len(ok) if ok else ""

        out.append({
            "topology": spec.generator.topology, "n": spec.generator.n, "k": algo.cfg.k,
            "algo": algo.label, "seed": "mean", "cost": mean("cost"), "messages": mean("messages"),
            "hold_events": mean("hold_events"), "time_s": mean("time_s"),
            "status": f"aggregate ok={len(ok)} excluded={len(mine) - len(ok)}",
        })
    return out


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(rows: Iterable[dict], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([_fmt(r[f]) for f in CSV_FIELDS])


def to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()
