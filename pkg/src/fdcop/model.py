"""Functional DCOP instances: agents, interval domains and binary quadratic costs.

One agent controls exactly one continuous variable, so agent ``i`` and
variable ``i`` share the same integer id throughout the package.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

Assignment = dict[int, float]


class InvalidProblem(ValueError):
    """Raised for semantically invalid instances (bad domains, topology)."""


class ParseError(ValueError):
    """Raised for malformed problem files."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class IncompleteAssignment(KeyError):
    def __init__(self, missing: Iterable[int]):
        self.missing = sorted(missing)
        super().__init__(f"no value for variables {self.missing}")

    def __str__(self) -> str:
        return self.args[0]


@dataclass(frozen=True)
class IntervalDomain:
    lb: float
    ub: float

    def __post_init__(self):
        if not (math.isfinite(self.lb) and math.isfinite(self.ub)):
            raise InvalidProblem(f"domain bounds must be finite, got [{self.lb}, {self.ub}]")
        if not self.lb < self.ub:
            raise InvalidProblem(f"empty domain: lb={self.lb} >= ub={self.ub}")

    def contains(self, v: float) -> bool:
        return self.lb <= v <= self.ub

    def clamp(self, v: float) -> float:
        return min(max(v, self.lb), self.ub)


@dataclass(frozen=True)
class QuadraticCost:
    """f(x, y) = a*x**2 + b*x*y + c*y**2."""

    a: float
    b: float
    c: float

    def __call__(self, x: float, y: float) -> float:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def gradient(self, x: float, y: float) -> tuple[float, float]:
        return 2.0 * self.a * x + self.b * y, self.b * x + 2.0 * self.c * y


def evaluate_edge(cost: QuadraticCost, x: float, y: float) -> float:
    return cost(x, y)


def edge_gradient(cost: QuadraticCost, x: float, y: float) -> tuple[float, float]:
    return cost.gradient(x, y)


@dataclass(frozen=True)
class Edge:
    """A binary constraint; ``first`` plays the x role of the cost, ``second`` the y role."""

    first: int
    second: int
    cost: QuadraticCost

    @property
    def key(self) -> tuple[int, int]:
        return (min(self.first, self.second), max(self.first, self.second))

    def other(self, i: int) -> int:
        return self.second if i == self.first else self.first

    def evaluate(self, values: Mapping[int, float]) -> float:
        return self.cost(values[self.first], values[self.second])

    def cost_from(self, i: int, xi: float, xj: float) -> float:
        """Cost with endpoint ``i`` at ``xi`` and the other endpoint at ``xj``."""
        if i == self.first:
            return self.cost(xi, xj)
        return self.cost(xj, xi)


@dataclass(frozen=True)
class Problem:
    domains: tuple[IntervalDomain, ...]
    edges: tuple[Edge, ...]
    _by_key: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.domains)
        if n == 0:
            raise InvalidProblem("problem has no agents")
        by_key = {}
        for e in self.edges:
            for v in (e.first, e.second):
                if not 0 <= v < n:
                    raise InvalidProblem(f"edge ({e.first},{e.second}) references unknown agent {v}")
            if e.first == e.second:
                raise InvalidProblem(f"self-edge on agent {e.first}")
            if e.key in by_key:
                raise InvalidProblem(f"duplicate edge between {e.key[0]} and {e.key[1]}")
            by_key[e.key] = e
        object.__setattr__(self, "_by_key", by_key)
        if not self._connected():
            raise InvalidProblem("constraint graph is not connected")

    @property
    def n(self) -> int:
        return len(self.domains)

    @property
    def agents(self) -> range:
        return range(self.n)

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for e in self.edges:
            adj[e.first].append(e.second)
            adj[e.second].append(e.first)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def incident(self) -> tuple[tuple[Edge, ...], ...]:
        """Edges touching each agent, in neighbor order."""
        return tuple(tuple(self.edge(i, j) for j in self.neighbors[i]) for i in range(self.n))

    def edge(self, i: int, j: int) -> Edge:
        return self._by_key[(min(i, j), max(i, j))]

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self._by_key

    def _connected(self) -> bool:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for e in self.edges:
            adj[e.first].append(e.second)
            adj[e.second].append(e.first)
        seen = {0}
        queue = deque([0])
        while queue:
            for j in adj[queue.popleft()]:
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        return len(seen) == self.n


def check_assignment(p: Problem, a: Mapping[int, float], complete: bool = True) -> None:
    if complete:
        missing = [v for v in p.agents if v not in a]
        if missing:
            raise IncompleteAssignment(missing)
    for v, x in a.items():
        if not p.domains[v].contains(x):
            raise ValueError(f"value {x} for variable {v} outside {p.domains[v]}")


def global_cost(p: Problem, a: Mapping[int, float]) -> float:
    missing = [v for v in p.agents if v not in a]
    if missing:
        raise IncompleteAssignment(missing)
    return math.fsum(e.evaluate(a) for e in p.edges)


def local_objective(p: Problem, i: int, a: Mapping[int, float]) -> tuple[float, dict[int, float]]:
    """Sum of the costs incident to agent ``i`` and its gradient.

    The gradient has one entry for ``i`` and one for each neighbor.
    """
    scope = (i, *p.neighbors[i])
    missing = [v for v in scope if v not in a]
    if missing:
        raise IncompleteAssignment(missing)
    value = 0.0
    grad = dict.fromkeys(scope, 0.0)
    for e in p.incident[i]:
        x, y = a[e.first], a[e.second]
        value += e.cost(x, y)
        gx, gy = e.cost.gradient(x, y)
        grad[e.first] += gx
        grad[e.second] += gy
    return value, grad


# -- text format -------------------------------------------------------------

def _num(tok: str, lineno: int, what: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(lineno, f"{what}: expected a number, got {tok!r}") from None
    if not math.isfinite(v):
        raise ParseError(lineno, f"{what}: non-finite value {tok!r}")
    return v


def _int(tok: str, lineno: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(lineno, f"{what}: expected an integer, got {tok!r}") from None


def parse_problem(text: str) -> Problem:
    n = None
    domains: dict[int, IntervalDomain] = {}
    edges: list[Edge] = []
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        head = tok[0]
        if not seen_header:
            if tok != ["fdcop", "1"]:
                raise ParseError(lineno, "expected header 'fdcop 1'")
            seen_header = True
            continue
        if head == "agents":
            if len(tok) != 2:
                raise ParseError(lineno, "usage: agents <n>")
            if n is not None:
                raise ParseError(lineno, "duplicate 'agents' directive")
            n = _int(tok[1], lineno, "agents")
            if n < 1:
                raise InvalidProblem(f"line {lineno}: problem has no agents")
        elif head == "domain":
            if len(tok) != 4:
                raise ParseError(lineno, "usage: domain <i> <lb> <ub>")
            if n is None:
                raise ParseError(lineno, "'domain' before 'agents'")
            i = _int(tok[1], lineno, "domain index")
            if not 0 <= i < n:
                raise ParseError(lineno, f"domain index {i} out of range 0..{n - 1}")
            if i in domains:
                raise ParseError(lineno, f"duplicate domain for agent {i}")
            lb, ub = _num(tok[2], lineno, "lb"), _num(tok[3], lineno, "ub")
            try:
                domains[i] = IntervalDomain(lb, ub)
            except InvalidProblem as exc:
                raise InvalidProblem(f"line {lineno}: {exc}") from None
        elif head == "edge":
            if len(tok) != 6:
                raise ParseError(lineno, "usage: edge <i> <j> <a> <b> <c>")
            if n is None:
                raise ParseError(lineno, "'edge' before 'agents'")
            i, j = _int(tok[1], lineno, "edge i"), _int(tok[2], lineno, "edge j")
            a, b, c = (_num(t, lineno, name) for t, name in zip(tok[3:], "abc"))
            edges.append(Edge(i, j, QuadraticCost(a, b, c)))
        else:
            raise ParseError(lineno, f"unknown directive {head!r}")
    if not seen_header:
        raise ParseError(1, "expected header 'fdcop 1'")
    if n is None:
        raise InvalidProblem("missing 'agents' directive")
    missing = [i for i in range(n) if i not in domains]
    if missing:
        raise InvalidProblem(f"no domain for agents {missing}")
    return Problem(tuple(domains[i] for i in range(n)), tuple(edges))


def serialize_problem(p: Problem) -> str:
    lines = ["fdcop 1", f"agents {p.n}"]
    lines += [f"domain {i} {d.lb!r} {d.ub!r}" for i, d in enumerate(p.domains)]
    lines += [
        f"edge {e.first} {e.second} {e.cost.a!r} {e.cost.b!r} {e.cost.c!r}" for e in p.edges
    ]
    return "\n".join(lines) + "\n"


def figure1_problem() -> Problem:
    """Four-agent example: x0 is joined to x1, x2, x3 and x1 to x2, domains [-20, 20]."""
    dom = IntervalDomain(-20.0, 20.0)
    return Problem(
        (dom,) * 4,
        (
            Edge(0, 1, QuadraticCost(1.0, -2.0, 2.0)),
            Edge(0, 2, QuadraticCost(0.0, 1.0, 3.0)),
            Edge(0, 3, QuadraticCost(0.0, 1.0, 1.0)),
            Edge(1, 2, QuadraticCost(1.0, -1.0, 2.0)),
        ),
    )
