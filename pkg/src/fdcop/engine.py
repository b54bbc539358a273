"""Sequential message-passing simulator for the CoCoA family of solvers.

Agents exchange four kinds of messages (state updates, inquiries, cost-map
replies and value announcements).  One activation is processed to
quiescence before the scheduler picks the next agent, which keeps runs
exactly reproducible and message counts exact.

The solver object plugged into :func:`run` supplies the numerical parts:

``discretize(domain, k, rng)``
    candidate points of one variable.
``reply(problem, responder, inquirer, cpa, points)``
    the cost map a neighbor returns for an inquiry.
``elect(agent, points, cost_maps, beta, idle_active, rng)``
    ``(theta, chi)`` when the agent may assign, ``None`` to hold.
``commit(problem, agent, theta, chi)``
    the value finally assigned.
"""

from __future__ import annotations

import time
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, ClassVar, Iterable, Mapping, Sequence

import numpy as np

from .model import Assignment, Problem, global_cost


class AgentState(Enum):
    IDLE = "IDLE"
    ACTIVE = "ACTIVE"
    HOLD = "HOLD"
    DONE = "DONE"


_LEGAL = {
    AgentState.IDLE: {AgentState.ACTIVE},
    AgentState.ACTIVE: {AgentState.HOLD, AgentState.DONE},
    AgentState.HOLD: {AgentState.ACTIVE},
    AgentState.DONE: set(),
}


class EngineFault(RuntimeError):
    """Protocol violation: bad topology, illegal transition, retracted value."""


class Livelock(RuntimeError):
    """Raised when the tie bound grows past the number of candidate points."""


@dataclass(frozen=True)
class Message:
    sender: int
    receiver: int
    kind: ClassVar[str] = "message"

    def summary(self) -> str:
        return ""


@dataclass(frozen=True)
class UpdateState(Message):
    state: AgentState
    kind: ClassVar[str] = "update_state"

    def summary(self) -> str:
        return self.state.value


@dataclass(frozen=True)
class Inquiry(Message):
    cpa: Mapping[int, float]
    kind: ClassVar[str] = "inquiry"

    def summary(self) -> str:
        return "cpa=" + _fmt_assignment(self.cpa)


@dataclass(frozen=True)
class CostMapReply(Message):
    zeta: tuple  # of ccocoa.CostEntry, one per inquirer point
    kind: ClassVar[str] = "cost_map"

    def summary(self) -> str:
        return "[" + ", ".join(f"{v:.6g}:{c:.6g}" for v, c in self.zeta) + "]"


@dataclass(frozen=True)
class SetValue(Message):
    variable: int
    value: float
    cpa: Mapping[int, float]
    kind: ClassVar[str] = "set_value"

    def summary(self) -> str:
        return f"x{self.variable}={self.value:.6g} cpa={_fmt_assignment(self.cpa)}"


MESSAGE_KINDS = ("update_state", "inquiry", "cost_map", "set_value")


def _fmt_assignment(a: Mapping[int, float]) -> str:
    return "{" + ", ".join(f"x{k}={v:.6g}" for k, v in sorted(a.items())) + "}"


@dataclass
class AgentRuntime:
    id: int
    neighbors: tuple[int, ...]
    state: AgentState = AgentState.IDLE
    cpa: dict[int, float] = field(default_factory=dict)
    committed: float | None = None
    view: dict[int, AgentState] = field(default_factory=dict)
    mailbox: deque = field(default_factory=deque)
    replies: dict[int, tuple] = field(default_factory=dict)
    last_commit: int | None = None
    released: bool = False
    hold_events: int = 0
    set_value_rounds: int = 0

    def __post_init__(self):
        self.view = dict.fromkeys(self.neighbors, AgentState.IDLE)

    def transition(self, new: AgentState) -> None:
        if new not in _LEGAL[self.state]:
            raise EngineFault(f"agent {self.id}: illegal transition {self.state.value} -> {new.value}")
        self.state = new

    def idle_active_neighbors(self) -> int:
        return sum(s in (AgentState.IDLE, AgentState.ACTIVE) for s in self.view.values())


@dataclass
class RunMetrics:
    algo: str
    assignment: Assignment
    cost: float
    messages: dict[str, int]
    hold_events: int = 0
    beta_final: int = 1
    elapsed: float = 0.0
    seed: int | None = None
    trace: list | None = field(default=None, repr=False, compare=False)

    @property
    def total_messages(self) -> int:
        return sum(self.messages.values())

    def key(self) -> tuple:
        """Everything except wall-clock time, for determinism checks."""
        return (
            self.algo,
            tuple(sorted(self.assignment.items())),
            self.cost,
            tuple(sorted(self.messages.items())),
            self.hold_events,
            self.beta_final,
            self.seed,
        )


class Simulation:
    """One run of a CoCoA-style solver on one problem."""

    def __init__(
        self,
        problem: Problem,
        solver: Any,
        k: int,
        beta0: int = 1,
        seed: int | None = None,
        points: Mapping[int, Sequence[float]] | None = None,
        order: Iterable[int] | None = None,
        trace: bool = False,
    ):
        self.problem = problem
        self.solver = solver
        self.k = k
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        if points is None:
            points = {i: solver.discretize(problem.domains[i], k, self.rng) for i in problem.agents}
        self.points = {i: tuple(float(x) for x in points[i]) for i in problem.agents}
        for i, pts in self.points.items():
            if len(pts) != k:
                raise ValueError(f"agent {i} has {len(pts)} points, expected {k}")
        self.agents = [AgentRuntime(i, problem.neighbors[i]) for i in problem.agents]
        self.beta = beta0
        self.counts: Counter = Counter(dict.fromkeys(MESSAGE_KINDS, 0))
        self.trace: list[Message] | None = [] if trace else None
        self.done: set[int] = set()
        self._order = deque(order or ())
        self._ready: deque[int] = deque()
        self._deadlock = False

    # -- transport ------------------------------------------------------------

    def deliver(self, msg: Message) -> None:
        if not 0 <= msg.receiver < self.problem.n:
            raise EngineFault(f"unknown receiver {msg.receiver}")
        if msg.sender == msg.receiver or not self.problem.has_edge(msg.sender, msg.receiver):
            raise EngineFault(f"agent {msg.sender} cannot message non-neighbor {msg.receiver}")
        self.agents[msg.receiver].mailbox.append(msg)
        self._ready.append(msg.receiver)
        self.counts[msg.kind] += 1

    def pump(self) -> None:
        while self._ready:
            agent = self.agents[self._ready.popleft()]
            msg = agent.mailbox.popleft()
            if self.trace is not None:
                self.trace.append(msg)
            self._handle(agent, msg)

    def _handle(self, agent: AgentRuntime, msg: Message) -> None:
        if isinstance(msg, UpdateState):
            self.handle_update_state(msg.sender, agent.id, msg.state)
        elif isinstance(msg, Inquiry):
            zeta = self.solver.reply(self.problem, agent, msg.sender, msg.cpa, self.points)
            self.deliver(CostMapReply(agent.id, msg.sender, tuple(zeta)))
        elif isinstance(msg, CostMapReply):
            agent.replies[msg.sender] = msg.zeta
        elif isinstance(msg, SetValue):
            known = agent.cpa.get(msg.variable)
            if known is not None and known != msg.value:
                raise EngineFault(f"agent {msg.variable} changed its value {known} -> {msg.value}")
            agent.cpa[msg.variable] = msg.value
            agent.last_commit = msg.variable
        else:
            raise EngineFault(f"unknown message {msg!r}")

    # -- protocol -------------------------------------------------------------

    def idle_active_neighbors(self, i: int) -> int:
        return self.agents[i].idle_active_neighbors()

    def handle_update_state(self, i: int, j: int, s: AgentState) -> None:
        """Agent ``j`` learns that its neighbor ``i`` is now in state ``s``."""
        receiver = self.agents[j]
        receiver.view[i] = s
        if s is AgentState.HOLD and receiver.state is AgentState.HOLD:
            # the receiver can only judge its own neighborhood
            if receiver.idle_active_neighbors() == 0:
                self._deadlock = True
        elif s is AgentState.DONE and receiver.state is AgentState.HOLD:
            receiver.released = True

    def _broadcast_state(self, agent: AgentRuntime, s: AgentState) -> None:
        for j in agent.neighbors:
            self.deliver(UpdateState(agent.id, j, s))

    def activate(self, i: int) -> None:
        agent = self.agents[i]
        agent.transition(AgentState.ACTIVE)
        agent.released = False
        agent.replies = {}
        for j in agent.neighbors:
            self.deliver(UpdateState(i, j, AgentState.ACTIVE))
            self.deliver(Inquiry(i, j, dict(agent.cpa)))
        self.pump()
        cost_maps = [agent.replies[j] for j in agent.neighbors]
        decision = self.solver.elect(agent, self.points[i], cost_maps, self.beta, agent.idle_active_neighbors(), self.rng)
        if decision is None:
            agent.transition(AgentState.HOLD)
            agent.hold_events += 1
            self._broadcast_state(agent, AgentState.HOLD)
            self.pump()
            if self._deadlock:
                self._bump_beta()
            return
        theta, chi = decision
        value = float(self.solver.commit(self.problem, agent, theta, chi))
        if not self.problem.domains[i].contains(value):
            raise EngineFault(f"agent {i} committed {value} outside {self.problem.domains[i]}")
        agent.committed = value
        agent.transition(AgentState.DONE)
        self.done.add(i)
        agent.set_value_rounds += 1
        for j in agent.neighbors:
            self.deliver(UpdateState(i, j, AgentState.DONE))
            self.deliver(SetValue(i, j, i, value, dict(agent.cpa)))
        self.pump()

    def _bump_beta(self) -> None:
        self._deadlock = False
        self.beta += 1
        if self.beta > self.k:
            raise Livelock(f"tie bound {self.beta} exceeds k={self.k}; every point ties everywhere")
        for a in self.agents:
            if a.state is AgentState.HOLD:
                a.released = True

    def eligible(self) -> list[int]:
        return [
            a.id
            for a in self.agents
            if a.state is AgentState.IDLE or (a.state is AgentState.HOLD and a.released)
        ]

    def select(self) -> int:
        eligible = self.eligible()
        if not eligible:
            # every unassigned agent waits on another one
            self._bump_beta()
            eligible = self.eligible()
        if self._order:
            i = self._order.popleft()
            if i not in eligible:
                raise ValueError(f"forced activation of agent {i}, which is not eligible")
            return i
        return eligible[int(self.rng.integers(len(eligible)))]

    def run(self) -> RunMetrics:
        start = time.perf_counter()
        while len(self.done) < self.problem.n:
            self.activate(self.select())
        elapsed = time.perf_counter() - start
        assert all(not a.mailbox for a in self.agents)
        assignment = {a.id: a.committed for a in self.agents}
        return RunMetrics(
            algo=getattr(self.solver, "name", type(self.solver).__name__),
            assignment=assignment,
            cost=global_cost(self.problem, assignment),
            messages=dict(self.counts),
            hold_events=sum(a.hold_events for a in self.agents),
            beta_final=self.beta,
            elapsed=elapsed,
            seed=self.seed,
            trace=self.trace,
        )


def run(solver: Any, p: Problem, cfg: Any, seed: int | None = None, **kwargs) -> RunMetrics:
    """Drive ``solver`` to completion on ``p``; ``cfg`` supplies ``k`` and ``beta0``."""
    sim = Simulation(p, solver, cfg.k, cfg.beta0, seed=seed, **kwargs)
    return sim.run()
