import pytest

from fdcop.ccocoa import CCoCoA, SolverConfig
from fdcop.engine import (
    AgentRuntime,
    AgentState,
    EngineFault,
    Inquiry,
    SetValue,
    Simulation,
    UpdateState,
)
from fdcop.model import Edge, IntervalDomain, Problem, QuadraticCost

from conftest import GOLDEN_POINTS, random_instance


def sim(p, k=2, **kw):
    return Simulation(p, CCoCoA(SolverConfig(k=k)), k, seed=0, **kw)


def test_deliver_counts_and_queues(fig1):
    s = sim(fig1)
    s.deliver(UpdateState(0, 1, AgentState.ACTIVE))
    s.deliver(Inquiry(0, 1, {}))
    assert s.counts["update_state"] == 1 and s.counts["inquiry"] == 1
    assert len(s.agents[1].mailbox) == 2


@pytest.mark.parametrize("sender, receiver", [(1, 3), (2, 2), (0, 7)])
def test_deliver_rejects_non_neighbors(fig1, sender, receiver):
    with pytest.raises(EngineFault):
        sim(fig1).deliver(UpdateState(sender, receiver, AgentState.ACTIVE))


def test_idle_active_neighbors_tracks_updates(fig1):
    s = sim(fig1)
    assert s.idle_active_neighbors(0) == 3
    s.handle_update_state(1, 0, AgentState.DONE)
    s.handle_update_state(2, 0, AgentState.HOLD)
    assert s.idle_active_neighbors(0) == 1
    s.handle_update_state(3, 0, AgentState.DONE)
    assert s.idle_active_neighbors(0) == 0


@pytest.mark.parametrize(
    "path",
    [
        [AgentState.DONE],
        [AgentState.HOLD],
        [AgentState.ACTIVE, AgentState.DONE, AgentState.ACTIVE],
        [AgentState.ACTIVE, AgentState.HOLD, AgentState.DONE],
    ],
)
def test_illegal_transitions(path):
    a = AgentRuntime(0, (1,))
    with pytest.raises(EngineFault):
        for s in path:
            a.transition(s)


def test_legal_lifecycle():
    a = AgentRuntime(0, (1,))
    for s in (AgentState.ACTIVE, AgentState.HOLD, AgentState.ACTIVE, AgentState.DONE):
        a.transition(s)
    assert a.state is AgentState.DONE


def test_retracted_value_is_a_fault(fig1):
    s = sim(fig1)
    s.deliver(SetValue(1, 0, 1, 2.0, {}))
    s.deliver(SetValue(1, 0, 1, 3.0, {}))
    with pytest.raises(EngineFault, match="changed"):
        s.pump()


def test_forced_order_must_be_eligible(fig1):
    with pytest.raises(ValueError, match="not eligible"):
        sim(fig1, points=GOLDEN_POINTS, order=[0, 0]).run()


def test_wrong_point_count(fig1):
    with pytest.raises(ValueError, match="points"):
        sim(fig1, k=3, points=GOLDEN_POINTS)


def test_golden_trace_shape(golden):
    kinds = [m.kind for m in golden.trace]
    assert len(kinds) == golden.total_messages == 40
    assert golden.messages == {"update_state": 16, "inquiry": 8, "cost_map": 8, "set_value": 8}
    # the first activation: a0 announces itself and inquires all three neighbors
    assert [(m.sender, m.receiver, m.kind) for m in golden.trace[:6]] == [
        (0, 1, "update_state"), (0, 1, "inquiry"),
        (0, 2, "update_state"), (0, 2, "inquiry"),
        (0, 3, "update_state"), (0, 3, "inquiry"),
    ]
    assert not any(m.kind == "update_state" and m.state is AgentState.HOLD for m in golden.trace)


@pytest.mark.parametrize("seed", range(15))
def test_message_conservation(seed):
    """Every inquiry gets exactly one reply; every hold costs 4 messages per neighbor."""
    p = random_instance(seed, n_max=10)
    s = sim(p, k=3, trace=True)
    m = s.run()
    c = m.messages
    assert c["inquiry"] == c["cost_map"]
    assert c["set_value"] == 2 * len(p.edges)
    hold_msgs = sum(a.hold_events * len(a.neighbors) for a in s.agents)
    assert m.total_messages == 10 * len(p.edges) + 4 * hold_msgs
    assert all(not a.mailbox for a in s.agents)


@pytest.mark.parametrize("seed", range(5))
def test_runs_are_deterministic(seed):
    p = random_instance(seed, n_max=10)
    a = sim(p, k=3).run()
    b = sim(p, k=3).run()
    assert a.key() == b.key()


def _zero_star(n):
    q = QuadraticCost(0.0, 0.0, 0.0)
    return Problem((IntervalDomain(-1, 1),) * n, tuple(Edge(0, j, q) for j in range(1, n)))


def test_all_ties_forces_holds_and_beta():
    found = False
    for seed in range(10):
        s = Simulation(_zero_star(4), CCoCoA(SolverConfig(k=3)), 3, seed=seed)
        m = s.run()
        assert len(m.assignment) == 4
        assert all(a.state is AgentState.DONE for a in s.agents)
        found |= m.hold_events > 0 and m.beta_final > 1
    assert found


def test_hold_then_release_by_done_neighbor():
    # a two-agent zero-cost problem: the first activated agent must hold
    # (3-way tie, beta=1, one idle neighbor); the second then assigns because
    # its only neighbor is in HOLD, and its DONE message releases the first.
    q = QuadraticCost(0.0, 0.0, 0.0)
    p = Problem((IntervalDomain(-1, 1),) * 2, (Edge(0, 1, q),))
    s = Simulation(p, CCoCoA(SolverConfig(k=3)), 3, seed=0, order=[0, 1, 0])
    m = s.run()
    assert m.hold_events == 1 and m.beta_final == 1
    assert m.total_messages == 10 + 4
    assert all(-1 <= v <= 1 for v in m.assignment.values())
