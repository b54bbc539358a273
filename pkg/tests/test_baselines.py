import numpy as np
import pytest

from fdcop.baselines import MaxSumState, cocoa_solve, hcms_solve
from fdcop.bench import gen_random_tree
from fdcop.ccocoa import SolverConfig, solve
from fdcop.model import Edge, IntervalDomain, Problem, QuadraticCost
from fdcop.oracle import exhaustive_search

from conftest import GOLDEN_POINTS, pd_instances, random_instance


def test_cocoa_commits_sampled_points(fig1):
    m = cocoa_solve(fig1, SolverConfig(k=2), points=GOLDEN_POINTS, order=[0, 1, 2, 3])
    assert m.algo == "cocoa"
    assert m.assignment[0] == 1.0
    assert all(m.assignment[i] in GOLDEN_POINTS[i] for i in fig1.agents)
    assert m.total_messages == 40


def test_cocoa_k1_commits_the_only_point():
    p = random_instance(4)
    pts = {i: [0.1 * i] for i in p.agents}
    m = cocoa_solve(p, SolverConfig(k=1), points=pts)
    assert m.assignment == {i: 0.1 * i for i in p.agents}


def test_ccocoa_beats_cocoa_on_convex_instances():
    for seed, p in pd_instances(10):
        a = solve(p, SolverConfig(k=3), seed=seed).cost
        b = cocoa_solve(p, SolverConfig(k=3), seed=seed).cost
        assert a <= b + 1e-9


def test_hcms_single_edge_matches_exhaustive():
    p = Problem((IntervalDomain(-3, 3),) * 2, (Edge(0, 1, QuadraticCost(1.5, -2.0, 0.5)),))
    pts = {0: [-2.0, 0.5, 1.0], 1: [-1.0, 2.5, 3.0]}
    m = hcms_solve(p, points=pts, iters=5, adjust=False)
    _, best = exhaustive_search(p, pts)
    assert m.cost == best


def test_hcms_zero_costs():
    q = QuadraticCost(0.0, 0.0, 0.0)
    p = Problem((IntervalDomain(-1, 1),) * 3, (Edge(0, 1, q), Edge(1, 2, q)))
    assert hcms_solve(p).cost == 0.0


@pytest.mark.parametrize("iters", [0, 1, 7])
def test_hcms_message_count(fig1, iters):
    m = hcms_solve(fig1, iters=iters)
    assert m.total_messages == 4 * len(fig1.edges) * iters
    assert m.messages == {"q": 2 * 4 * iters, "r": 2 * 4 * iters}


def test_hcms_zero_iters_selects_first_point(fig1):
    m = hcms_solve(fig1, points=GOLDEN_POINTS, iters=0)
    assert m.assignment == {i: GOLDEN_POINTS[i][0] for i in fig1.agents}


@pytest.mark.parametrize("seed", range(12))
def test_min_sum_exact_on_trees(seed):
    rng = np.random.default_rng(seed)
    n, k = int(rng.integers(2, 7)), int(rng.integers(1, 4))
    p = gen_random_tree(n, rng)
    pts = {i: sorted(rng.uniform(-50, 50, k)) for i in p.agents}
    m = hcms_solve(p, points=pts, iters=2 * n, adjust=False)
    _, best = exhaustive_search(p, pts)
    assert m.cost == pytest.approx(best, rel=1e-9, abs=1e-9)


def test_adjustment_keeps_points_in_domain(fig1):
    state = MaxSumState(fig1, np.array([GOLDEN_POINTS[i] for i in fig1.agents]) * 2.5)
    for _ in range(20):
        state.step()
        state.adjust(0.5)
    assert np.all(np.abs(state.points) <= 20)


def test_hcms_deterministic(fig1):
    assert hcms_solve(fig1, seed=3).key() == hcms_solve(fig1, seed=3).key()
