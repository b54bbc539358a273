from pathlib import Path

import numpy as np
import pytest

from fdcop.bench import gen_erdos_renyi, gen_random_tree
from fdcop.ccocoa import SolverConfig, solve
from fdcop.model import figure1_problem

DATA = Path(__file__).parent / "data"

GOLDEN_POINTS = {0: [1.0, 2.0], 1: [3.0, 4.0], 2: [7.0, 8.0], 3: [5.0, 9.0]}
GOLDEN_ORDER = [0, 1, 2, 3]


@pytest.fixture
def fig1():
    return figure1_problem()


@pytest.fixture
def golden(fig1):
    return solve(fig1, SolverConfig(k=2), points=GOLDEN_POINTS, order=GOLDEN_ORDER, trace=True)


def random_instance(seed, n_max=8, tree_share=0.5):
    """Small random ER or tree problem; the seed picks everything."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, n_max + 1))
    if rng.random() < tree_share:
        return gen_random_tree(n, rng)
    return gen_erdos_renyi(n, float(rng.uniform(0.2, 0.8)), rng)


def pd_instances(count, n_max=5):
    """The first ``count`` random instances (seeds 0, 1, ...) whose Hessian is positive definite."""
    from fdcop.oracle import quadratic_global_min

    out, seed = [], 0
    while len(out) < count:
        p = random_instance(seed, n_max=n_max)
        if quadratic_global_min(p) is not None:
            out.append((seed, p))
        seed += 1
    return out
