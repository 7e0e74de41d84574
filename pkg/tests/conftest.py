import pathlib

import numpy as np
import pytest

from enforcement.model import Instance, Location, UserType

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def benefit_for(tau: float, fine: float, beta: float) -> float:
    """Benefit whose threshold is exactly tau."""
    return tau * fine / (1.0 - beta * tau)


def homogeneous(taus, payoffs, budget, counts=None, fine=1.0, beta=1.0, ids=None):
    counts = counts or [1.0] * len(taus)
    ids = ids or list(range(1, len(taus) + 1))
    locs = tuple(
        Location(i, (UserType(c, benefit_for(t, fine, beta), p),))
        for i, t, p, c in zip(ids, taus, payoffs, counts)
    )
    return Instance(fine, beta, budget, locs)


def _tau(rng) -> float:
    # coarse values now and then so thresholds tie across locations and with the budget
    if rng.random() < 0.3:
        return float(rng.choice([0.1, 0.2, 0.25, 0.3, 0.5]))
    return float(rng.uniform(0.02, 0.95))


def random_homogeneous(rng, max_locations=6, beta=1.0, fine=None, budget=None) -> Instance:
    n = int(rng.integers(1, max_locations + 1))
    k = float(fine if fine is not None else rng.uniform(0.5, 3.0))
    taus = [_tau(rng) for _ in range(n)]
    pays = [float(rng.choice([1.0, 2.0])) if rng.random() < 0.2 else float(rng.uniform(0.1, 3.0)) for _ in range(n)]
    counts = [float(rng.uniform(0.0, 10.0)) for _ in range(n)]
    R = float(budget if budget is not None else rng.uniform(0.0, 1.2 * sum(taus)))
    return homogeneous(taus, pays, R, counts, k, beta)


def random_instance(rng, max_locations=5, max_types=3, beta=None) -> Instance:
    n = int(rng.integers(1, max_locations + 1))
    k = float(rng.uniform(0.5, 3.0))
    b = float(beta if beta is not None else rng.choice([0.0, 0.5, 1.0]))
    locs = []
    taus_top = []
    for i in range(n):
        m = int(rng.integers(1, max_types + 1))
        types = []
        for _ in range(m):
            if b < 1.0 and rng.random() < 0.1:
                # unclamped threshold above one: never deterred
                d = k / (1.0 - b) * float(rng.uniform(1.1, 2.0))
            else:
                d = benefit_for(_tau(rng), k, b)
            types.append(UserType(float(rng.uniform(0.0, 10.0)), d, float(rng.uniform(0.0, 3.0))))
        loc = Location(i, tuple(types))
        locs.append(loc)
        taus_top.append(max(min(1.0, t.benefit / (b * t.benefit + k)) for t in types))
    R = float(rng.uniform(0.0, 1.2 * sum(taus_top)))
    return Instance(k, b, R, tuple(locs))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def threshold_trap() -> Instance:
    return homogeneous([0.2, 0.2, 0.41], [1.0, 1.0, 2.2], 0.405)


@pytest.fixture
def quota_trap() -> Instance:
    return homogeneous([0.1, 0.11, 0.101, 0.089, 0.3], [1.0, 1.099, 0.999, 0.87, 1.1], 0.3)
