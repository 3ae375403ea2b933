import numpy as np
import pytest

from nearbound.experience import ExperiencePool, dedupe, squared_distance_block


@pytest.fixture
def three_point_pool():
    """Line pool: two same-action points and one enemy to the right."""
    return ExperiencePool(2, 2, [[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]], [0, 0, 1])


@pytest.fixture
def two_point_pool():
    return ExperiencePool(2, 2, [[0.0, 0.0], [2.0, 0.0]], [0, 1])


def random_labeled_pool(rng, n, d, kind="voronoi", k=3):
    """General-position pool with one of several label structures."""
    states = rng.uniform(-10.0, 10.0, size=(n, d))
    if kind == "hyperplane":
        w = rng.normal(size=d)
        actions = (states @ w > 0).astype(int)
        k = 2
    elif kind == "voronoi":
        seeds = rng.uniform(-10.0, 10.0, size=(k, d))
        labels = rng.integers(0, k, size=k)
        actions = labels[np.argmin(squared_distance_block(states, seeds), axis=1)]
    elif kind == "radial":
        r = np.sqrt((states**2).sum(axis=1))
        actions = np.minimum((r / 5.0).astype(int), k - 1)
    else:
        actions = rng.integers(0, k, size=n)
    return dedupe(ExperiencePool(d, max(k, int(actions.max()) + 1), states, actions))


def brute_nn_actions(states, actions, queries):
    """Reference nearest-neighbor: full scan, lowest index on ties."""
    d2 = squared_distance_block(np.asarray(queries, dtype=float), states)
    return actions[np.argmin(d2, axis=1)]
