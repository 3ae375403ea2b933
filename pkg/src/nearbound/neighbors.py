"""Nearest-boundary student policy with three interchangeable backends.

A fitted model answers every query with the action of the exact nearest pool
point, plus an explanation naming that point and its distance: the supporting
experience is the whole interpretability payoff, so it is always returned.

Backends: a linear scan, a KD-tree, and a ball-tree. All three are exact and
must return identical (action, nearest_index) for every query; the linear
scan is the reference the trees are tested against. Ties break to the lowest
pool index everywhere, matching the condensation module, so results are
well-defined even when grid states produce exact distance ties.

Models are immutable after fit; concurrent queries are safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, PoolFormatError
from .experience import (
    ExperiencePool,
    dump_pool,
    load_pool,
    squared_distance_block,
)

__all__ = [
    "BACKENDS",
    "Explanation",
    "NearestBoundaryModel",
    "fit",
    "predict",
    "write_model",
    "read_model",
]

BACKENDS = ("brute", "kdtree", "balltree")

LEAF_SIZE = 16

# relative inflation of ball radii so float rounding can never prune a node
# that holds an exact-tie neighbor
_BALL_SLACK = 1e-12


@dataclass(frozen=True)
class Explanation:
    """The experience a prediction is based on."""

    nearest_index: int
    nearest_distance: float


# ---------------------------------------------------------------------------
# KD-tree
# ---------------------------------------------------------------------------


class _KDNode:
    __slots__ = ("dim", "threshold", "left", "right", "indices")

    def __init__(self, dim=-1, threshold=0.0, left=None, right=None, indices=None):
        self.dim = dim
        self.threshold = threshold
        self.left = left
        self.right = right
        self.indices = indices  # leaf payload


def _kd_build(points: np.ndarray, idx: np.ndarray) -> _KDNode:
    if idx.size <= LEAF_SIZE:
        return _KDNode(indices=idx)
    sub = points[idx]
    spread = sub.max(axis=0) - sub.min(axis=0)
    dim = int(np.argmax(spread))  # ties: lowest dimension
    if spread[dim] == 0.0:
        return _KDNode(indices=idx)  # all points identical
    order = np.argsort(sub[:, dim], kind="stable")
    mid = idx.size // 2
    threshold = float(sub[order[mid], dim])
    left = _kd_build(points, idx[order[:mid]])
    right = _kd_build(points, idx[order[mid:]])
    return _KDNode(dim=dim, threshold=threshold, left=left, right=right)


def _kd_query(node, points, q, ql, best):
    # best = [best_d2, best_idx]
    if node.indices is not None:
        diff = points[node.indices] - q
        d2 = np.sum(diff * diff, axis=1)
        m = d2.min()
        if m < best[0]:
            best[0] = m
            best[1] = int(node.indices[d2 == m].min())
        elif m == best[0]:
            cand = int(node.indices[d2 == m].min())
            if cand < best[1]:
                best[1] = cand
        return
    gap = ql[node.dim] - node.threshold
    near, far = (node.left, node.right) if gap <= 0 else (node.right, node.left)
    _kd_query(near, points, q, ql, best)
    if gap * gap <= best[0]:  # equality must descend: an exact tie may hide there
        _kd_query(far, points, q, ql, best)


# ---------------------------------------------------------------------------
# Ball tree
# ---------------------------------------------------------------------------


class _BallNode:
    __slots__ = ("center", "radius", "left", "right", "indices")

    def __init__(self, center, radius, left=None, right=None, indices=None):
        self.center = center  # python list, scalar math is faster here
        self.radius = radius
        self.left = left
        self.right = right
        self.indices = indices


def _ball_build(points: np.ndarray, idx: np.ndarray) -> _BallNode:
    sub = points[idx]
    center = sub.mean(axis=0)
    diff = sub - center
    d2c = np.sum(diff * diff, axis=1)
    radius = math.sqrt(float(d2c.max())) * (1.0 + _BALL_SLACK)
    if idx.size <= LEAF_SIZE:
        return _BallNode(center.tolist(), radius, indices=idx)
    # two-farthest-seeds split: farthest from the centroid, then farthest
    # from that seed; each point joins its nearer seed (ties go to seed one)
    s1 = int(np.argmax(d2c))
    diff1 = sub - sub[s1]
    d2s1 = np.sum(diff1 * diff1, axis=1)
    s2 = int(np.argmax(d2s1))
    diff2 = sub - sub[s2]
    d2s2 = np.sum(diff2 * diff2, axis=1)
    to_left = d2s1 <= d2s2
    if to_left.all() or not to_left.any():
        return _BallNode(center.tolist(), radius, indices=idx)  # degenerate split
    left = _ball_build(points, idx[to_left])
    right = _ball_build(points, idx[~to_left])
    return _BallNode(center.tolist(), radius, left=left, right=right)


def _d2_scalar(q: list, c: list) -> float:
    s = 0.0
    for a, b in zip(q, c):
        t = a - b
        s += t * t
    return s


def _ball_query(node, points, q, ql, best):
    dqc = math.sqrt(_d2_scalar(ql, node.center))
    lb = dqc - node.radius
    if lb > 0.0 and lb * lb > best[0]:
        return
    if node.indices is not None:
        diff = points[node.indices] - q
        d2 = np.sum(diff * diff, axis=1)
        m = d2.min()
        if m < best[0]:
            best[0] = m
            best[1] = int(node.indices[d2 == m].min())
        elif m == best[0]:
            cand = int(node.indices[d2 == m].min())
            if cand < best[1]:
                best[1] = cand
        return
    dl = _d2_scalar(ql, node.left.center)
    dr = _d2_scalar(ql, node.right.center)
    first, second = (node.left, node.right) if dl <= dr else (node.right, node.left)
    _ball_query(first, points, q, ql, best)
    _ball_query(second, points, q, ql, best)


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------


class NearestBoundaryModel:
    """Exact nearest-neighbor policy over a fixed pool.

    Answers are a pure function of (pool, query); the backend only changes
    how the search is organized, never its result.
    """

    def __init__(self, pool: ExperiencePool, backend: str, root):
        self.pool = pool
        self.backend = backend
        self._root = root

    def query(self, state) -> tuple[int, float]:
        """(nearest pool index, squared distance) for one state."""
        q = np.asarray(state, dtype=np.float64).reshape(-1)
        if q.shape[0] != self.pool.dim:
            raise DimensionError(
                f"query has dim {q.shape[0]}, model pool has dim {self.pool.dim}"
            )
        points = self.pool.states
        if self.backend == "brute":
            diff = points - q
            d2 = np.sum(diff * diff, axis=1)
            idx = int(np.argmin(d2))  # first occurrence == lowest index
            return idx, float(d2[idx])
        best = [np.inf, -1]
        ql = q.tolist()
        if self.backend == "kdtree":
            _kd_query(self._root, points, q, ql, best)
        else:
            _ball_query(self._root, points, q, ql, best)
        return best[1], float(best[0])

    def act(self, state) -> int:
        action, _ = predict(self, state)
        return action

    def predict_batch(self, states) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized predictions: (actions, nearest indices, distances)."""
        qs = np.asarray(states, dtype=np.float64)
        if qs.ndim != 2 or qs.shape[1] != self.pool.dim:
            raise DimensionError(
                f"queries must have shape (m, {self.pool.dim}), got {qs.shape}"
            )
        if self.backend == "brute":
            d2 = squared_distance_block(qs, self.pool.states)
            idx = np.argmin(d2, axis=1)
            dist = np.sqrt(d2[np.arange(qs.shape[0]), idx])
        else:
            idx = np.empty(qs.shape[0], dtype=np.int64)
            dist = np.empty(qs.shape[0], dtype=np.float64)
            for r in range(qs.shape[0]):
                i, d2 = self.query(qs[r])
                idx[r] = i
                dist[r] = math.sqrt(d2)
        return self.pool.actions[idx].copy(), idx, dist


def fit(pool: ExperiencePool, backend: str = "brute") -> NearestBoundaryModel:
    """Build the requested index over the pool. The pool is stored as given."""
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")
    pool.require_nonempty()
    idx = np.arange(len(pool), dtype=np.int64)
    if backend == "kdtree":
        root = _kd_build(pool.states, idx)
    elif backend == "balltree":
        root = _ball_build(pool.states, idx)
    else:
        root = None
    return NearestBoundaryModel(pool, backend, root)


def predict(model: NearestBoundaryModel, state) -> tuple[int, Explanation]:
    """Action of the nearest pool point plus the supporting experience."""
    idx, d2 = model.query(state)
    return int(model.pool.actions[idx]), Explanation(idx, math.sqrt(d2))


# ---------------------------------------------------------------------------
# Model file: "#nbmodel backend=<b>" header, then the pool file format.
# Loading rebuilds the index deterministically.
# ---------------------------------------------------------------------------

MODEL_HEADER = "#nbmodel"


def write_model(model: NearestBoundaryModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{MODEL_HEADER} backend={model.backend}\n")
        dump_pool(model.pool, fh)


def read_model(path) -> NearestBoundaryModel:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != MODEL_HEADER:
            raise PoolFormatError(f"bad model header: {header!r}")
        key, _, backend = header[1].partition("=")
        if key != "backend" or backend not in BACKENDS:
            raise PoolFormatError(f"bad model header backend field: {header[1]!r}")
        pool = load_pool(fh)
    return fit(pool, backend)
