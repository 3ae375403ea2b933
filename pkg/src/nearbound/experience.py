"""Experience data model: states, actions, pools, and the distance function.

An experience is one (state, action) pair recorded from a teacher rollout.
A pool is an ordered, dimension-consistent collection of experiences; it is
the unit every other module operates on. Pools are immutable after
construction and safe to share across workers.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ActionError, DimensionError, EmptyPoolError, PoolFormatError

__all__ = [
    "Experience",
    "ExperiencePool",
    "distance",
    "squared_distances",
    "dedupe",
    "write_pool",
    "read_pool",
]


@dataclass(frozen=True)
class Experience:
    """One (state, action) pair. ``state`` is a read-only float64 vector."""

    state: np.ndarray
    action: int

    def __post_init__(self):
        object.__setattr__(self, "state", _as_state(self.state))
        object.__setattr__(self, "action", int(self.action))


def _as_state(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise DimensionError(f"state must be a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("state contains NaN or Inf")
    arr = np.array(arr, dtype=np.float64, order="C")
    arr.flags.writeable = False
    return arr


class ExperiencePool:
    """Ordered collection of experiences with a fixed dim and action count.

    States are stored as a read-only (n, dim) float64 array and actions as a
    read-only (n,) int64 array; integer-grid environments use the same
    double-precision path as continuous ones.
    """

    __slots__ = ("dim", "action_count", "states", "actions")

    def __init__(self, dim: int, action_count: int, states, actions):
        dim = int(dim)
        action_count = int(action_count)
        if dim < 1:
            raise DimensionError("dim must be >= 1")
        if action_count < 1:
            raise ActionError("action_count must be >= 1")
        states = np.asarray(states, dtype=np.float64)
        if states.size == 0:
            states = states.reshape(0, dim)
        if states.ndim != 2 or states.shape[1] != dim:
            raise DimensionError(
                f"states must have shape (n, {dim}), got {states.shape}"
            )
        if not np.all(np.isfinite(states)):
            raise ValueError("states contain NaN or Inf")
        actions = np.asarray(actions, dtype=np.int64).reshape(-1)
        if actions.shape[0] != states.shape[0]:
            raise DimensionError(
                f"{states.shape[0]} states but {actions.shape[0]} actions"
            )
        if actions.size and (actions.min() < 0 or actions.max() >= action_count):
            raise ActionError(
                f"action ids must lie in [0, {action_count}), got "
                f"[{actions.min()}, {actions.max()}]"
            )
        # copy so freezing never touches a caller-owned buffer
        states = np.array(states, dtype=np.float64, order="C")
        actions = np.array(actions, dtype=np.int64, order="C")
        states.flags.writeable = False
        actions.flags.writeable = False
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "action_count", action_count)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "actions", actions)

    def __setattr__(self, name, value):
        raise AttributeError("ExperiencePool is immutable")

    def __len__(self) -> int:
        return self.states.shape[0]

    def __getitem__(self, i: int) -> Experience:
        return Experience(self.states[i], int(self.actions[i]))

    def __iter__(self) -> Iterator[Experience]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExperiencePool):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.action_count == other.action_count
            and np.array_equal(self.states, other.states)
            and np.array_equal(self.actions, other.actions)
        )

    def __repr__(self) -> str:
        return (
            f"ExperiencePool(n={len(self)}, dim={self.dim}, "
            f"actions={self.action_count})"
        )

    @classmethod
    def from_pairs(
        cls, pairs: Iterable[tuple[Sequence[float], int]], dim: int, action_count: int
    ) -> "ExperiencePool":
        pairs = list(pairs)
        states = np.array([p[0] for p in pairs], dtype=np.float64).reshape(-1, dim)
        actions = [p[1] for p in pairs]
        return cls(dim, action_count, states, actions)

    def take(self, indices) -> "ExperiencePool":
        """New pool containing the given rows, in the given order."""
        idx = np.asarray(indices, dtype=np.int64)
        return ExperiencePool(
            self.dim, self.action_count, self.states[idx], self.actions[idx]
        )

    def require_nonempty(self, what: str = "pool") -> None:
        if len(self) == 0:
            raise EmptyPoolError(f"{what} is empty")


def distance(a, b) -> float:
    """Euclidean distance between two state vectors of equal length.

    Raw coordinates, no per-dimension scaling. Symmetric, zero iff the
    vectors are identical.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("distance inputs must be finite")
    d = a - b
    return float(np.sqrt(np.sum(d * d)))


def squared_distances(points: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance from ``query`` to every row of ``points``.

    Squared form is used for all internal comparisons: monotone in the true
    distance and free of sqrt rounding at strict-inequality boundaries.
    """
    d = points - query
    return np.sum(d * d, axis=1)


def squared_distance_block(a: np.ndarray, b: np.ndarray, max_elems: int = 4_000_000) -> np.ndarray:
    """Pairwise squared distances between rows of ``a`` and rows of ``b``.

    Computed from explicit differences (never the dot-product expansion,
    which loses digits to cancellation) and chunked so no temporary exceeds
    ``max_elems`` floats.
    """
    m, dim = a.shape
    n = b.shape[0]
    out = np.empty((m, n), dtype=np.float64)
    rows = max(1, max_elems // max(1, n))
    for start in range(0, m, rows):
        stop = min(start + rows, m)
        acc = np.zeros((stop - start, n), dtype=np.float64)
        for k in range(dim):
            diff = np.subtract.outer(a[start:stop, k], b[:, k])
            acc += diff * diff
        out[start:stop] = acc
    return out


def dedupe(pool: ExperiencePool) -> ExperiencePool:
    """Collapse exact (state, action) duplicates to the earliest-index copy.

    Survivor order is preserved. Pairs with an identical state but different
    actions are distinct and both kept. Idempotent. Duplicate collapse is
    mandatory before condensation: a duplicated pair makes its own nearest
    enemy test degenerate (radius-zero spheres).
    """
    seen: dict[tuple, int] = {}
    keep: list[int] = []
    for i in range(len(pool)):
        key = (int(pool.actions[i]), tuple(pool.states[i].tolist()))
        if key not in seen:
            seen[key] = i
            keep.append(i)
    if len(keep) == len(pool):
        return pool
    return pool.take(keep)


def raw_hit_counts(pool: ExperiencePool, deduped: ExperiencePool) -> np.ndarray:
    """How many rows of ``pool`` collapsed onto each row of ``deduped``."""
    index: dict[tuple, int] = {}
    for i in range(len(deduped)):
        key = (int(deduped.actions[i]), tuple(deduped.states[i].tolist()))
        index[key] = i
    counts = np.zeros(len(deduped), dtype=np.int64)
    for i in range(len(pool)):
        key = (int(pool.actions[i]), tuple(pool.states[i].tolist()))
        counts[index[key]] += 1
    return counts


# ---------------------------------------------------------------------------
# Pool file format (text, line oriented):
#   line 1: "#pool dim=<d> actions=<k>"
#   then one "<s_0>,...,<s_{d-1}>,<action>" line per experience, reals in
#   shortest round-trip decimal form.
# ---------------------------------------------------------------------------

POOL_HEADER = "#pool"


def format_real(x: float) -> str:
    """Shortest decimal string that round-trips to the same float64."""
    return repr(float(x))


def write_pool(pool: ExperiencePool, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        dump_pool(pool, fh)


def dump_pool(pool: ExperiencePool, fh: io.TextIOBase) -> None:
    fh.write(f"{POOL_HEADER} dim={pool.dim} actions={pool.action_count}\n")
    for i in range(len(pool)):
        coords = ",".join(format_real(v) for v in pool.states[i])
        fh.write(f"{coords},{int(pool.actions[i])}\n")


def read_pool(path: str | os.PathLike) -> ExperiencePool:
    with open(path, "r", encoding="utf-8") as fh:
        return load_pool(fh)


def load_pool(fh: io.TextIOBase) -> ExperiencePool:
    header = fh.readline().strip()
    dim, action_count = parse_pool_header(header)
    states: list[list[float]] = []
    actions: list[int] = []
    for lineno, line in enumerate(fh, start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != dim + 1:
            raise PoolFormatError(
                f"line {lineno}: expected {dim} coordinates plus action, "
                f"got {len(parts)} fields"
            )
        try:
            vec = [float(p) for p in parts[:-1]]
            act = int(parts[-1])
        except ValueError as exc:
            raise PoolFormatError(f"line {lineno}: {exc}") from exc
        if not all(np.isfinite(v) for v in vec):
            raise PoolFormatError(f"line {lineno}: non-finite coordinate")
        if not 0 <= act < action_count:
            raise PoolFormatError(
                f"line {lineno}: action {act} out of range [0, {action_count})"
            )
        states.append(vec)
        actions.append(act)
    arr = np.array(states, dtype=np.float64).reshape(len(states), dim)
    return ExperiencePool(dim, action_count, arr, actions)


def parse_pool_header(header: str) -> tuple[int, int]:
    parts = header.split()
    if len(parts) != 3 or parts[0] != POOL_HEADER:
        raise PoolFormatError(f"bad pool header: {header!r}")
    fields = dict(p.split("=", 1) for p in parts[1:] if "=" in p)
    try:
        dim = int(fields["dim"])
        actions = int(fields["actions"])
    except (KeyError, ValueError) as exc:
        raise PoolFormatError(f"bad pool header: {header!r}") from exc
    if dim < 1 or actions < 1:
        raise PoolFormatError(f"bad pool header bounds: {header!r}")
    return dim, actions
