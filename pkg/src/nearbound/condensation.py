"""Boundary/interior classification and pool condensation.

A point near a decision boundary supports the nearest-neighbor answer in its
region; a point deep inside a same-action region does not. Each experience is
classified by a sphere-intersection test against its nearest enemy (closest
point with a different action):

  1. find the nearest enemy e of point i, at distance r;
  2. look for a witness: a same-action point j (j != i) strictly inside BOTH
     the sphere of radius r around i and the sphere of radius r around e,
     i.e. inside the lens where the two spheres intersect;
  3. i is Interior iff such a witness exists, Boundary otherwise (including
     the case where i has no enemy at all).

The witness must be inside both spheres, not just the enemy's: a same-action
point that is close to the enemy but far from i sits on the other side of the
boundary and does not make i redundant. With the enemy-sphere test alone,
removing i can flip nearest-neighbor answers (take same-action points at 0
and 10 with an enemy at 6 on a line: 10 is inside the enemy sphere of 0, yet
deleting 0 hands everything left of 3 to the enemy). The lens test keeps
nearest-neighbor decisions intact.

Every point is classified against the original pool; there is no sequential
editing during the pass, so the result is deterministic and independent of
any parallel scheduling of the per-point work.

Classification cost is O(n^2) in the pool size, distance computations only.
The exhaustive simplex containment test (``simplex_interior_oracle``) is the
2-D brute-force alternative; it is combinatorial and exists only so tests
can cross-check the sphere test, the main pipeline never calls it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import ContractError, SizeError, UnsupportedDimensionError
from .experience import (
    ExperiencePool,
    squared_distance_block,
    squared_distances,
)

__all__ = [
    "PointClass",
    "CondensationResult",
    "nearest_enemy",
    "witness_set",
    "classify_point",
    "condense",
    "simplex_interior_oracle",
    "simplex_interior_mask",
    "write_condensation",
    "read_condensation",
]


class PointClass(Enum):
    BOUNDARY = "B"
    INTERIOR = "I"


@dataclass(frozen=True)
class CondensationResult:
    """Partition of a pool into boundary and interior indices.

    ``retained_fraction`` is |boundary| / |pool| for the pool that was
    condensed (already deduplicated). Pipeline-level reduction against the
    raw collected count is computed by the evaluation layer, which knows the
    raw count.
    """

    boundary_indices: tuple[int, ...]
    interior_indices: tuple[int, ...]
    retained_fraction: float

    @property
    def total(self) -> int:
        return len(self.boundary_indices) + len(self.interior_indices)


def nearest_enemy(pool: ExperiencePool, i: int) -> Optional[int]:
    """Index of the closest point whose action differs from point i's.

    Ties break to the lowest index. Returns None when no point has a
    different action (then i is trivially boundary and retained).
    """
    n = len(pool)
    if not 0 <= i < n:
        raise IndexError(f"index {i} out of range for pool of size {n}")
    mask = pool.actions != pool.actions[i]
    if not mask.any():
        return None
    d2 = squared_distances(pool.states, pool.states[i])
    d2[~mask] = np.inf
    return int(np.argmin(d2))  # first occurrence == lowest index


def witness_set(pool: ExperiencePool, i: int, enemy: int) -> set[int]:
    """Same-action points strictly inside the two-sphere intersection.

    Both spheres have radius d(i, enemy); one is centered on i, the other on
    the enemy. Strict inequalities: points exactly on either sphere are not
    witnesses, which biases toward retention when grid states produce exact
    ties.
    """
    n = len(pool)
    if not 0 <= i < n:
        raise IndexError(f"index {i} out of range for pool of size {n}")
    if not 0 <= enemy < n:
        raise IndexError(f"enemy index {enemy} out of range for pool of size {n}")
    if nearest_enemy(pool, i) != enemy:
        raise ContractError(f"point {enemy} is not the nearest enemy of point {i}")
    d2_to_i = squared_distances(pool.states, pool.states[i])
    d2_to_e = squared_distances(pool.states, pool.states[enemy])
    r2 = d2_to_i[enemy]
    same = pool.actions == pool.actions[i]
    inside = same & (d2_to_e < r2) & (d2_to_i < r2)
    inside[i] = False
    return set(np.flatnonzero(inside).tolist())


def classify_point(pool: ExperiencePool, i: int) -> PointClass:
    """Boundary if i has no enemy or an empty witness set, else Interior."""
    enemy = nearest_enemy(pool, i)
    if enemy is None:
        return PointClass.BOUNDARY
    if witness_set(pool, i, enemy):
        return PointClass.INTERIOR
    return PointClass.BOUNDARY


def condense(pool: ExperiencePool) -> tuple[ExperiencePool, CondensationResult]:
    """Classify every point and keep exactly the boundary ones, in order.

    The pool must already be deduplicated. Deterministic for a given input.
    """
    pool.require_nonempty()
    interior = _interior_mask(pool)
    boundary_idx = np.flatnonzero(~interior)
    interior_idx = np.flatnonzero(interior)
    result = CondensationResult(
        boundary_indices=tuple(int(j) for j in boundary_idx),
        interior_indices=tuple(int(j) for j in interior_idx),
        retained_fraction=float(len(boundary_idx)) / float(len(pool)),
    )
    return pool.take(boundary_idx), result


def _interior_mask(pool: ExperiencePool) -> np.ndarray:
    """Vectorized per-class sweep; identical arithmetic to the per-point ops."""
    n = len(pool)
    states = pool.states
    actions = pool.actions
    enemy_idx = np.full(n, -1, dtype=np.int64)
    enemy_d2 = np.full(n, np.inf, dtype=np.float64)

    for a in np.unique(actions):
        own = np.flatnonzero(actions == a)
        foe = np.flatnonzero(actions != a)
        if foe.size == 0:
            continue
        d2 = squared_distance_block(states[own], states[foe])
        col = np.argmin(d2, axis=1)  # first occurrence; foe ascending => lowest index
        enemy_idx[own] = foe[col]
        enemy_d2[own] = d2[np.arange(own.size), col]

    interior = np.zeros(n, dtype=bool)
    for a in np.unique(actions):
        own = np.flatnonzero(actions == a)
        if own.size < 2:
            continue
        tested = own[enemy_idx[own] >= 0]
        if tested.size == 0:
            continue
        # witness j in `own` for tested point i:
        #   d2(j, enemy_i) < r2_i  and  d2(j, i) < r2_i,  j != i
        own_states = states[own]
        cols = max(1, 2_000_000 // max(1, own.size))
        for start in range(0, tested.size, cols):
            chunk = tested[start : start + cols]
            r2 = enemy_d2[chunk]
            d2_e = squared_distance_block(own_states, states[enemy_idx[chunk]])
            d2_i = squared_distance_block(own_states, states[chunk])
            ok = (d2_e < r2) & (d2_i < r2)
            # knock out j == i
            self_rows = np.searchsorted(own, chunk)
            ok[self_rows, np.arange(chunk.size)] = False
            interior[chunk] = ok.any(axis=0)
    return interior


# ---------------------------------------------------------------------------
# 2-D exhaustive simplex containment test
# ---------------------------------------------------------------------------

AREA_RTOL = 1e-9  # relative tolerance on the triangle area-sum identity
AREA_ATOL = 1e-12  # absolute floor for degenerate (zero-area) triples

DEFAULT_ORACLE_CAP = 200


def _tri_areas(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Unsigned triangle areas for stacked vertex arrays of shape (m, 2)."""
    return 0.5 * np.abs(
        (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
        - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1])
    )


def _contained_in_any(p: np.ndarray, va, vb, vc, s0) -> bool:
    """Closed containment of p in any triangle (va[t], vb[t], vc[t]).

    p is inside exactly when the three sub-areas sum to the triangle's own
    area; strictly outside they sum to more. Edges and vertices count as
    contained.
    """
    pp = np.broadcast_to(p, va.shape)
    s = (
        _tri_areas(pp, vb, vc)
        + _tri_areas(va, pp, vc)
        + _tri_areas(va, vb, pp)
    )
    return bool(np.any(s - s0 <= AREA_RTOL * s0 + AREA_ATOL))


def _class_triples(pts: np.ndarray):
    m = pts.shape[0]
    first = np.arange(m)
    trip = np.array(list(itertools.combinations(first, 3)), dtype=np.int64)
    return trip, pts[trip[:, 0]], pts[trip[:, 1]], pts[trip[:, 2]]


def simplex_interior_oracle(
    pool: ExperiencePool, i: int, cap: int = DEFAULT_ORACLE_CAP
) -> bool:
    """True iff some same-action triangle (not using i) contains point i.

    Only defined for 2-D pools and capped: the triple enumeration is
    combinatorial, which is exactly why the sphere test exists.
    """
    _oracle_guards(pool, cap)
    if not 0 <= i < len(pool):
        raise IndexError(f"index {i} out of range for pool of size {len(pool)}")
    same = np.flatnonzero(pool.actions == pool.actions[i])
    same = same[same != i]
    if same.size < 3:
        return False
    _, va, vb, vc = _class_triples(pool.states[same])
    s0 = _tri_areas(va, vb, vc)
    return _contained_in_any(pool.states[i], va, vb, vc, s0)


def simplex_interior_mask(pool: ExperiencePool, cap: int = DEFAULT_ORACLE_CAP) -> np.ndarray:
    """Oracle verdict for every point at once; triples shared per class."""
    _oracle_guards(pool, cap)
    out = np.zeros(len(pool), dtype=bool)
    for a in np.unique(pool.actions):
        members = np.flatnonzero(pool.actions == a)
        if members.size < 4:
            continue
        trip, va, vb, vc = _class_triples(pool.states[members])
        s0 = _tri_areas(va, vb, vc)
        for pos, i in enumerate(members):
            uses_i = (trip[:, 0] == pos) | (trip[:, 1] == pos) | (trip[:, 2] == pos)
            keep = ~uses_i
            out[i] = _contained_in_any(
                pool.states[i], va[keep], vb[keep], vc[keep], s0[keep]
            )
    return out


def _oracle_guards(pool: ExperiencePool, cap: int) -> None:
    if pool.dim != 2:
        raise UnsupportedDimensionError(
            f"simplex oracle is 2-D only, pool dim {pool.dim}"
        )
    if len(pool) > cap:
        raise SizeError(f"pool size {len(pool)} exceeds oracle cap {cap}")


# ---------------------------------------------------------------------------
# Result file format:
#   line 1: "#condensation retained=<n> total=<N>"
#   then one "<index> <B|I>" line per pool index, in index order.
# ---------------------------------------------------------------------------

CONDENSATION_HEADER = "#condensation"


def write_condensation(result: CondensationResult, path) -> None:
    tags = {}
    for j in result.boundary_indices:
        tags[j] = "B"
    for j in result.interior_indices:
        tags[j] = "I"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(
            f"{CONDENSATION_HEADER} retained={len(result.boundary_indices)} "
            f"total={result.total}\n"
        )
        for j in sorted(tags):
            fh.write(f"{j} {tags[j]}\n")


def read_condensation(path) -> CondensationResult:
    from .errors import PoolFormatError

    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != CONDENSATION_HEADER:
            raise PoolFormatError(f"bad condensation header: {header!r}")
        boundary: list[int] = []
        interior: list[int] = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            idx_str, tag = line.split()
            idx = int(idx_str)
            if tag == "B":
                boundary.append(idx)
            elif tag == "I":
                interior.append(idx)
            else:
                raise PoolFormatError(f"bad tag {tag!r} in condensation file")
    total = len(boundary) + len(interior)
    if total == 0:
        raise PoolFormatError("empty condensation file")
    return CondensationResult(
        boundary_indices=tuple(boundary),
        interior_indices=tuple(interior),
        retained_fraction=len(boundary) / total,
    )
