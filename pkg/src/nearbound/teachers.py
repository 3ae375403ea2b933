"""Teacher policies and experience collection.

Three teacher flavors: deterministic scripted experts per environment, a
tabular Q-learning trainer for a learned (but still desk-scale) teacher, and
a line-protocol bridge that delegates decisions to an external process so a
heavyweight teacher can plug in without being bundled here.

A policy is anything with ``act(state) -> int`` that is deterministic at
evaluation time. Collection records the pre-transition state and the chosen
action only; rewards and successor states are not part of the pool.
"""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass

import numpy as np

from .envs import Environment
from .errors import ExternalTeacherError, TrainingError
from .experience import ExperiencePool, dedupe, raw_hit_counts
from .seeding import derive_rng, derive_seed

__all__ = [
    "Policy",
    "ScriptedTeacher",
    "scripted_teacher",
    "QTablePolicy",
    "QGrid",
    "default_q_grid",
    "train_q_teacher",
    "ExternalTeacher",
    "external_teacher",
    "CollectStats",
    "collect",
]


class Policy:
    """Deterministic state -> action mapping."""

    def act(self, state: np.ndarray) -> int:
        raise NotImplementedError


class ScriptedTeacher(Policy):
    """Hand-written expert for one environment."""

    def __init__(self, env_name: str, rule):
        self.env_name = env_name
        self._rule = rule

    def act(self, state):
        return self._rule(state)


def _pp_rule(state) -> int:
    # chase along the axis with the larger gap; ties go to x
    dx, dy = state[0], state[1]
    if abs(dx) >= abs(dy):
        return 3 if dx > 0 else 2
    return 0 if dy > 0 else 1


def _mc_rule(state) -> int:
    # push along the current velocity; from rest, push left
    return 2 if state[1] > 0 else 0


def _cp_rule(state) -> int:
    return 1 if (state[2] + 0.5 * state[3]) > 0 else 0


def _fb_rule(state) -> int:
    return 1 if (state[1] < 0 and state[2] < 2) else 0


_SCRIPTED = {
    "predator-prey": _pp_rule,
    "mountain-car": _mc_rule,
    "cart-pole": _cp_rule,
    "flappy-bird": _fb_rule,
}


def scripted_teacher(env_name: str) -> Policy:
    try:
        rule = _SCRIPTED[env_name]
    except KeyError:
        raise NameError(f"no scripted teacher for environment {env_name!r}") from None
    return ScriptedTeacher(env_name, rule)


# ---------------------------------------------------------------------------
# Tabular Q-learning teacher
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QGrid:
    """Uniform discretization: per-dimension bounds and bin counts."""

    lows: tuple[float, ...]
    highs: tuple[float, ...]
    bins: tuple[int, ...]

    def __post_init__(self):
        if not len(self.lows) == len(self.highs) == len(self.bins):
            raise ValueError("lows, highs, bins must have equal length")
        if any(b < 1 for b in self.bins):
            raise ValueError("bin counts must be >= 1")
        if any(h <= l for l, h in zip(self.lows, self.highs)):
            raise ValueError("each high bound must exceed its low bound")

    @property
    def n_cells(self) -> int:
        out = 1
        for b in self.bins:
            out *= b
        return out

    def cell(self, state) -> int:
        idx = 0
        for k, (lo, hi, b) in enumerate(zip(self.lows, self.highs, self.bins)):
            j = int((state[k] - lo) / (hi - lo) * b)
            j = min(max(j, 0), b - 1)
            idx = idx * b + j
        return idx


_DEFAULT_GRIDS = {
    "predator-prey": QGrid((-19.5, -19.5), (19.5, 19.5), (39, 39)),
    "mountain-car": QGrid((-1.2, -0.07), (0.6, 0.07), (40, 40)),
    "cart-pole": QGrid(
        (-2.4, -3.0, -0.25, -3.0), (2.4, 3.0, 0.25, 3.0), (8, 8, 12, 12)
    ),
    "flappy-bird": QGrid((0.0, -48.0, -8.0), (30.0, 48.0, 8.0), (30, 48, 17)),
}


def default_q_grid(env_name: str) -> QGrid:
    try:
        return _DEFAULT_GRIDS[env_name]
    except KeyError:
        raise NameError(f"no default grid for environment {env_name!r}") from None


class QTablePolicy(Policy):
    """Greedy policy over a learned table; argmax ties go to the lowest id."""

    def __init__(self, grid: QGrid, table: np.ndarray):
        self.grid = grid
        self.table = table

    def act(self, state):
        return int(np.argmax(self.table[self.grid.cell(state)]))


def train_q_teacher(
    env: Environment,
    episodes: int,
    alpha: float = 0.1,
    gamma: float = 0.99,
    eps_start: float = 1.0,
    eps_end: float = 0.05,
    grid: QGrid | None = None,
    seed: int = 0,
) -> tuple[QTablePolicy, list[float]]:
    """One-step Q-learning with epsilon-greedy exploration, linear decay.

    Returns the greedy policy and the per-episode return trace. Exploration
    is used only here; the returned policy is deterministic.
    """
    if not 0 < alpha <= 1:
        raise ValueError("alpha must be in (0, 1]")
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must be in [0, 1]")
    if grid is None:
        grid = default_q_grid(env.descriptor.name)
    n_actions = env.descriptor.action_count
    table = np.zeros((grid.n_cells, n_actions), dtype=np.float64)
    explore = derive_rng(seed, 0xE)
    trace: list[float] = []
    for ep in range(episodes):
        eps = eps_start + (eps_end - eps_start) * (ep / max(episodes - 1, 1))
        state = env.reset(seed=derive_seed(seed, ep))
        cell = grid.cell(state)
        ep_return = 0.0
        done = False
        while not done:
            if explore.random() < eps:
                action = int(explore.integers(0, n_actions))
            else:
                action = int(np.argmax(table[cell]))
            tr = env.step(action)
            nxt_cell = grid.cell(tr.next_state)
            target = tr.reward if tr.done else tr.reward + gamma * table[nxt_cell].max()
            table[cell, action] += alpha * (target - table[cell, action])
            cell = nxt_cell
            ep_return += tr.reward
            done = tr.done
        trace.append(ep_return)
    if not np.all(np.isfinite(table)):
        raise TrainingError("Q-table contains non-finite values")
    return QTablePolicy(grid, table), trace


# ---------------------------------------------------------------------------
# External teacher over a line protocol
# ---------------------------------------------------------------------------


class ExternalTeacher(Policy):
    """Child process answering one action id line per state line.

    Query format: state components space-separated on one line. The child is
    launched once and reused; any protocol violation (dead child, malformed
    reply) raises, never guesses an action.
    """

    def __init__(self, command: str | list[str]):
        argv = shlex.split(command) if isinstance(command, str) else list(command)
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ExternalTeacherError(f"cannot launch teacher: {exc}") from exc
        self.command = argv

    def act(self, state):
        line = " ".join(repr(float(v)) for v in state)
        try:
            self._proc.stdin.write(line + "\n")
            self._proc.stdin.flush()
            reply = self._proc.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise ExternalTeacherError(f"teacher process died: {exc}") from exc
        if reply == "":
            raise ExternalTeacherError("teacher process closed its output")
        try:
            return int(reply.strip())
        except ValueError:
            raise ExternalTeacherError(
                f"malformed teacher reply: {reply.strip()!r}"
            ) from None

    def close(self):
        if self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=5)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def external_teacher(command: str | list[str]) -> ExternalTeacher:
    return ExternalTeacher(command)


# ---------------------------------------------------------------------------
# Collection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CollectStats:
    """Raw vs deduplicated pool sizes, plus per-point collapse counts."""

    raw_count: int
    deduped_count: int
    hit_counts: np.ndarray  # aligned with the deduplicated pool


def collect(
    env: Environment, policy: Policy, n: int, seed: int = 0
) -> tuple[ExperiencePool, CollectStats]:
    """Run episodes until n (state, action) pairs are recorded, then dedupe.

    The final episode is truncated mid-flight once the quota is reached.
    Identical (env, policy, n, seed) always produce the identical pool.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    dim = env.descriptor.state_dim
    states = np.empty((n, dim), dtype=np.float64)
    actions = np.empty(n, dtype=np.int64)
    got = 0
    episode = 0
    while got < n:
        state = env.reset(seed=derive_seed(seed, episode))
        done = False
        while not done and got < n:
            action = policy.act(state)
            states[got] = state
            actions[got] = action
            got += 1
            tr = env.step(action)
            state, done = tr.next_state, tr.done
        episode += 1
    raw = ExperiencePool(dim, env.descriptor.action_count, states, actions)
    pool = dedupe(raw)
    stats = CollectStats(
        raw_count=n,
        deduped_count=len(pool),
        hit_counts=raw_hit_counts(raw, pool),
    )
    return pool, stats
