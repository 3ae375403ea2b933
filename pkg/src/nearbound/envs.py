"""Simulated environments with a uniform reset/step interface.

Four tasks: a 20x20 predator-prey grid chase, the classic mountain car and
cart-pole control problems, and a simplified side-scrolling flappy-bird.
Each instance is deterministic given its reset seed: a fixed seed plus a
fixed action sequence reproduces the exact transition sequence.

Instances hold mutable episode state and are single-threaded; run separate
instances for concurrent rollouts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ActionError

__all__ = [
    "EnvDescriptor",
    "Transition",
    "Environment",
    "PredatorPrey",
    "MountainCar",
    "CartPole",
    "FlappyBird",
    "ENV_NAMES",
    "make_env",
]


@dataclass(frozen=True)
class EnvDescriptor:
    name: str
    state_dim: int
    action_count: int
    max_steps_per_episode: int


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool


class Environment:
    """Base class: subclasses implement _reset(rng) and _step(action)."""

    descriptor: EnvDescriptor

    def __init__(self):
        self._rng = np.random.default_rng(0)
        self._steps = 0
        self._state: np.ndarray | None = None

    def reset(self, seed: int | None = None) -> np.ndarray:
        """Start a new episode; reseeds the stream when a seed is given."""
        if seed is not None:
            self._rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
        self._steps = 0
        self._state = self._reset(self._rng)
        return self._state.copy()

    def step(self, action: int) -> Transition:
        action = int(action)
        if not 0 <= action < self.descriptor.action_count:
            raise ActionError(
                f"action {action} out of range [0, {self.descriptor.action_count}) "
                f"for {self.descriptor.name}"
            )
        if self._state is None:
            raise RuntimeError("step() before reset()")
        state = self._state
        next_state, reward, done = self._step(action)
        self._steps += 1
        if self._steps >= self.descriptor.max_steps_per_episode:
            done = True
        self._state = None if done else next_state
        return Transition(state.copy(), action, float(reward), next_state.copy(), done)

    def _reset(self, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def _step(self, action: int) -> tuple[np.ndarray, float, bool]:
        raise NotImplementedError


class PredatorPrey(Environment):
    """Chase on a 20x20 grid; the agent is the predator.

    State is (prey_x - pred_x, prey_y - pred_y). Actions 0:up 1:down 2:left
    3:right move the predator one cell, clamped at walls. The prey then moves
    uniformly among stay/up/down/left/right (1/5 each, clamped). Catch is
    checked after both moves: the catching step rewards 0 and ends the
    episode, every other step rewards -1. Reset draws distinct cells for both
    animals uniformly at random.
    """

    GRID = 20

    descriptor = EnvDescriptor("predator-prey", 2, 4, 200)

    # action -> (dx, dy); prey move 0 is "stay", 1..4 map like actions
    _MOVES = ((0, 1), (0, -1), (-1, 0), (1, 0))

    def _reset(self, rng):
        g = self.GRID
        while True:
            px, py, qx, qy = rng.integers(0, g, size=4)
            if (px, py) != (qx, qy):
                break
        self._pred = [int(px), int(py)]
        self._prey = [int(qx), int(qy)]
        return self._obs()

    def _obs(self):
        return np.array(
            [self._prey[0] - self._pred[0], self._prey[1] - self._pred[1]],
            dtype=np.float64,
        )

    def _step(self, action):
        g = self.GRID
        dx, dy = self._MOVES[action]
        self._pred[0] = min(max(self._pred[0] + dx, 0), g - 1)
        self._pred[1] = min(max(self._pred[1] + dy, 0), g - 1)
        move = int(self._rng.integers(0, 5))
        if move > 0:
            dx, dy = self._MOVES[move - 1]
            self._prey[0] = min(max(self._prey[0] + dx, 0), g - 1)
            self._prey[1] = min(max(self._prey[1] + dy, 0), g - 1)
        caught = self._pred == self._prey
        return self._obs(), (0.0 if caught else -1.0), caught


class MountainCar(Environment):
    """Underpowered car in a valley; classic formulation.

    State (position, velocity). Actions 0:push-left 1:no-op 2:push-right.
    velocity += (action-1)*0.001 - 0.0025*cos(3*position), clamped to
    |v| <= 0.07; position += velocity, clamped to [-1.2, 0.6] with velocity
    zeroed at the left wall. Reward -1 per step, done at position >= 0.5.
    Reset draws position uniform in [-0.6, -0.4], velocity 0.
    """

    descriptor = EnvDescriptor("mountain-car", 2, 3, 200)

    MIN_POS, MAX_POS = -1.2, 0.6
    MAX_SPEED = 0.07
    GOAL = 0.5

    def _reset(self, rng):
        self._pos = float(rng.uniform(-0.6, -0.4))
        self._vel = 0.0
        return np.array([self._pos, self._vel], dtype=np.float64)

    def _step(self, action):
        v = self._vel + (action - 1) * 0.001 + math.cos(3 * self._pos) * (-0.0025)
        v = min(max(v, -self.MAX_SPEED), self.MAX_SPEED)
        p = self._pos + v
        p = min(max(p, self.MIN_POS), self.MAX_POS)
        if p <= self.MIN_POS and v < 0:
            v = 0.0
        self._pos, self._vel = p, v
        done = p >= self.GOAL
        return np.array([p, v], dtype=np.float64), -1.0, done


class CartPole(Environment):
    """Balance a pole on a cart; classic formulation, Euler integration.

    State (x, x_dot, theta, theta_dot). Actions 0:push-left 1:push-right with
    force 10 N; gravity 9.8, cart mass 1.0, pole mass 0.1, pole half-length
    0.5, step 0.02 s. Episode fails when |theta| > 12 degrees or |x| > 2.4.
    Reward +1 for each surviving step (0 on the failing step). Reset draws
    all four components uniform in [-0.05, 0.05].
    """

    descriptor = EnvDescriptor("cart-pole", 4, 2, 500)

    GRAVITY = 9.8
    CART_MASS = 1.0
    POLE_MASS = 0.1
    HALF_LENGTH = 0.5
    FORCE = 10.0
    TAU = 0.02
    THETA_LIMIT = 12 * math.pi / 180
    X_LIMIT = 2.4

    def _reset(self, rng):
        self._s = rng.uniform(-0.05, 0.05, size=4).astype(np.float64)
        return self._s.copy()

    def _step(self, action):
        x, x_dot, theta, theta_dot = self._s
        force = self.FORCE if action == 1 else -self.FORCE
        total_mass = self.CART_MASS + self.POLE_MASS
        pole_ml = self.POLE_MASS * self.HALF_LENGTH
        cos_t = math.cos(theta)
        sin_t = math.sin(theta)
        temp = (force + pole_ml * theta_dot * theta_dot * sin_t) / total_mass
        theta_acc = (self.GRAVITY * sin_t - cos_t * temp) / (
            self.HALF_LENGTH * (4.0 / 3.0 - self.POLE_MASS * cos_t * cos_t / total_mass)
        )
        x_acc = temp - pole_ml * theta_acc * cos_t / total_mass
        x = x + self.TAU * x_dot
        x_dot = x_dot + self.TAU * x_acc
        theta = theta + self.TAU * theta_dot
        theta_dot = theta_dot + self.TAU * theta_acc
        self._s = np.array([x, x_dot, theta, theta_dot], dtype=np.float64)
        done = abs(theta) > self.THETA_LIMIT or abs(x) > self.X_LIMIT
        return self._s.copy(), (0.0 if done else 1.0), done


class FlappyBird(Environment):
    """Side-scroller: keep the bird inside pipe gaps. Simplified dynamics.

    State (gap_dx, gap_dy, velocity) where gap_dx is the distance to the next
    pipe and gap_dy = bird_y - gap_center (negative means below the center).
    Per tick: flap sets velocity to +4, otherwise gravity subtracts 1
    (velocity clamped to [-8, 8]); the bird rises by velocity and advances
    one unit. Pipes sit every 30 units with gap half-height 6 and centers
    uniform in [-20, 20]; the world spans y in [-40, 40]. Crossing a pipe
    inside the gap rewards +1; hitting a pipe or leaving the world ends the
    episode.
    """

    descriptor = EnvDescriptor("flappy-bird", 3, 2, 1000)

    PIPE_SPACING = 30
    GAP_HALF = 6.0
    WORLD_HALF = 40.0
    FLAP_V = 4.0
    V_MIN, V_MAX = -8.0, 8.0

    def _reset(self, rng):
        n_pipes = self.descriptor.max_steps_per_episode // self.PIPE_SPACING + 2
        self._gaps = rng.uniform(-20.0, 20.0, size=n_pipes)
        self._x = 0
        self._y = 0.0
        self._v = 0.0
        return self._obs()

    def _next_pipe(self) -> int:
        return self._x // self.PIPE_SPACING  # pipe k sits at (k+1)*spacing

    def _obs(self):
        k = self._next_pipe()
        pipe_x = (k + 1) * self.PIPE_SPACING
        return np.array(
            [pipe_x - self._x, self._y - self._gaps[k], self._v], dtype=np.float64
        )

    def _step(self, action):
        if action == 1:
            self._v = self.FLAP_V
        else:
            self._v = max(self._v - 1.0, self.V_MIN)
        self._v = min(self._v, self.V_MAX)
        self._y += self._v
        self._x += 1
        if abs(self._y) > self.WORLD_HALF:
            return self._obs(), 0.0, True
        if self._x % self.PIPE_SPACING == 0:
            gap = self._gaps[self._x // self.PIPE_SPACING - 1]
            if abs(self._y - gap) <= self.GAP_HALF:
                return self._obs(), 1.0, False
            return self._obs(), 0.0, True
        return self._obs(), 0.0, False


ENV_NAMES = ("predator-prey", "mountain-car", "cart-pole", "flappy-bird")

_REGISTRY = {
    "predator-prey": PredatorPrey,
    "mountain-car": MountainCar,
    "cart-pole": CartPole,
    "flappy-bird": FlappyBird,
}


def make_env(name: str) -> Environment:
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise NameError(
            f"unknown environment {name!r}; choose from {', '.join(ENV_NAMES)}"
        ) from None
    return cls()
