import math

import numpy as np
import pytest

from nearbound.envs import (
    ENV_NAMES,
    CartPole,
    FlappyBird,
    MountainCar,
    PredatorPrey,
    make_env,
)
from nearbound.errors import ActionError


class _StayRng:
    """Stub prey rng: integers(0, 5) always 0, i.e. the prey stays put."""

    def integers(self, low, high=None, size=None):
        return 0


class TestRegistry:
    def test_all_names(self):
        for name in ENV_NAMES:
            env = make_env(name)
            assert env.descriptor.name == name
            assert env.descriptor.state_dim >= 1
            assert env.descriptor.action_count >= 2

    def test_unknown_env(self):
        with pytest.raises(NameError):
            make_env("pong")

    def test_step_before_reset(self):
        with pytest.raises(RuntimeError):
            make_env("mountain-car").step(0)

    def test_invalid_action(self):
        env = make_env("cart-pole")
        env.reset(seed=0)
        with pytest.raises(ActionError):
            env.step(5)


@pytest.mark.parametrize("name", ENV_NAMES)
def test_seed_determinism(name):
    def run(seed):
        env = make_env(name)
        s = env.reset(seed=seed)
        trace = [s.copy()]
        rng = np.random.default_rng(99)
        for _ in range(60):
            tr = env.step(int(rng.integers(0, env.descriptor.action_count)))
            trace.append(tr.next_state.copy())
            trace.append(np.array([tr.reward, float(tr.done)]))
            if tr.done:
                s = env.reset(seed=seed + 1)
        return np.concatenate(trace)

    assert np.array_equal(run(42), run(42))
    # different seed, different start state
    a = make_env(name).reset(seed=1)
    b = make_env(name).reset(seed=2)
    if name != "flappy-bird":  # flappy's start state ignores the gap draw
        assert not np.array_equal(a, b) or name == "mountain-car"


class TestPredatorPrey:
    def test_reset_never_starts_caught(self):
        env = make_env("predator-prey")
        for seed in range(60):
            s = env.reset(seed=seed)
            assert not (s[0] == 0 and s[1] == 0)
            assert abs(s[0]) <= 19 and abs(s[1]) <= 19

    def test_step_toward_prey(self):
        env = PredatorPrey()
        env.reset(seed=0)
        env._pred = [5, 5]
        env._prey = [8, 3]  # state (3, -2)
        env._state = env._obs()
        env._rng = _StayRng()
        tr = env.step(3)  # right
        assert np.array_equal(tr.state, [3.0, -2.0])
        assert np.array_equal(tr.next_state, [2.0, -2.0])
        assert tr.reward == -1.0
        assert not tr.done

    def test_catching_step(self):
        env = PredatorPrey()
        env.reset(seed=0)
        env._pred = [7, 3]
        env._prey = [8, 3]  # state (1, 0)
        env._rng = _StayRng()
        tr = env.step(3)
        assert np.array_equal(tr.next_state, [0.0, 0.0])
        assert tr.done
        assert tr.reward == 0.0

    def test_walls_clamp(self):
        env = PredatorPrey()
        env.reset(seed=0)
        env._pred = [0, 0]
        env._prey = [10, 10]
        env._state = env._obs()
        env._rng = _StayRng()
        tr = env.step(2)  # left into the wall
        assert np.array_equal(tr.state, tr.next_state)

    def test_prey_moves_one_cell_on_one_axis(self):
        env = PredatorPrey()
        env.reset(seed=3)
        for _ in range(300):
            before = tuple(env._prey)
            tr = env.step(0)
            after = tuple(env._prey)
            dx, dy = abs(after[0] - before[0]), abs(after[1] - before[1])
            assert (dx, dy) in {(0, 0), (1, 0), (0, 1)}
            assert abs(tr.next_state[0]) <= 19 and abs(tr.next_state[1]) <= 19
            if tr.done:
                env.reset(seed=4)

    def test_truncates_at_200(self):
        env = PredatorPrey()
        env.reset(seed=0)
        env._pred = [0, 0]
        env._prey = [19, 19]
        env._rng = _StayRng()
        steps = 0
        done = False
        while not done:
            done = env.step(2).done  # keep walking into the wall
            steps += 1
        assert steps == 200


class TestMountainCar:
    def test_coast_update_from_rest(self):
        env = MountainCar()
        env.reset(seed=0)
        env._pos, env._vel = -0.5, 0.0
        tr = env.step(1)
        expected_v = -0.0025 * math.cos(3 * -0.5)
        assert tr.next_state[1] == pytest.approx(expected_v, rel=1e-12)
        assert tr.next_state[0] == pytest.approx(-0.5 + expected_v, rel=1e-12)
        assert tr.reward == -1.0

    def test_goal_predicate(self):
        env = MountainCar()
        env.reset(seed=0)
        env._pos, env._vel = 0.497, 0.07
        tr = env.step(2)
        assert tr.next_state[0] >= 0.5
        assert tr.done

    def test_velocity_clamped(self):
        env = MountainCar()
        env.reset(seed=5)
        for _ in range(400):
            tr = env.step(2)
            assert abs(tr.next_state[1]) <= 0.07
            assert -1.2 <= tr.next_state[0] <= 0.6
            if tr.done:
                env.reset(seed=6)

    def test_left_wall_zeroes_velocity(self):
        env = MountainCar()
        env.reset(seed=0)
        env._pos, env._vel = -1.19, -0.07
        tr = env.step(0)
        assert tr.next_state[0] == -1.2
        assert tr.next_state[1] == 0.0

    def test_reset_range(self):
        env = MountainCar()
        for seed in range(40):
            s = env.reset(seed=seed)
            assert -0.6 <= s[0] <= -0.4
            assert s[1] == 0.0

    def test_truncates_at_200(self):
        env = MountainCar()
        env.reset(seed=0)
        steps = 0
        done = False
        while not done:
            done = env.step(1).done  # coasting never reaches the goal
            steps += 1
        assert steps == 200


class TestCartPole:
    def test_one_euler_step_matches_independent_integration(self):
        env = CartPole()
        env.reset(seed=0)
        pinned = np.array([0.01, -0.02, 0.03, 0.04])
        env._s = pinned.copy()
        tr = env.step(1)

        # independent evaluation of the same dynamics, written separately
        g, mc, mp, half, force, tau = 9.8, 1.0, 0.1, 0.5, 10.0, 0.02
        x, xd, th, thd = pinned
        tmp = (force + (mp * half) * thd**2 * math.sin(th)) / (mc + mp)
        th_acc = (g * math.sin(th) - math.cos(th) * tmp) / (
            half * (4.0 / 3.0 - mp * math.cos(th) ** 2 / (mc + mp))
        )
        x_acc = tmp - (mp * half) * th_acc * math.cos(th) / (mc + mp)
        expected = np.array(
            [x + tau * xd, xd + tau * x_acc, th + tau * thd, thd + tau * th_acc]
        )
        np.testing.assert_allclose(tr.next_state, expected, rtol=1e-12)
        assert tr.reward == 1.0

    def test_push_right_accelerates_cart(self):
        env = CartPole()
        env.reset(seed=0)
        env._s = np.zeros(4)
        tr = env.step(1)
        assert tr.next_state[1] > 0.0

    def test_angle_failure(self):
        env = CartPole()
        env.reset(seed=0)
        env._s = np.array([0.0, 0.0, 0.22, 0.0])  # > 12 degrees after step
        tr = env.step(1)
        assert tr.done
        assert tr.reward == 0.0

    def test_position_failure(self):
        env = CartPole()
        env.reset(seed=0)
        env._s = np.array([2.39, 3.0, 0.0, 0.0])
        tr = env.step(1)
        assert tr.done

    def test_reset_range(self):
        env = CartPole()
        s = env.reset(seed=9)
        assert np.all(np.abs(s) <= 0.05)


class TestFlappyBird:
    def test_flap_resets_velocity(self):
        env = FlappyBird()
        env.reset(seed=0)
        env._v = -8.0
        tr = env.step(1)
        assert tr.next_state[2] == 4.0

    def test_gravity_pulls(self):
        env = FlappyBird()
        env.reset(seed=0)
        env._v = 0.0
        tr = env.step(0)
        assert tr.next_state[2] == -1.0
        assert env._v >= -8.0

    def test_ceiling_kill(self):
        env = FlappyBird()
        env.reset(seed=0)
        env._y = 39.0
        env._v = 8.0
        tr = env.step(1)  # flap: v=4, y=43 > 40
        assert tr.done
        assert tr.reward == 0.0

    def test_pipe_pass_rewards(self):
        env = FlappyBird()
        env.reset(seed=0)
        env._x = 29
        gap = env._gaps[0]
        env._y = gap + 1.0
        env._v = 0.0
        tr = env.step(0)  # drop to gap center, cross pipe at x=30
        assert tr.next_state[0] == 30.0  # distance to the next pipe resets
        assert tr.reward == 1.0
        assert not tr.done

    def test_pipe_collision_kills(self):
        env = FlappyBird()
        env.reset(seed=0)
        env._x = 29
        env._y = env._gaps[0] + 10.0
        env._v = 0.0
        tr = env.step(1)  # flap up, y moves further from the gap
        assert tr.done
        assert tr.reward == 0.0

    def test_state_layout(self):
        env = FlappyBird()
        s = env.reset(seed=1)
        assert s[0] == 30.0  # first pipe distance
        assert s[1] == -env._gaps[0]  # bird at 0, below center iff gap > 0
        assert s[2] == 0.0
