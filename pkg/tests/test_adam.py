import numpy as np
import pytest

from tame.errors import ShapeError, UsageError
from tame.nn import AdamState


def test_zero_gradient_leaves_fresh_params_unchanged():
    state = AdamState(lr=0.1)
    p = {"w": np.array([1.0, -2.0, 3.0])}
    state.step(p, {"w": np.zeros(3)})
    assert np.array_equal(p["w"], [1.0, -2.0, 3.0])


def test_first_step_closed_form():
    state = AdamState(lr=0.001)
    p = {"w": np.array([0.0])}
    state.step(p, {"w": np.array([1.0])})
    # m_hat = 1, v_hat = 1 -> delta = -lr / (1 + eps)
    expected = -0.001 / (1.0 + state.eps)
    assert abs(p["w"][0] - expected) < 1e-15


def test_quadratic_converges():
    # f(theta) = theta^2, grad = 2 theta
    state = AdamState(lr=0.1)
    p = {"w": np.array([1.0])}
    for _ in range(100):
        state.step(p, {"w": 2.0 * p["w"]})
    assert abs(p["w"][0]) < 0.5


def test_step_counter_strictly_increments():
    state = AdamState()
    p = {"w": np.zeros(2)}
    for i in range(1, 6):
        state.step(p, {"w": np.ones(2)})
        assert state.t == i


def test_moment_shapes_follow_params():
    state = AdamState()
    p = {"w": np.zeros((3, 4)), "b": np.zeros(4)}
    state.step(p, {"w": np.ones((3, 4)), "b": np.ones(4)})
    assert state.m["w"].shape == (3, 4)
    assert state.v["b"].shape == (4,)


def test_shape_mismatch_rejected():
    state = AdamState()
    with pytest.raises(ShapeError):
        state.step({"w": np.zeros(3)}, {"w": np.zeros(4)})


def test_frozen_param_rejected():
    state = AdamState()
    w = np.zeros(3)
    w.flags.writeable = False
    with pytest.raises(UsageError):
        state.step({"w": w}, {"w": np.ones(3)})
