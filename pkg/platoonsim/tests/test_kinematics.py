import math

import numpy as np
import pytest

from platoonsim.core.domain import VehicleState
from platoonsim.core.errors import NumericDomainError
from platoonsim.core.kinematics import (
    advance_leader, clamp_accel, clamp_jerk, delayed_view, staleness_offset, step_vehicle,
)


@pytest.mark.parametrize("x, v, a_cmd, x_next, v_next", [
    (0.0, 10.0, 1.0, 2.02, 10.2),
    (5.0, 0.0, 0.0, 5.0, 0.0),
    (0.0, 27.78, -3.0, 5.496, 27.18),
])
def test_step_vehicle(x, v, a_cmd, x_next, v_next):
    nxt = step_vehicle(VehicleState(x, v), a_cmd, 0.2)
    assert nxt.x == pytest.approx(x_next)
    assert nxt.v == pytest.approx(v_next)
    assert nxt.a == a_cmd


def test_step_vehicle_floors_velocity_and_stops_in_place():
    nxt = step_vehicle(VehicleState(0.0, 0.3), -3.0, 0.2)
    assert nxt.v == 0.0
    # stops after 0.1 s having covered v^2 / (2 |a|)
    assert nxt.x == pytest.approx(0.3 ** 2 / 6.0)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_step_vehicle_rejects_non_finite(bad):
    with pytest.raises(NumericDomainError):
        step_vehicle(VehicleState(0.0, 10.0), bad, 0.2)
    with pytest.raises(NumericDomainError):
        step_vehicle(VehicleState(bad, 10.0), 0.0, 0.2)


@pytest.mark.parametrize("n", [1, 10, 1000, 10000])
def test_constant_acceleration_matches_closed_form(n):
    dt, a, v0, x0 = 0.2, 0.7, 3.0, 12.0
    state = VehicleState(x0, v0)
    for _ in range(n):
        state = step_vehicle(state, a, dt)
    t = n * dt
    assert state.x == pytest.approx(x0 + v0 * t + 0.5 * a * t * t, rel=1e-9)
    assert state.v == pytest.approx(v0 + a * t, rel=1e-9)


def test_staleness_offset():
    assert staleness_offset(20.0, 0.005) == pytest.approx(0.1)
    assert staleness_offset(0.0, 0.005) == 0.0


def test_delayed_view():
    neighbor = VehicleState(100.0, 14.0, 0.5)
    assert delayed_view(neighbor, 0.0) == neighbor
    seen = delayed_view(neighbor, 0.005)
    assert seen.x == pytest.approx(99.93)
    assert (seen.v, seen.a) == (14.0, 0.5)
    with pytest.raises(NumericDomainError):
        delayed_view(neighbor, -0.1)


@pytest.mark.parametrize("a_cmd, a_prev, expected", [
    (10.0, 0.0, 6.0),
    (1.0, 0.9, 1.0),
    (-10.0, 0.0, -6.0),
])
def test_clamp_jerk(a_cmd, a_prev, expected):
    assert clamp_jerk(a_cmd, a_prev, 30.0, 0.2) == pytest.approx(expected)


@pytest.mark.parametrize("a, expected", [(5.0, 3.0), (-5.0, -3.0), (1.0, 1.0)])
def test_clamp_accel(a, expected):
    assert clamp_accel(a, 3.0) == expected


def test_advance_leader_is_not_bounded_by_a_max():
    nxt = advance_leader(VehicleState(0.0, 0.0, 0.0), 2.0, 0.2)
    assert nxt.a == pytest.approx(10.0)
    assert nxt.x == 0.0
    assert nxt.v == 2.0


def test_clamp_jerk_is_idempotent_and_bounded():
    rng = np.random.default_rng(11)
    for _ in range(10_000):
        a_cmd, a_prev = rng.uniform(-50, 50, size=2)
        jerk_max, dt = rng.uniform(0.1, 60.0), rng.uniform(0.01, 1.0)
        once = clamp_jerk(a_cmd, a_prev, jerk_max, dt)
        assert clamp_jerk(once, a_prev, jerk_max, dt) == once
        assert abs(once - a_prev) <= jerk_max * dt + 1e-12


@pytest.mark.parametrize("x, v, delay", [(100.0, 14.0, 0.005), (-3.5, 27.7, 0.1), (0.0, 0.0, 0.02)])
def test_delayed_view_plus_offset_is_true_position(x, v, delay):
    neighbor = VehicleState(x, v)
    seen = delayed_view(neighbor, delay)
    assert seen.x + staleness_offset(seen.v, delay) == pytest.approx(x, abs=1e-12)
