import math

from platoonsim.core.domain import VehicleState
from platoonsim.core.errors import NumericDomainError


def _require_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise NumericDomainError(f"{name} must be finite, got {value}")


def step_vehicle(state: VehicleState, a_cmd: float, dt: float) -> VehicleState:
    """Advance one point-mass vehicle by one time step.

    Velocity floors at zero; on a flooring step the position only integrates
    over the sub-interval in which the vehicle is still moving.
    """
    _require_finite(x=state.x, v=state.v, a=state.a, a_cmd=a_cmd, dt=dt)
    if dt <= 0:
        raise NumericDomainError(f"dt must be > 0, got {dt}")

    v_next = state.v + a_cmd * dt
    if v_next >= 0.0:
        x_next = state.x + state.v * dt + 0.5 * a_cmd * dt * dt
        return VehicleState(x=x_next, v=v_next, a=a_cmd)

    # a_cmd < 0 here: stop after t_stop = v / -a_cmd
    t_stop = state.v / -a_cmd
    x_next = state.x + state.v * t_stop + 0.5 * a_cmd * t_stop * t_stop
    return VehicleState(x=x_next, v=0.0, a=a_cmd)


def staleness_offset(v: float, delay: float) -> float:
    """Position error of a neighbor measurement that is `delay` seconds old."""
    return v * delay


def delayed_view(neighbor: VehicleState, delay: float) -> VehicleState:
    _require_finite(x=neighbor.x, v=neighbor.v, a=neighbor.a, delay=delay)
    if delay < 0:
        raise NumericDomainError(f"delay must be >= 0, got {delay}")
    if delay == 0:
        return neighbor
    return VehicleState(x=neighbor.x - staleness_offset(neighbor.v, delay), v=neighbor.v, a=neighbor.a)


def clamp_jerk(a_cmd: float, a_prev: float, jerk_max: float, dt: float) -> float:
    band = jerk_max * dt
    return min(max(a_cmd, a_prev - band), a_prev + band)


def clamp_accel(a: float, a_max: float) -> float:
    return min(max(a, -a_max), a_max)


def advance_leader(leader: VehicleState, v_next: float, dt: float) -> VehicleState:
    """Replay one step of a recorded leader trace.

    Position uses the current frame's backward-difference acceleration and the
    new acceleration is the backward difference ending at `v_next`. The leader
    is not bounded by a_max.
    """
    x_next = leader.x + leader.v * dt + 0.5 * leader.a * dt * dt
    return VehicleState(x=x_next, v=v_next, a=(v_next - leader.v) / dt)
