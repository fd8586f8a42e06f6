from platoonsim.core.domain import CaccGains, Observation
from platoonsim.core.kinematics import clamp_accel


def cacc_velocity_command(obs: Observation, gains: CaccGains, v_last: float) -> float:
    return (v_last
            + gains.k1 * obs.e_gap_pred
            + gains.k2 * obs.e_v_pred
            + gains.k3 * obs.e_gap_lead
            + gains.k4 * obs.e_v_lead)


def cacc_command(obs: Observation, gains: CaccGains, v_last: float, dt: float, a_max: float) -> float:
    """Acceleration that reaches the CACC target velocity in one step, clamped to +-a_max.

    Jerk clamping is left to the caller.
    """
    v_cmd = cacc_velocity_command(obs, gains, v_last)
    return clamp_accel((v_cmd - v_last) / dt, a_max)
