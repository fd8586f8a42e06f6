"""Car-following MDP: observations, rewards and the platoon transition."""
import logging
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from platoonsim.core.domain import Observation, PlatoonConfig, PlatoonFrame, RewardConfig, VehicleState
from platoonsim.core.errors import StructuralError
from platoonsim.core.kinematics import advance_leader, delayed_view, step_vehicle

logger = logging.getLogger(__name__)

# Fixed network-input scale for distance errors (m).
DISTANCE_SCALE = 100.0
N_FEATURES = 6


class PlatoonStep(NamedTuple):
    frame: PlatoonFrame
    observations: Tuple[Observation, ...]
    rewards: Tuple[float, ...]
    collision: bool


def initial_frame(leader: VehicleState, n_followers: int, cfg: PlatoonConfig,
                  dv: Sequence[float] = (), dgap: Sequence[float] = ()) -> PlatoonFrame:
    """Followers at the desired spacing behind `leader`, at its velocity, with a = 0.

    Optional per-follower perturbations shift the velocity (dv) and the gap to
    the predecessor (dgap, positive means further back).
    """
    followers = []
    x_prev = leader.x
    for k in range(n_followers):
        gap = cfg.spacing + (dgap[k] if k < len(dgap) else 0.0)
        v = max(0.0, leader.v + (dv[k] if k < len(dv) else 0.0))
        x_prev = x_prev - gap
        followers.append(VehicleState(x=x_prev, v=v, a=0.0))
    return PlatoonFrame(leader=leader, followers=tuple(followers), time=0.0,
                        prev_actions=tuple(0.0 for _ in range(n_followers)))


def build_observation(k: int, frame: PlatoonFrame, cfg: PlatoonConfig) -> Observation:
    """Observation of follower `k` (1-based); errors are neighbor minus ego."""
    n = len(frame.followers)
    if not 1 <= k <= n:
        raise StructuralError(f"follower index {k} out of range 1..{n}")

    ego = frame.followers[k - 1]
    leader = delayed_view(frame.leader, cfg.v2v_delay)
    predecessor = leader if k == 1 else delayed_view(frame.followers[k - 2], cfg.v2v_delay)

    return Observation(
        e_gap_pred=(predecessor.x - ego.x) - cfg.spacing,
        e_v_pred=predecessor.v - ego.v,
        e_gap_lead=(leader.x - ego.x) - k * cfg.spacing,
        e_v_lead=leader.v - ego.v,
        v=ego.v,
        a=ego.a,
    )


def normalize_observation(obs: Observation, cfg: PlatoonConfig) -> np.ndarray:
    return np.array([
        obs.e_gap_pred / DISTANCE_SCALE,
        obs.e_v_pred / cfg.v_max,
        obs.e_gap_lead / DISTANCE_SCALE,
        obs.e_v_lead / cfg.v_max,
        obs.v / cfg.v_max,
        obs.a / cfg.a_max,
    ])


def compute_reward(e_v_lead: float, jerk: float, cfg: RewardConfig) -> float:
    return -cfg.omega1 * abs(e_v_lead) / cfg.v_max - cfg.omega2 * abs(jerk) / cfg.jerk_scale


def predict_observation(obs: Observation, a_cand: float, leader_a_est: float, pred_a_est: float,
                        cfg: PlatoonConfig) -> Observation:
    """One-step model rollout of the ego observation.

    The ego is advanced with `a_cand`; leader and predecessor are advanced with
    their last observed accelerations; their positions use the plain
    constant-acceleration update without the velocity floor.
    """
    dt = cfg.dt
    v_lead = obs.v + obs.e_v_lead
    v_pred = obs.v + obs.e_v_pred

    ego_next = step_vehicle(VehicleState(x=0.0, v=obs.v, a=obs.a), a_cand, dt)
    v_lead_next = max(0.0, v_lead + leader_a_est * dt)
    v_pred_next = max(0.0, v_pred + pred_a_est * dt)
    d_lead = v_lead * dt + 0.5 * leader_a_est * dt * dt
    d_pred = v_pred * dt + 0.5 * pred_a_est * dt * dt

    return Observation(
        e_gap_pred=obs.e_gap_pred + d_pred - ego_next.x,
        e_v_pred=v_pred_next - ego_next.v,
        e_gap_lead=obs.e_gap_lead + d_lead - ego_next.x,
        e_v_lead=v_lead_next - ego_next.v,
        v=ego_next.v,
        a=a_cand,
    )


def predict_reward(obs: Observation, a_cand: float, leader_a_est: float, pred_a_est: float,
                   cfg: PlatoonConfig, reward_cfg: RewardConfig) -> float:
    predicted = predict_observation(obs, a_cand, leader_a_est, pred_a_est, cfg)
    jerk = (a_cand - obs.a) / cfg.dt
    return compute_reward(predicted.e_v_lead, jerk, reward_cfg)


def has_collision(frame: PlatoonFrame, cfg: PlatoonConfig) -> bool:
    x_prev = frame.leader.x
    for follower in frame.followers:
        if x_prev - follower.x <= cfg.vehicle_length:
            return True
        x_prev = follower.x
    return False


def step_platoon(frame: PlatoonFrame, actions: Sequence[float], leader_next_v: float,
                 cfg: PlatoonConfig, reward_cfg: RewardConfig) -> PlatoonStep:
    if len(actions) != len(frame.followers):
        raise StructuralError(f"expected {len(frame.followers)} actions, got {len(actions)}")

    leader = advance_leader(frame.leader, leader_next_v, cfg.dt)
    followers: List[VehicleState] = []
    rewards: List[float] = []
    for follower, action in zip(frame.followers, actions):
        moved = step_vehicle(follower, action, cfg.dt)
        followers.append(moved)
        jerk = (action - follower.a) / cfg.dt
        rewards.append(compute_reward(leader.v - moved.v, jerk, reward_cfg))

    next_frame = PlatoonFrame(
        leader=leader,
        followers=tuple(followers),
        time=frame.time + cfg.dt,
        prev_actions=tuple(float(a) for a in actions),
    )
    observations = tuple(build_observation(k, next_frame, cfg) for k in range(1, len(followers) + 1))
    collision = has_collision(next_frame, cfg)
    if collision:
        logger.debug(f"Collision at t={next_frame.time:.2f}s")
    return PlatoonStep(next_frame, observations, tuple(rewards), collision)
