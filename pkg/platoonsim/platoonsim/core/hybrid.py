"""Per-frame arbitration between the CACC law and the learned policy."""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from platoonsim.core.cacc import cacc_command
from platoonsim.core.ddpg import actor_action
from platoonsim.core.domain import (
    CaccGains, HybridConfig, HybridDecision, HybridState, Observation, PlatoonConfig, RewardConfig, Source,
)
from platoonsim.core.environment import normalize_observation, predict_reward
from platoonsim.core.kinematics import clamp_accel, clamp_jerk
from platoonsim.core.neuralnet import Mlp

logger = logging.getLogger(__name__)

JERK_TOLERANCE = 1e-9


@dataclass(frozen=True)
class JerkCheck:
    passed: bool
    first_violation: Optional[int] = None
    worst_step: float = 0.0


def select_action(obs: Observation, state: HybridState, a_ddpg_raw: float, a_cacc_raw: float,
                  leader_a_est: float, pred_a_est: float, platoon: PlatoonConfig, reward_cfg: RewardConfig,
                  hybrid_cfg: HybridConfig = HybridConfig()) -> Tuple[HybridDecision, HybridState]:
    """Arbitrate two raw candidate accelerations.

    Both candidates are clamped against the same previous acceleration, so any
    convex blend of them stays inside the jerk band.
    """
    a_ddpg = clamp_jerk(clamp_accel(a_ddpg_raw, platoon.a_max), state.a_prev, platoon.jerk_max, platoon.dt)
    a_cacc = clamp_jerk(clamp_accel(a_cacc_raw, platoon.a_max), state.a_prev, platoon.jerk_max, platoon.dt)

    r_ddpg = predict_reward(obs, a_ddpg, leader_a_est, pred_a_est, platoon, reward_cfg)
    r_cacc = predict_reward(obs, a_cacc, leader_a_est, pred_a_est, platoon, reward_cfg)

    # Ties go to CACC.
    source = Source.DDPG if r_ddpg > r_cacc else Source.CACC
    alpha = 1 if state.prev_source is not Source.NONE and source is not state.prev_source else 0
    beta = hybrid_cfg.beta_switch if alpha else 0.0

    chosen, other = (a_ddpg, a_cacc) if source is Source.DDPG else (a_cacc, a_ddpg)
    a_exec = (1.0 - beta) * chosen + beta * other

    decision = HybridDecision(a_ddpg=a_ddpg, a_cacc=a_cacc, r_ddpg=r_ddpg, r_cacc=r_cacc,
                              source=source, alpha=alpha, beta=beta, a_exec=a_exec)
    if alpha:
        logger.debug(f"Switch {state.prev_source.name}->{source.name}: a_ddpg={a_ddpg:.3f} "
                     f"a_cacc={a_cacc:.3f} a_exec={a_exec:.3f}")
    return decision, HybridState(prev_source=source, a_prev=a_exec)


def hcfs_select(obs: Observation, state: HybridState, actor: Mlp, gains: CaccGains, platoon: PlatoonConfig,
                reward_cfg: RewardConfig, leader_a_est: float = 0.0, pred_a_est: float = 0.0,
                hybrid_cfg: HybridConfig = HybridConfig()) -> Tuple[HybridDecision, HybridState]:
    a_ddpg = actor_action(actor, normalize_observation(obs, platoon), platoon.a_max)
    a_cacc = cacc_command(obs, gains, obs.v, platoon.dt, platoon.a_max)
    return select_action(obs, state, a_ddpg, a_cacc, leader_a_est, pred_a_est, platoon, reward_cfg, hybrid_cfg)


def verify_jerk_bound(accels: Sequence[float], jerk_max: float, dt: float) -> JerkCheck:
    """Check |a_k - a_{k-1}| <= jerk_max * dt (+1e-9) over consecutive executed actions."""
    bound = jerk_max * dt + JERK_TOLERANCE
    worst = 0.0
    for k in range(1, len(accels)):
        step = abs(accels[k] - accels[k - 1])
        worst = max(worst, step)
        if step > bound:
            return JerkCheck(False, k, worst)
    return JerkCheck(True, None, worst)
