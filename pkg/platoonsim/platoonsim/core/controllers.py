import logging
from typing import List

from platoonsim.core.cacc import cacc_command
from platoonsim.core.ddpg import actor_action
from platoonsim.core.domain import (
    BLEND_FRAME, CaccGains, HybridConfig, HybridState, Observation, PlatoonConfig, PlatoonFrame, RewardConfig,
    Source, Strategy,
)
from platoonsim.core.environment import normalize_observation
from platoonsim.core.errors import ModelRequiredError
from platoonsim.core.hybrid import hcfs_select
from platoonsim.core.kinematics import clamp_accel, clamp_jerk, delayed_view
from platoonsim.core.neuralnet import Mlp
from platoonsim.core.ports import CarFollowingController, ControlOutput

logger = logging.getLogger(__name__)


def neighbor_accels(k: int, frame: PlatoonFrame, cfg: PlatoonConfig):
    """Last observed leader and predecessor accelerations for follower k."""
    leader = delayed_view(frame.leader, cfg.v2v_delay)
    predecessor = leader if k == 1 else delayed_view(frame.followers[k - 2], cfg.v2v_delay)
    return leader.a, predecessor.a


class CaccController(CarFollowingController):
    name = Strategy.CACC.value

    def __init__(self, gains: CaccGains, platoon: PlatoonConfig):
        self.gains = gains
        self.platoon = platoon

    def reset(self, n_followers: int) -> None:
        pass

    def act(self, k: int, obs: Observation, frame: PlatoonFrame) -> ControlOutput:
        a = cacc_command(obs, self.gains, obs.v, self.platoon.dt, self.platoon.a_max)
        a = clamp_jerk(a, obs.a, self.platoon.jerk_max, self.platoon.dt)
        return ControlOutput(a_exec=a, source=int(Source.CACC))


class DdpgController(CarFollowingController):
    name = Strategy.DDPG.value

    def __init__(self, actor: Mlp, platoon: PlatoonConfig):
        self.actor = actor
        self.platoon = platoon

    def reset(self, n_followers: int) -> None:
        pass

    def act(self, k: int, obs: Observation, frame: PlatoonFrame) -> ControlOutput:
        a = actor_action(self.actor, normalize_observation(obs, self.platoon), self.platoon.a_max)
        a = clamp_jerk(clamp_accel(a, self.platoon.a_max), obs.a, self.platoon.jerk_max, self.platoon.dt)
        return ControlOutput(a_exec=a, source=int(Source.DDPG))


class HcfsController(CarFollowingController):
    """Hybrid strategy; keeps one switching state per follower."""
    name = Strategy.HCFS.value

    def __init__(self, actor: Mlp, gains: CaccGains, platoon: PlatoonConfig, reward_cfg: RewardConfig,
                 hybrid_cfg: HybridConfig):
        self.actor = actor
        self.gains = gains
        self.platoon = platoon
        self.reward_cfg = reward_cfg
        self.hybrid_cfg = hybrid_cfg
        self._states: List[HybridState] = []

    def reset(self, n_followers: int) -> None:
        self._states = [HybridState() for _ in range(n_followers)]

    def act(self, k: int, obs: Observation, frame: PlatoonFrame) -> ControlOutput:
        leader_a, pred_a = neighbor_accels(k, frame, self.platoon)
        decision, self._states[k - 1] = hcfs_select(
            obs, self._states[k - 1], self.actor, self.gains, self.platoon, self.reward_cfg,
            leader_a_est=leader_a, pred_a_est=pred_a, hybrid_cfg=self.hybrid_cfg,
        )
        source = BLEND_FRAME if decision.alpha else int(decision.source)
        return ControlOutput(a_exec=decision.a_exec, source=source)


def build_controller(strategy: Strategy, actor: Mlp, gains: CaccGains, platoon: PlatoonConfig,
                     reward_cfg: RewardConfig, hybrid_cfg: HybridConfig) -> CarFollowingController:
    if strategy.needs_model and actor is None:
        raise ModelRequiredError(f"strategy {strategy.value} needs a trained model")
    if strategy is Strategy.CACC:
        return CaccController(gains, platoon)
    if strategy is Strategy.DDPG:
        return DdpgController(actor, platoon)
    return HcfsController(actor, gains, platoon, reward_cfg, hybrid_cfg)
