"""Actor-critic training with replay, target networks and mean-reverting exploration."""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from platoonsim.core.domain import (
    DdpgConfig, EpisodeStats, PlatoonConfig, RewardConfig, Transition, VelocityProfile,
)
from platoonsim.core.environment import (
    N_FEATURES, build_observation, initial_frame, normalize_observation, step_platoon,
)
from platoonsim.core.errors import NotReadyError, StructuralError, TrainingDivergenceError
from platoonsim.core.kinematics import clamp_accel
from platoonsim.core.neuralnet import (
    IDENTITY, RELU, TANH, AdamState, Mlp, adam_init, adam_step, backward, forward, init_mlp, soft_update,
)
from platoonsim.core.profiles import derive_leader_trace, slice_profile, training_offsets
from platoonsim.core.seeding import substream

logger = logging.getLogger(__name__)


@dataclass
class DdpgNetworks:
    """Current and target actor/critic plus optimizer state."""
    actor: Mlp
    critic: Mlp
    target_actor: Mlp
    target_critic: Mlp
    actor_opt: AdamState
    critic_opt: AdamState


@dataclass
class TransitionBatch:
    s: np.ndarray  # (m, 6)
    a: np.ndarray  # (m,)
    r: np.ndarray
    s_next: np.ndarray
    done: np.ndarray


@dataclass
class TrainingResult:
    networks: DdpgNetworks
    curve: List[EpisodeStats]
    stopped_early: bool = False


class ReplayBuffer:
    """Fixed-capacity ring of transitions; the oldest entry is overwritten first."""

    def __init__(self, capacity: int, n_features: int = N_FEATURES):
        if capacity < 1:
            raise StructuralError(f"replay capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.insertions = 0
        self._s = np.zeros((capacity, n_features))
        self._a = np.zeros(capacity)
        self._r = np.zeros(capacity)
        self._s_next = np.zeros((capacity, n_features))
        self._done = np.zeros(capacity)

    def __len__(self) -> int:
        return min(self.insertions, self.capacity)

    def push(self, t: Transition) -> None:
        i = self.insertions % self.capacity
        self._s[i] = t.s
        self._a[i] = t.a
        self._r[i] = t.r
        self._s_next[i] = t.s_next
        self._done[i] = 1.0 if t.done else 0.0
        self.insertions += 1

    def contents(self) -> List[Transition]:
        """Stored transitions, oldest first."""
        n = len(self)
        first = self.insertions - n
        return [self._at((first + j) % self.capacity) for j in range(n)]

    def _at(self, i: int) -> Transition:
        return Transition(self._s[i].copy(), float(self._a[i]), float(self._r[i]),
                          self._s_next[i].copy(), bool(self._done[i]))

    def sample(self, m: int, rng: np.random.Generator) -> TransitionBatch:
        """Uniform draw with replacement."""
        if len(self) < m:
            raise NotReadyError(f"replay holds {len(self)} transitions, {m} requested")
        idx = rng.integers(0, len(self), size=m)
        return TransitionBatch(self._s[idx], self._a[idx], self._r[idx], self._s_next[idx], self._done[idx])


def replay_push(buf: ReplayBuffer, t: Transition) -> ReplayBuffer:
    buf.push(t)
    return buf


def replay_sample(buf: ReplayBuffer, m: int, rng: np.random.Generator) -> TransitionBatch:
    return buf.sample(m, rng)


def ou_noise_step(n_prev: float, theta: float, sigma: float, rng: np.random.Generator) -> float:
    return n_prev + theta * (0.0 - n_prev) + sigma * rng.standard_normal()


class OuNoise:
    """Per-follower mean-reverting exploration noise, one generator each."""

    def __init__(self, n_followers: int, theta: float, sigma: float, seed: int):
        self.theta = theta
        self.sigma = sigma
        self._rngs = [substream(seed, f"noise-follower-{k}") for k in range(1, n_followers + 1)]
        self.reset()

    def reset(self) -> None:
        self.state = np.zeros(len(self._rngs))

    def sample(self) -> np.ndarray:
        self.state = np.array([
            ou_noise_step(n, self.theta, self.sigma, rng) for n, rng in zip(self.state, self._rngs)
        ])
        return self.state


def td_target(r, q_next, gamma: float, done):
    return r + gamma * q_next * (1.0 - np.asarray(done, dtype=float))


def init_networks(cfg: DdpgConfig, seed: int) -> DdpgNetworks:
    rng = substream(seed, "init")
    h = cfg.hidden_units
    actor = init_mlp([N_FEATURES, h, h, 1], [RELU, RELU, TANH], rng)
    critic = init_mlp([N_FEATURES + 1, h, h, 1], [RELU, RELU, IDENTITY], rng)
    return DdpgNetworks(actor, critic, actor.copy(), critic.copy(), adam_init(actor), adam_init(critic))


def actor_action(actor: Mlp, features: np.ndarray, a_max: float) -> float:
    out, _ = forward(actor, features)
    return float(a_max * out[0])


def _critic_input(states: np.ndarray, actions_scaled: np.ndarray) -> np.ndarray:
    return np.hstack([states, actions_scaled.reshape(-1, 1)])


def actor_gradients(actor: Mlp, critic: Mlp, states: np.ndarray) -> Tuple[List[np.ndarray], float]:
    """Sampled policy gradient: grad of mean Q(s, mu(s)) w.r.t. actor parameters."""
    m = len(states)
    mu, actor_cache = forward(actor, states)
    q, critic_cache = forward(critic, _critic_input(states, mu[:, 0]))
    _, dx = backward(critic, critic_cache, np.full_like(q, 1.0 / m))
    grads, _ = backward(actor, actor_cache, dx[:, -1:])
    return grads, float(q.mean())


def critic_gradients(critic: Mlp, inputs: np.ndarray, targets: np.ndarray) -> Tuple[List[np.ndarray], float]:
    """Gradient of the mean squared TD error."""
    q, cache = forward(critic, inputs)
    err = q[:, 0] - targets
    loss = float(np.mean(err * err))
    grads, _ = backward(critic, cache, (2.0 * err / len(err)).reshape(-1, 1))
    return grads, loss


def update_step(nets: DdpgNetworks, batch: TransitionBatch, cfg: DdpgConfig,
                a_max: float) -> Tuple[DdpgNetworks, float, float]:
    # Critic: regress onto targets from the target networks.
    mu_next, _ = forward(nets.target_actor, batch.s_next)
    q_next, _ = forward(nets.target_critic, _critic_input(batch.s_next, mu_next[:, 0]))
    y = td_target(batch.r, q_next[:, 0], cfg.gamma, batch.done)
    critic_grads, critic_loss = critic_gradients(nets.critic, _critic_input(batch.s, batch.a / a_max), y)
    if not math.isfinite(critic_loss):
        raise TrainingDivergenceError(f"critic loss became {critic_loss}")
    critic, critic_opt = adam_step(nets.critic, critic_grads, nets.critic_opt, cfg.critic_lr)

    # Actor: ascend mean Q(s, mu(s)) through the updated critic.
    actor_grads, objective = actor_gradients(nets.actor, critic, batch.s)
    actor, actor_opt = adam_step(nets.actor, [-g for g in actor_grads], nets.actor_opt, cfg.actor_lr)

    updated = DdpgNetworks(
        actor=actor,
        critic=critic,
        target_actor=soft_update(nets.target_actor, actor, cfg.tau),
        target_critic=soft_update(nets.target_critic, critic, cfg.tau),
        actor_opt=actor_opt,
        critic_opt=critic_opt,
    )
    logger.debug(f"update: critic_loss={critic_loss:.6f} actor_objective={objective:.6f}")
    return updated, critic_loss, objective


def run_episode(nets: DdpgNetworks, buffer: ReplayBuffer, profile: VelocityProfile, noise: OuNoise,
                platoon: PlatoonConfig, reward_cfg: RewardConfig, cfg: DdpgConfig,
                rng: np.random.Generator) -> Tuple[DdpgNetworks, float, List[float]]:
    """Roll out one episode, learning after every frame once the buffer is ready."""
    leader_trace = derive_leader_trace(profile)
    n = cfg.train_followers
    frame = initial_frame(leader_trace[0], n, platoon)
    features = np.array([normalize_observation(build_observation(k, frame, platoon), platoon)
                         for k in range(1, n + 1)])
    noise.reset()
    episode_return = 0.0
    losses: List[float] = []
    steps = len(leader_trace) - 1

    for i in range(steps):
        mu, _ = forward(nets.actor, features)
        explored = platoon.a_max * mu[:, 0] + noise.sample()
        actions = [clamp_accel(float(a), platoon.a_max) for a in explored]
        step = step_platoon(frame, actions, leader_trace[i + 1].v, platoon, reward_cfg)
        next_features = np.array([normalize_observation(o, platoon) for o in step.observations])
        done = step.collision or i == steps - 1
        for k in range(n):
            buffer.push(Transition(features[k], actions[k], step.rewards[k], next_features[k], done))
        episode_return += sum(step.rewards)

        if len(buffer) >= cfg.batch_size:
            nets, loss, _ = update_step(nets, buffer.sample(cfg.batch_size, rng), cfg, platoon.a_max)
            losses.append(loss)

        frame, features = step.frame, next_features
        if step.collision:
            logger.debug(f"Training episode ended by collision at t={frame.time:.1f}s")
            break
    return nets, episode_return, losses


def train(platoon: PlatoonConfig, reward_cfg: RewardConfig, profile: VelocityProfile, cfg: DdpgConfig,
          held_out: Sequence[Tuple[float, float]] = (),
          should_stop: Optional[Callable[[], bool]] = None) -> TrainingResult:
    """Train one shared policy on random slices of `profile`.

    All followers of the training platoon feed the same replay buffer.
    Deterministic for a given (platoon, reward_cfg, profile, cfg).
    """
    nets = init_networks(cfg, cfg.seed)
    curve: List[EpisodeStats] = []
    if cfg.episodes == 0:
        return TrainingResult(nets, curve)

    rng = substream(cfg.seed, "training")
    offsets = training_offsets(profile, cfg.episode_seconds, held_out)
    buffer = ReplayBuffer(cfg.buffer_capacity)
    noise = OuNoise(cfg.train_followers, cfg.ou_theta, cfg.ou_sigma, cfg.seed)
    logger.info(
        f"Training {cfg.episodes} episodes of {cfg.episode_seconds}s with {cfg.train_followers} followers "
        f"({len(offsets)} admissible slice offsets)"
    )

    for episode in range(cfg.episodes):
        start = int(offsets[rng.integers(0, len(offsets))]) * profile.dt
        episode_profile = slice_profile(profile, start, start + cfg.episode_seconds)
        noise.sigma = cfg.ou_sigma * cfg.sigma_decay ** episode
        last_good = nets
        try:
            nets, ret, losses = run_episode(nets, buffer, episode_profile, noise, platoon, reward_cfg, cfg, rng)
        except TrainingDivergenceError as e:
            logger.error(f"Training diverged in episode {episode}: {e}")
            raise TrainingDivergenceError(str(e), checkpoint=last_good, curve=curve) from e

        loss = float(np.mean(losses)) if losses else math.nan
        curve.append(EpisodeStats(episode=episode, ret=ret, critic_loss=loss))
        if (episode + 1) % cfg.log_every == 0 or episode == cfg.episodes - 1:
            logger.info(f"Episode {episode + 1}/{cfg.episodes}: return={ret:.3f} critic_loss={loss:.6f} "
                        f"sigma={noise.sigma:.4f}")
        if should_stop is not None and should_stop():
            logger.warning(f"Stop requested, ending training after episode {episode + 1}")
            return TrainingResult(nets, curve, stopped_early=True)

    return TrainingResult(nets, curve)

