from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Optional, Tuple

import numpy as np

from platoonsim.core.errors import ConfigError


@dataclass(frozen=True)
class VehicleState:
    x: float
    v: float
    a: float = 0.0


@dataclass(frozen=True)
class PlatoonConfig:
    n_followers: int = 6
    dt: float = 0.2
    vehicle_length: float = 5.0
    headway: float = 2.0
    a_max: float = 3.0
    v_max: float = 100.0 / 3.6
    jerk_max: Optional[float] = None  # None -> 2 * a_max / dt
    v2v_delay: float = 0.005

    def __post_init__(self):
        if self.jerk_max is None and self.dt > 0:
            object.__setattr__(self, "jerk_max", 2.0 * self.a_max / self.dt)
        if self.n_followers < 1:
            raise ConfigError(f"platoon.n_followers must be >= 1, got {self.n_followers}")
        for name in ("dt", "vehicle_length", "headway", "a_max", "v_max", "jerk_max"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"platoon.{name} must be > 0, got {getattr(self, name)}")
        if self.v2v_delay < 0:
            raise ConfigError(f"platoon.v2v_delay must be >= 0, got {self.v2v_delay}")

    @property
    def spacing(self) -> float:
        """Desired distance between consecutive vehicle positions (L + h)."""
        return self.vehicle_length + self.headway

    @property
    def jerk_band(self) -> float:
        return self.jerk_max * self.dt


@dataclass(frozen=True)
class RewardConfig:
    omega1: float = 10.0
    omega2: float = 0.1
    v_max: float = 100.0 / 3.6
    a_max: float = 3.0
    dt: float = 0.2

    def __post_init__(self):
        if not self.omega1 > 0 or not self.omega2 > 0:
            raise ConfigError(f"reward weights must be > 0, got omega1={self.omega1} omega2={self.omega2}")

    @classmethod
    def for_platoon(cls, platoon: PlatoonConfig, omega1: float = 10.0, omega2: float = 0.1) -> "RewardConfig":
        return cls(omega1=omega1, omega2=omega2, v_max=platoon.v_max, a_max=platoon.a_max, dt=platoon.dt)

    @property
    def jerk_scale(self) -> float:
        return 2.0 * self.a_max / self.dt


@dataclass(frozen=True)
class Observation:
    e_gap_pred: float
    e_v_pred: float
    e_gap_lead: float
    e_v_lead: float
    v: float
    a: float

    def as_array(self) -> np.ndarray:
        return np.array([self.e_gap_pred, self.e_v_pred, self.e_gap_lead, self.e_v_lead, self.v, self.a])


@dataclass(frozen=True)
class PlatoonFrame:
    leader: VehicleState
    followers: Tuple[VehicleState, ...]
    time: float = 0.0
    prev_actions: Tuple[float, ...] = ()


@dataclass(frozen=True, eq=False)
class VelocityProfile:
    dt: float
    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        if self.dt <= 0:
            raise ConfigError(f"profile dt must be > 0, got {self.dt}")
        if v.ndim != 1 or len(v) < 2:
            raise ConfigError("profile needs at least 2 samples")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ConfigError("profile velocities must be finite and >= 0")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    @property
    def duration(self) -> float:
        return (len(self.v) - 1) * self.dt

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.v))


@dataclass(frozen=True)
class CaccGains:
    k1: float = 0.01
    k2: float = 0.01
    k3: float = 0.02
    k4: float = 0.9

    def __post_init__(self):
        for name in ("k1", "k2", "k3", "k4"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"cacc.{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class DdpgConfig:
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    buffer_capacity: int = 500000
    batch_size: int = 32
    tau: float = 0.001
    gamma: float = 0.99
    ou_theta: float = 0.15
    ou_sigma: float = 0.6
    sigma_decay: float = 0.999
    episodes: int = 2000
    episode_seconds: float = 60.0
    train_followers: int = 6
    hidden_units: int = 64
    log_every: int = 50
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.tau <= 1:
            raise ConfigError(f"ddpg.tau must be in (0, 1], got {self.tau}")
        if not 0 <= self.gamma < 1:
            raise ConfigError(f"ddpg.gamma must be in [0, 1), got {self.gamma}")
        if self.batch_size < 1 or self.batch_size > self.buffer_capacity:
            raise ConfigError(
                f"ddpg.batch_size must be in [1, buffer_capacity={self.buffer_capacity}], got {self.batch_size}"
            )
        if not 0 < self.ou_theta < 1:
            raise ConfigError(f"ddpg.ou_theta must be in (0, 1), got {self.ou_theta}")
        if self.ou_sigma < 0 or not 0 < self.sigma_decay <= 1:
            raise ConfigError("ddpg.ou_sigma must be >= 0 and ddpg.sigma_decay in (0, 1]")
        if self.actor_lr < 0 or self.critic_lr < 0:
            raise ConfigError("learning rates must be >= 0")
        if self.episodes < 0 or self.episode_seconds <= 0:
            raise ConfigError("ddpg.episodes must be >= 0 and ddpg.episode_seconds > 0")
        if self.train_followers < 1 or self.hidden_units < 1 or self.log_every < 1:
            raise ConfigError("ddpg.train_followers, ddpg.hidden_units and ddpg.log_every must be >= 1")


@dataclass(frozen=True, eq=False)
class Transition:
    s: np.ndarray
    a: float
    r: float
    s_next: np.ndarray
    done: bool


class Source(IntEnum):
    NONE = -1
    CACC = 0
    DDPG = 1


# Trajectory source column value on frames where the two candidates were blended.
BLEND_FRAME = 2


class Strategy(str, Enum):
    CACC = "CACC"
    DDPG = "DDPG"
    HCFS = "HCFS"

    @property
    def needs_model(self) -> bool:
        return self is not Strategy.CACC


@dataclass(frozen=True)
class HybridConfig:
    beta_switch: float = 0.5

    def __post_init__(self):
        if not 0 <= self.beta_switch <= 1:
            raise ConfigError(f"hybrid.beta_switch must be in [0, 1], got {self.beta_switch}")


@dataclass(frozen=True)
class HybridDecision:
    a_ddpg: float
    a_cacc: float
    r_ddpg: float
    r_cacc: float
    source: Source
    alpha: int
    beta: float
    a_exec: float


@dataclass(frozen=True)
class HybridState:
    prev_source: Source = Source.NONE
    a_prev: float = 0.0


@dataclass(frozen=True)
class CaseWindow:
    name: str
    start_s: float
    end_s: float
    n_followers: int

    def __post_init__(self):
        if self.end_s <= self.start_s or self.start_s < 0:
            raise ConfigError(f"case {self.name}: invalid window {self.start_s}..{self.end_s}")
        if self.n_followers < 1:
            raise ConfigError(f"case {self.name}: n_followers must be >= 1")


@dataclass(frozen=True)
class CaseSpec:
    window: CaseWindow
    strategy: Strategy
    seed: int = 0
    init_dv: float = 0.0
    init_dgap: float = 0.0

    @property
    def name(self) -> str:
        return self.window.name

    @property
    def n_followers(self) -> int:
        return self.window.n_followers


@dataclass(frozen=True)
class TrajectoryRow:
    t: float
    vehicle_id: int
    x: float
    v: float
    a: float
    jerk: float
    e_v_lead: float
    source: int
    reward: float


@dataclass(frozen=True)
class CaseMetrics:
    sum_reward: float
    sum_abs_ev: float
    sum_abs_jerk: float
    std_ev: float
    std_jerk: float
    collision: bool = False


@dataclass(frozen=True)
class EpisodeStats:
    episode: int
    ret: float
    critic_loss: float


@dataclass(frozen=True)
class ProfileConfig:
    path: Optional[str] = None
    duration: float = 1200.0
    v_mean: float = 6.0
    amp: float = 5.0
    period: float = 40.0
    noise_sigma: float = 0.3


@dataclass(frozen=True)
class EvaluationConfig:
    cases: Tuple[CaseWindow, ...] = (
        CaseWindow("case1", 200.0, 220.0, 8),
        CaseWindow("case2", 620.0, 640.0, 6),
        CaseWindow("case3", 1020.0, 1040.0, 4),
    )
    strategies: Tuple[Strategy, ...] = (Strategy.CACC, Strategy.DDPG, Strategy.HCFS)
    init_dv: float = 0.0
    init_dgap: float = 0.0


@dataclass(frozen=True)
class RunConfig:
    platoon: PlatoonConfig = field(default_factory=PlatoonConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    cacc: CaccGains = field(default_factory=CaccGains)
    ddpg: DdpgConfig = field(default_factory=DdpgConfig)
    hybrid: HybridConfig = field(default_factory=HybridConfig)
    profile: ProfileConfig = field(default_factory=ProfileConfig)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)
    seed: int = 0
    out_dir: str = "runs"
    model_file: str = "model.txt"
    log_file: Optional[str] = None
