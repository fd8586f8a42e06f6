# platoonsim/core/ports.py
import abc
from dataclasses import dataclass
from typing import List, Sequence

from platoonsim.core.domain import (
    CaseMetrics, EpisodeStats, Observation, PlatoonFrame, RunConfig, TrajectoryRow, VelocityProfile,
)

# --- Driven Ports (Core uses these) ---


@dataclass(frozen=True)
class ControlOutput:
    a_exec: float
    source: int  # trajectory source code: 0 CACC, 1 DDPG, 2 blend frame


class CarFollowingController(abc.ABC):
    name: str = ""

    @abc.abstractmethod
    def reset(self, n_followers: int) -> None:
        """Forget per-follower state before a new run."""
        pass

    @abc.abstractmethod
    def act(self, k: int, obs: Observation, frame: PlatoonFrame) -> ControlOutput:
        """Executed acceleration for follower k (1-based) in the current frame."""
        pass


class ProfileSource(abc.ABC):
    @abc.abstractmethod
    def load_profile(self, target_dt: float) -> VelocityProfile:
        """Leader velocity trace on the target time grid."""
        pass


class ModelStore(abc.ABC):
    @abc.abstractmethod
    def save(self, networks, path: str) -> None:
        """Persist current and target networks."""
        pass

    @abc.abstractmethod
    def load(self, path: str):
        """Load networks written by save()."""
        pass


@dataclass(frozen=True)
class ReportRow:
    case: str
    strategy: str
    metrics: CaseMetrics


@dataclass(frozen=True)
class SwitchingRow:
    case: str
    strategy: str
    vehicle_id: int
    cacc_frames: int
    ddpg_frames: int
    blend_frames: int
    switches: int


class ResultStorage(abc.ABC):
    @abc.abstractmethod
    def write_trajectory(self, name: str, rows: Sequence[TrajectoryRow]) -> str:
        pass

    @abc.abstractmethod
    def write_report(self, name: str, rows: Sequence[ReportRow]) -> str:
        pass

    @abc.abstractmethod
    def write_switching(self, name: str, rows: Sequence[SwitchingRow]) -> str:
        pass

    @abc.abstractmethod
    def write_learning_curve(self, name: str, curve: List[EpisodeStats]) -> str:
        pass

    @abc.abstractmethod
    def write_profile(self, name: str, profile: VelocityProfile) -> str:
        pass

    @abc.abstractmethod
    def write_text(self, name: str, text: str) -> str:
        pass


class ConfigurationProvider(abc.ABC):
    @abc.abstractmethod
    def get_config(self) -> RunConfig:
        """Load, validate and return the run configuration."""
        pass

    @abc.abstractmethod
    def dump_config(self, config: RunConfig) -> str:
        """Render the effective configuration in the provider's file format."""
        pass
