import os
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

from dotenv import dotenv_values

from platoonsim.core.domain import (
    CaccGains, CaseWindow, DdpgConfig, EvaluationConfig, HybridConfig, PlatoonConfig, ProfileConfig,
    RewardConfig, RunConfig, Strategy,
)
from platoonsim.core.errors import ConfigError
from platoonsim.core.ports import ConfigurationProvider

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = "default"


def _optional_float(value: str) -> Optional[float]:
    return float(value) if value.strip() else None


def _optional_str(value: str) -> Optional[str]:
    return value.strip() or None


def _cases(value: str) -> Tuple[CaseWindow, ...]:
    windows = []
    for i, item in enumerate(filter(None, (s.strip() for s in value.split(","))), start=1):
        start, end, followers = item.split(":")
        windows.append(CaseWindow(f"case{i}", float(start), float(end), int(followers)))
    if not windows:
        raise ValueError("at least one case is required")
    return tuple(windows)


def _strategies(value: str) -> Tuple[Strategy, ...]:
    strategies = tuple(Strategy(s.strip().upper()) for s in value.split(",") if s.strip())
    if not strategies:
        raise ValueError("at least one strategy is required")
    return strategies


def _format_cases(cases: Tuple[CaseWindow, ...]) -> str:
    return ",".join(f"{c.start_s!r}:{c.end_s!r}:{c.n_followers}" for c in cases)


@dataclass(frozen=True)
class ConfigKey:
    key: str
    default: str
    parse: Callable[[str], Any]

    @property
    def leaf(self) -> str:
        return self.key.rsplit(".", 1)[-1]


SCHEMA: List[ConfigKey] = [
    ConfigKey("platoon.n_followers", "6", int),
    ConfigKey("platoon.dt", "0.2", float),
    ConfigKey("platoon.vehicle_length", "5.0", float),
    ConfigKey("platoon.headway", "2.0", float),
    ConfigKey("platoon.a_max", "3.0", float),
    ConfigKey("platoon.v_max", repr(100.0 / 3.6), float),
    ConfigKey("platoon.jerk_max", "", _optional_float),
    ConfigKey("platoon.v2v_delay", "0.005", float),
    ConfigKey("reward.omega1", "10.0", float),
    ConfigKey("reward.omega2", "0.1", float),
    ConfigKey("cacc.k1", "0.01", float),
    ConfigKey("cacc.k2", "0.01", float),
    ConfigKey("cacc.k3", "0.02", float),
    ConfigKey("cacc.k4", "0.9", float),
    ConfigKey("ddpg.actor_lr", "0.0001", float),
    ConfigKey("ddpg.critic_lr", "0.001", float),
    ConfigKey("ddpg.buffer_capacity", "500000", int),
    ConfigKey("ddpg.batch_size", "32", int),
    ConfigKey("ddpg.tau", "0.001", float),
    ConfigKey("ddpg.gamma", "0.99", float),
    ConfigKey("ddpg.ou_theta", "0.15", float),
    ConfigKey("ddpg.ou_sigma", "0.6", float),
    ConfigKey("ddpg.sigma_decay", "0.999", float),
    ConfigKey("ddpg.episodes", "2000", int),
    ConfigKey("ddpg.episode_seconds", "60.0", float),
    ConfigKey("ddpg.train_followers", "6", int),
    ConfigKey("ddpg.hidden_units", "64", int),
    ConfigKey("ddpg.log_every", "50", int),
    ConfigKey("hybrid.beta_switch", "0.5", float),
    ConfigKey("profile.path", "", _optional_str),
    ConfigKey("profile.duration", "1200.0", float),
    ConfigKey("profile.v_mean", "6.0", float),
    ConfigKey("profile.amp", "5.0", float),
    ConfigKey("profile.period", "40.0", float),
    ConfigKey("profile.noise_sigma", "0.3", float),
    ConfigKey("evaluation.cases", "200:220:8,620:640:6,1020:1040:4", _cases),
    ConfigKey("evaluation.strategies", "CACC,DDPG,HCFS", _strategies),
    ConfigKey("evaluation.init_dv", "0.0", float),
    ConfigKey("evaluation.init_dgap", "0.0", float),
    ConfigKey("run.seed", "0", int),
    ConfigKey("run.out_dir", "runs", str),
    ConfigKey("run.model", "model.txt", str),
    ConfigKey("run.log_file", "", _optional_str),
]
SCHEMA_BY_KEY: Dict[str, ConfigKey] = {k.key: k for k in SCHEMA}


class DotfileConfigProvider(ConfigurationProvider):
    """Flat dotted key=value configuration file, plus command-line overrides."""

    def __init__(self, config_path: Optional[str] = None, overrides: Optional[Mapping[str, str]] = None):
        self.config_path = config_path
        self.overrides = dict(overrides or {})
        self._config: Optional[RunConfig] = None

    def _load_file(self) -> Dict[str, str]:
        if not self.config_path or self.config_path == DEFAULT_CONFIG:
            logger.info("Using built-in default configuration.")
            return {}
        if not os.path.exists(self.config_path):
            raise ConfigError(f"config file not found: {self.config_path}")
        values = dotenv_values(self.config_path, interpolate=False)
        logger.info(f"Loaded {len(values)} configuration keys from {self.config_path}")
        missing = [key for key, value in values.items() if value is None]
        if missing:
            raise ConfigError(f"{self.config_path}: keys without a value: {', '.join(missing)}")
        return dict(values)

    def raw_values(self) -> Dict[str, str]:
        values = {k.key: k.default for k in SCHEMA}
        for source in (self._load_file(), self.overrides):
            unknown = sorted(set(source) - set(SCHEMA_BY_KEY))
            if unknown:
                raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
            values.update(source)
        return values

    def get_config(self) -> RunConfig:
        if self._config is None:
            self._config = build_run_config(self.raw_values())
        return self._config

    def dump_config(self, config: RunConfig) -> str:
        lines = [f"{key}={value}" for key, value in flatten_run_config(config).items()]
        return "\n".join(lines) + "\n"


def build_run_config(values: Mapping[str, str]) -> RunConfig:
    parsed: Dict[str, Any] = {}
    for key, raw in values.items():
        try:
            parsed[key] = SCHEMA_BY_KEY[key].parse(raw)
        except (ValueError, TypeError) as e:
            raise ConfigError(f"invalid value for {key}: {raw!r} ({e})") from e

    def section(prefix: str) -> Dict[str, Any]:
        return {k.split(".", 1)[1]: v for k, v in parsed.items() if k.startswith(prefix + ".")}

    platoon = PlatoonConfig(**section("platoon"))
    reward = section("reward")
    run = section("run")
    ddpg = DdpgConfig(seed=run["seed"], **section("ddpg"))
    return RunConfig(
        platoon=platoon,
        reward=RewardConfig.for_platoon(platoon, omega1=reward["omega1"], omega2=reward["omega2"]),
        cacc=CaccGains(**section("cacc")),
        ddpg=ddpg,
        hybrid=HybridConfig(**section("hybrid")),
        profile=ProfileConfig(**section("profile")),
        evaluation=EvaluationConfig(**section("evaluation")),
        seed=run["seed"],
        out_dir=run["out_dir"],
        model_file=run["model"],
        log_file=run["log_file"],
    )


def flatten_run_config(config: RunConfig) -> Dict[str, str]:
    """Inverse of build_run_config: every schema key with its effective value."""

    def fmt(value: Any) -> str:
        if value is None:
            return ""
        if isinstance(value, float):
            return repr(value)
        return str(value)

    values: Dict[str, str] = {}
    for key in SCHEMA:
        section, name = key.key.split(".", 1)
        if section == "evaluation" and name == "cases":
            values[key.key] = _format_cases(config.evaluation.cases)
        elif section == "evaluation" and name == "strategies":
            values[key.key] = ",".join(s.value for s in config.evaluation.strategies)
        elif section == "run":
            attr = {"seed": "seed", "out_dir": "out_dir", "model": "model_file", "log_file": "log_file"}[name]
            values[key.key] = fmt(getattr(config, attr))
        else:
            values[key.key] = fmt(getattr(getattr(config, section), name))
    return values
