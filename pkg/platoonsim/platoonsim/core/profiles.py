import logging
import math
from typing import List, Sequence, Tuple

import numpy as np

from platoonsim.core.domain import VehicleState, VelocityProfile
from platoonsim.core.errors import ConfigError
from platoonsim.core.kinematics import advance_leader
from platoonsim.core.seeding import substream

logger = logging.getLogger(__name__)


def resample(times: Sequence[float], values: Sequence[float], target_dt: float, v_max: float) -> VelocityProfile:
    """Linearly resample a (t, v) series onto a uniform grid starting at t[0].

    Case windows and training offsets count from the first sample.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if target_dt <= 0:
        raise ConfigError(f"target dt must be > 0, got {target_dt}")
    n = int(math.floor((t[-1] - t[0]) / target_dt + 1e-9)) + 1
    grid = t[0] + target_dt * np.arange(n)
    return VelocityProfile(dt=target_dt, v=np.clip(np.interp(grid, t, v), 0.0, v_max))


def synth_stop_and_go(duration: float, dt: float, v_mean: float, amp: float, period: float,
                      noise_sigma: float, seed: int, v_max: float) -> VelocityProfile:
    """Sinusoidal stop-and-go leader trace with smoothed Gaussian noise."""
    if duration <= 0 or dt <= 0 or period <= 0:
        raise ConfigError("duration, dt and period must be > 0")
    if not 0 <= amp <= v_mean:
        raise ConfigError(f"amp must be in [0, v_mean={v_mean}], got {amp}")
    if noise_sigma < 0:
        raise ConfigError(f"noise_sigma must be >= 0, got {noise_sigma}")

    n = int(round(duration / dt)) + 1
    t = dt * np.arange(n)
    v = v_mean + amp * np.sin(2.0 * np.pi * t / period)
    if noise_sigma > 0:
        rng = substream(seed, "profile-synth")
        noise = rng.normal(0.0, noise_sigma, n)
        v = v + np.convolve(noise, np.ones(3) / 3.0, mode="same")
    logger.debug(f"Synthesized {n} samples (v_mean={v_mean}, amp={amp}, period={period}, sigma={noise_sigma})")
    return VelocityProfile(dt=dt, v=np.clip(v, 0.0, v_max))


def derive_leader_trace(profile: VelocityProfile, x0: float = 0.0) -> List[VehicleState]:
    trace = [VehicleState(x=x0, v=float(profile.v[0]), a=0.0)]
    for v_next in profile.v[1:]:
        trace.append(advance_leader(trace[-1], float(v_next), profile.dt))
    return trace


def slice_profile(profile: VelocityProfile, start_s: float, end_s: float) -> VelocityProfile:
    i0 = int(round(start_s / profile.dt))
    i1 = int(round(end_s / profile.dt))
    if i0 < 0 or i1 >= len(profile.v) or i1 - i0 < 1:
        raise ConfigError(
            f"slice {start_s}..{end_s}s outside profile of {profile.duration:.1f}s"
        )
    return VelocityProfile(dt=profile.dt, v=profile.v[i0:i1 + 1])


def training_offsets(profile: VelocityProfile, episode_seconds: float,
                     held_out: Sequence[Tuple[float, float]] = ()) -> np.ndarray:
    """Start indices of episode slices that do not overlap any held-out window."""
    steps = int(round(episode_seconds / profile.dt))
    last = len(profile.v) - 1 - steps
    if last < 0:
        raise ConfigError(
            f"profile of {profile.duration:.1f}s is shorter than one {episode_seconds}s episode"
        )
    starts = np.arange(last + 1)
    keep = np.ones(len(starts), dtype=bool)
    for start_s, end_s in held_out:
        lo = int(round(start_s / profile.dt))
        hi = int(round(end_s / profile.dt))
        keep &= (starts + steps < lo) | (starts > hi)
    if not keep.any():
        raise ConfigError("no training slice remains after excluding the evaluation windows")
    return starts[keep]
