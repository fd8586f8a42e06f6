import logging

from platoonsim.core.domain import ProfileConfig, VelocityProfile
from platoonsim.core.ports import ProfileSource
from platoonsim.core.profiles import synth_stop_and_go

logger = logging.getLogger(__name__)


class SyntheticProfileSource(ProfileSource):
    """Stop-and-go leader trace generated from the profile settings and root seed."""

    def __init__(self, settings: ProfileConfig, seed: int, v_max: float):
        self.settings = settings
        self.seed = seed
        self.v_max = v_max
        logger.info("Initialized synthetic stop-and-go profile source")

    def load_profile(self, target_dt: float) -> VelocityProfile:
        s = self.settings
        return synth_stop_and_go(
            duration=s.duration, dt=target_dt, v_mean=s.v_mean, amp=s.amp, period=s.period,
            noise_sigma=s.noise_sigma, seed=self.seed, v_max=self.v_max,
        )
