import os
import logging
from typing import Optional, Sequence

from platoonsim.core.controllers import build_controller
from platoonsim.core.ddpg import DdpgNetworks, train
from platoonsim.core.domain import CaseSpec, CaseWindow, RunConfig, Strategy, VelocityProfile
from platoonsim.core.errors import ModelRequiredError, TrainingDivergenceError
from platoonsim.core.evaluation import (
    CaseRun, Comparison, case_metrics, compare_report, jerk_checks, run_case, switching_summary,
)
from platoonsim.core.ports import (
    ConfigurationProvider, ModelStore, ProfileSource, ReportRow, ResultStorage,
)

logger = logging.getLogger(__name__)

LEARNING_CURVE_FILE = "learning_curve.csv"
REPORT_FILE = "report.csv"
SWITCHING_FILE = "switching.csv"
EFFECTIVE_CONFIG_FILE = "effective_config.env"


class PlatoonExperimentService:
    def __init__(
        self,
        config: RunConfig,
        config_provider: ConfigurationProvider,
        profile_source: ProfileSource,
        model_store: ModelStore,
        storage: ResultStorage,
    ):
        self.config = config
        self.config_provider = config_provider
        self.profile_source = profile_source
        self.model_store = model_store
        self.storage = storage
        self._running = False
        self._profile: Optional[VelocityProfile] = None

    def request_stop(self) -> None:
        self._running = False

    @property
    def model_path(self) -> str:
        path = self.config.model_file
        return path if os.path.isabs(path) else os.path.join(self.config.out_dir, path)

    def profile(self) -> VelocityProfile:
        if self._profile is None:
            self._profile = self.profile_source.load_profile(self.config.platoon.dt)
            logger.info(f"Leader profile: {len(self._profile.v)} samples, {self._profile.duration:.1f}s")
        return self._profile

    def _write_effective_config(self) -> None:
        self.storage.write_text(EFFECTIVE_CONFIG_FILE, self.config_provider.dump_config(self.config))

    def _load_model(self, strategies: Sequence[Strategy]) -> Optional[DdpgNetworks]:
        names = ", ".join(s.value for s in strategies if s.needs_model)
        if not names:
            logger.info("Model-free strategies only; not loading a model.")
            return None
        try:
            return self.model_store.load(self.model_path)
        except FileNotFoundError:
            raise ModelRequiredError(f"model {self.model_path} not found; required by {names}") from None

    def _controller_factory(self, networks: Optional[DdpgNetworks]):
        cfg = self.config
        actor = networks.actor if networks is not None else None
        return lambda strategy: build_controller(strategy, actor, cfg.cacc, cfg.platoon, cfg.reward, cfg.hybrid)

    def _log_jerk_checks(self, run: CaseRun) -> None:
        for vid, check in sorted(jerk_checks(run.rows, self.config.platoon).items()):
            if not check.passed:
                logger.warning(f"{run.spec.name}/{run.spec.strategy.value} vehicle {vid}: jerk bound violated "
                               f"at frame {check.first_violation}")
            logger.debug(f"{run.spec.name}/{run.spec.strategy.value} vehicle {vid}: "
                         f"largest acceleration step {check.worst_step:.4f}")

    def _write_run(self, run: CaseRun) -> str:
        return self.storage.write_trajectory(
            os.path.join("trajectories", f"{run.spec.name}_{run.spec.strategy.value}.csv"), run.rows
        )

    def train(self) -> DdpgNetworks:
        cfg = self.config
        self._running = True
        self._write_effective_config()
        held_out = [(w.start_s, w.end_s) for w in cfg.evaluation.cases]
        try:
            result = train(cfg.platoon, cfg.reward, self.profile(), cfg.ddpg, held_out=held_out,
                           should_stop=lambda: not self._running)
        except TrainingDivergenceError as e:
            logger.critical(f"Training diverged: {e}")
            if e.checkpoint is not None:
                self.model_store.save(e.checkpoint, self.model_path + ".diverged")
            self.storage.write_learning_curve(LEARNING_CURVE_FILE, e.curve)
            raise
        finally:
            self._running = False

        self.model_store.save(result.networks, self.model_path)
        path = self.storage.write_learning_curve(LEARNING_CURVE_FILE, result.curve)
        logger.info(f"Training finished after {len(result.curve)} episodes; curve written to {path}")
        return result.networks

    def evaluate(self, window: CaseWindow, strategy: Strategy) -> CaseRun:
        cfg = self.config
        self._write_effective_config()
        networks = self._load_model([strategy])
        spec = CaseSpec(window=window, strategy=strategy, seed=cfg.seed,
                        init_dv=cfg.evaluation.init_dv, init_dgap=cfg.evaluation.init_dgap)
        run = run_case(spec, self.profile(), self._controller_factory(networks)(strategy), cfg.platoon, cfg.reward)
        self._log_jerk_checks(run)
        self._write_run(run)
        metrics = case_metrics(run.rows, run.collision)
        self.storage.write_report(REPORT_FILE, [ReportRow(window.name, strategy.value, metrics)])
        logger.info(f"{window.name}/{strategy.value}: sum_reward={metrics.sum_reward:.2f} "
                    f"sum_abs_ev={metrics.sum_abs_ev:.2f} sum_abs_jerk={metrics.sum_abs_jerk:.2f}")
        return run

    def compare(self) -> Comparison:
        cfg = self.config
        self._write_effective_config()
        networks = self._load_model(cfg.evaluation.strategies)
        comparison = compare_report(
            cfg.evaluation.cases, cfg.evaluation.strategies, self.profile(), self._controller_factory(networks),
            cfg.platoon, cfg.reward, seed=cfg.seed, init_dv=cfg.evaluation.init_dv,
            init_dgap=cfg.evaluation.init_dgap,
        )
        switching = []
        for run in comparison.runs:
            self._log_jerk_checks(run)
            self._write_run(run)
            switching.extend(switching_summary(run.spec.name, run.spec.strategy.value, run.rows))
        self.storage.write_switching(SWITCHING_FILE, switching)
        path = self.storage.write_report(REPORT_FILE, comparison.report)
        logger.info(f"Comparison of {len(comparison.runs)} runs written to {path}")
        return comparison

    def synth_profile(self, name: str) -> str:
        path = self.storage.write_profile(name, self.profile())
        logger.info(f"Profile written to {path}")
        return path
