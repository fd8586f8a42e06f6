"""Test-case rollouts and the aggregate comparison statistics."""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from platoonsim.core.domain import (
    BLEND_FRAME, CaseMetrics, CaseSpec, CaseWindow, PlatoonConfig, RewardConfig, Source, Strategy, TrajectoryRow,
    VelocityProfile,
)
from platoonsim.core.environment import build_observation, initial_frame, step_platoon
from platoonsim.core.errors import StructuralError
from platoonsim.core.hybrid import JerkCheck, verify_jerk_bound
from platoonsim.core.ports import CarFollowingController, ReportRow, SwitchingRow
from platoonsim.core.profiles import derive_leader_trace, slice_profile
from platoonsim.core.seeding import substream

logger = logging.getLogger(__name__)

STRATEGY_ORDER = (Strategy.CACC, Strategy.DDPG, Strategy.HCFS)


@dataclass
class CaseRun:
    spec: CaseSpec
    rows: List[TrajectoryRow] = field(default_factory=list)
    collision: bool = False
    collision_time: Optional[float] = None


def _initial_perturbation(spec: CaseSpec):
    if spec.init_dv == 0 and spec.init_dgap == 0:
        return (), ()
    rng = substream(spec.seed, "eval-init")
    dv = rng.uniform(-spec.init_dv, spec.init_dv, spec.n_followers)
    dgap = rng.uniform(-spec.init_dgap, spec.init_dgap, spec.n_followers)
    return tuple(dv), tuple(dgap)


def run_case(spec: CaseSpec, profile: VelocityProfile, controller: CarFollowingController,
             platoon: PlatoonConfig, reward_cfg: RewardConfig) -> CaseRun:
    """Simulate one slice under one strategy, one row per follower per step.

    Rows are recorded after each step; a follower's first row has jerk 0.
    A collision stops the run after the colliding frame is recorded.
    """
    leader_trace = derive_leader_trace(slice_profile(profile, spec.window.start_s, spec.window.end_s))
    dv, dgap = _initial_perturbation(spec)
    frame = initial_frame(leader_trace[0], spec.n_followers, platoon, dv=dv, dgap=dgap)
    controller.reset(spec.n_followers)
    run = CaseRun(spec=spec)

    for i in range(len(leader_trace) - 1):
        outputs = [
            controller.act(k, build_observation(k, frame, platoon), frame)
            for k in range(1, spec.n_followers + 1)
        ]
        actions = [out.a_exec for out in outputs]
        step = step_platoon(frame, actions, leader_trace[i + 1].v, platoon, reward_cfg)
        for k, (out, vehicle) in enumerate(zip(outputs, step.frame.followers), start=1):
            jerk = 0.0 if i == 0 else (out.a_exec - frame.followers[k - 1].a) / platoon.dt
            run.rows.append(TrajectoryRow(
                t=step.frame.time, vehicle_id=k, x=vehicle.x, v=vehicle.v, a=out.a_exec, jerk=jerk,
                e_v_lead=step.frame.leader.v - vehicle.v, source=out.source, reward=step.rewards[k - 1],
            ))
        frame = step.frame
        if step.collision:
            run.collision = True
            run.collision_time = frame.time
            logger.warning(f"{spec.name}/{spec.strategy.value}: collision at t={frame.time:.1f}s")
            break
    return run


def case_metrics(rows: Sequence[TrajectoryRow], collision: bool = False) -> CaseMetrics:
    if not rows:
        raise StructuralError("cannot compute metrics of an empty trajectory")
    abs_ev = np.abs([row.e_v_lead for row in rows])
    abs_jerk = np.abs([row.jerk for row in rows])
    return CaseMetrics(
        sum_reward=float(sum(row.reward for row in rows)),
        sum_abs_ev=float(abs_ev.sum()),
        sum_abs_jerk=float(abs_jerk.sum()),
        std_ev=float(np.std(abs_ev)),
        std_jerk=float(np.std(abs_jerk)),
        collision=collision,
    )


def rows_by_vehicle(rows: Sequence[TrajectoryRow]) -> Dict[int, List[TrajectoryRow]]:
    grouped: Dict[int, List[TrajectoryRow]] = {}
    for row in rows:
        grouped.setdefault(row.vehicle_id, []).append(row)
    return grouped


def jerk_checks(rows: Sequence[TrajectoryRow], platoon: PlatoonConfig) -> Dict[int, JerkCheck]:
    """Jerk bound per follower; the initial acceleration 0 precedes the first row."""
    return {
        vid: verify_jerk_bound([0.0] + [row.a for row in vrows], platoon.jerk_max, platoon.dt)
        for vid, vrows in rows_by_vehicle(rows).items()
    }


def switching_summary(case: str, strategy: str, rows: Sequence[TrajectoryRow]) -> List[SwitchingRow]:
    summary = []
    for vid, vrows in sorted(rows_by_vehicle(rows).items()):
        sources = [row.source for row in vrows]
        summary.append(SwitchingRow(
            case=case, strategy=strategy, vehicle_id=vid,
            cacc_frames=sources.count(int(Source.CACC)),
            ddpg_frames=sources.count(int(Source.DDPG)),
            blend_frames=sources.count(BLEND_FRAME),
            switches=sum(1 for a, b in zip(sources, sources[1:]) if a != b),
        ))
    return summary


def ordered_strategies(strategies: Sequence[Strategy]) -> List[Strategy]:
    """Canonical report order, independent of the order requested."""
    requested = set(strategies)
    return [s for s in STRATEGY_ORDER if s in requested]


@dataclass
class Comparison:
    report: List[ReportRow] = field(default_factory=list)
    runs: List[CaseRun] = field(default_factory=list)


def compare_report(windows: Sequence[CaseWindow], strategies: Sequence[Strategy], profile: VelocityProfile,
                   make_controller: Callable[[Strategy], CarFollowingController], platoon: PlatoonConfig,
                   reward_cfg: RewardConfig, seed: int = 0, init_dv: float = 0.0,
                   init_dgap: float = 0.0) -> Comparison:
    """Every window under every strategy; rows ordered by window, then canonical strategy order."""
    comparison = Comparison()
    for window in windows:
        for strategy in ordered_strategies(strategies):
            spec = CaseSpec(window=window, strategy=strategy, seed=seed, init_dv=init_dv, init_dgap=init_dgap)
            run = run_case(spec, profile, make_controller(strategy), platoon, reward_cfg)
            metrics = case_metrics(run.rows, run.collision)
            logger.info(
                f"{window.name}/{strategy.value}: sum_reward={metrics.sum_reward:.2f} "
                f"sum_abs_ev={metrics.sum_abs_ev:.2f} sum_abs_jerk={metrics.sum_abs_jerk:.2f} "
                f"collision={metrics.collision}"
            )
            comparison.report.append(ReportRow(case=window.name, strategy=strategy.value, metrics=metrics))
            comparison.runs.append(run)
    return comparison
