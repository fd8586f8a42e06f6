import csv
import os
import logging
from typing import Iterable, List, Sequence

from platoonsim.core.domain import EpisodeStats, TrajectoryRow, VelocityProfile
from platoonsim.core.ports import ReportRow, ResultStorage, SwitchingRow

logger = logging.getLogger(__name__)

TRAJECTORY_HEADER = ["t", "vehicle_id", "x", "v", "a", "jerk", "e_v_lead", "source", "reward"]
REPORT_HEADER = ["case", "strategy", "sum_reward", "sum_abs_ev", "sum_abs_jerk", "std_ev", "std_jerk", "collision"]
SWITCHING_HEADER = ["case", "strategy", "vehicle_id", "cacc_frames", "ddpg_frames", "blend_frames", "switches"]
CURVE_HEADER = ["episode", "return", "critic_loss"]
PROFILE_HEADER = ["t", "v"]


def _num(x: float) -> str:
    return repr(float(x))


class CsvResultStorage(ResultStorage):
    """Result files under one output directory."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir

    def _path(self, name: str) -> str:
        return name if os.path.isabs(name) else os.path.join(self.out_dir, name)

    def _write_rows(self, name: str, header: List[str], rows: Iterable[Sequence]) -> str:
        path = self._path(name)
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        logger.debug(f"Wrote {path}")
        return path

    def write_trajectory(self, name: str, rows: Sequence[TrajectoryRow]) -> str:
        return self._write_rows(name, TRAJECTORY_HEADER, (
            [_num(r.t), r.vehicle_id, _num(r.x), _num(r.v), _num(r.a), _num(r.jerk), _num(r.e_v_lead),
             r.source, _num(r.reward)]
            for r in rows
        ))

    def write_report(self, name: str, rows: Sequence[ReportRow]) -> str:
        return self._write_rows(name, REPORT_HEADER, (
            [r.case, r.strategy, _num(r.metrics.sum_reward), _num(r.metrics.sum_abs_ev),
             _num(r.metrics.sum_abs_jerk), _num(r.metrics.std_ev), _num(r.metrics.std_jerk),
             int(r.metrics.collision)]
            for r in rows
        ))

    def write_switching(self, name: str, rows: Sequence[SwitchingRow]) -> str:
        return self._write_rows(name, SWITCHING_HEADER, (
            [r.case, r.strategy, r.vehicle_id, r.cacc_frames, r.ddpg_frames, r.blend_frames, r.switches]
            for r in rows
        ))

    def write_learning_curve(self, name: str, curve: List[EpisodeStats]) -> str:
        return self._write_rows(name, CURVE_HEADER, ([e.episode, _num(e.ret), _num(e.critic_loss)] for e in curve))

    def write_profile(self, name: str, profile: VelocityProfile) -> str:
        return self._write_rows(name, PROFILE_HEADER, (
            [_num(t), _num(v)] for t, v in zip(profile.times, profile.v)
        ))

    def write_text(self, name: str, text: str) -> str:
        path = self._path(name)
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        logger.debug(f"Wrote {path}")
        return path
