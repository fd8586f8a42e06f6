import csv
import logging
import math
import os
from typing import List

from platoonsim.core.domain import VelocityProfile
from platoonsim.core.errors import ProfileFormatError
from platoonsim.core.ports import ProfileSource
from platoonsim.core.profiles import resample

logger = logging.getLogger(__name__)

HEADER = ["t", "v"]


class CsvProfileSource(ProfileSource):
    """Leader velocity trace from a two-column "t,v" file."""

    def __init__(self, file_path: str, v_max: float):
        self.file_path = file_path
        self.v_max = v_max

    def load_profile(self, target_dt: float) -> VelocityProfile:
        if not os.path.exists(self.file_path):
            raise FileNotFoundError(f"profile file not found: {self.file_path}")

        times: List[float] = []
        values: List[float] = []
        with open(self.file_path, "r", newline="") as f:
            reader = csv.reader(f)
            for row in reader:
                line = reader.line_num
                if not row or all(not cell.strip() for cell in row):
                    continue
                if line == 1 and [cell.strip().lower() for cell in row] == HEADER:
                    continue
                if len(row) != 2:
                    raise ProfileFormatError(f"expected 2 fields, got {len(row)}", line, self.file_path)
                try:
                    t, v = float(row[0]), float(row[1])
                except ValueError:
                    raise ProfileFormatError(f"non-numeric field in {row!r}", line, self.file_path) from None
                if not (math.isfinite(t) and math.isfinite(v)):
                    raise ProfileFormatError("non-finite value", line, self.file_path)
                if not times and t != 0.0:
                    raise ProfileFormatError(f"trace must start at t=0, got {t}", line, self.file_path)
                if times and t <= times[-1]:
                    raise ProfileFormatError(
                        f"time {t} does not increase (previous {times[-1]})", line, self.file_path
                    )
                times.append(t)
                values.append(v)

        if len(times) < 2:
            raise ProfileFormatError(f"need at least 2 data rows, got {len(times)}", None, self.file_path)
        if target_dt > 0 and times[-1] / target_dt + 1e-9 < 1.0:
            raise ProfileFormatError(
                f"span of {times[-1]}s is shorter than one {target_dt}s step", None, self.file_path
            )
        profile = resample(times, values, target_dt, self.v_max)
        logger.info(f"Loaded profile {self.file_path}: {len(times)} rows -> {len(profile.v)} samples "
                    f"at dt={target_dt}s")
        return profile
