"""定常レートの判定です。
立ち上がりと終端を切り落とした中央区間の平均と変動係数で判定します。
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ingestbench.constants import CV_MAX, ONE_MINUTE_S, RAMP_SKIP_S, TAIL_SKIP_S
from ingestbench.errors import InsufficientData


@dataclass(frozen=True)
class SteadyWindow:
    steady: bool
    rate: float
    cv: float
    start: float
    end: float
    points: int


def steady_window(
    series: Sequence[Tuple[float, float]],
    ramp_skip: float = RAMP_SKIP_S,
    tail_skip: float = TAIL_SKIP_S,
    cv_max: float = CV_MAX,
) -> SteadyWindow:
    if len(series) < 2:
        raise InsufficientData("series needs at least two points")
    data = np.asarray(series, dtype=np.float64)
    t, values = data[:, 0], data[:, 1]
    t0, t1 = float(t[0]), float(t[-1])
    if t1 - t0 <= ramp_skip + tail_skip + ONE_MINUTE_S:
        raise InsufficientData(
            f"series spans {t1 - t0:g}s, needs more than {ramp_skip + tail_skip + ONE_MINUTE_S:g}s"
        )
    lo, hi = t0 + ramp_skip, t1 - tail_skip
    window = values[(t >= lo) & (t <= hi)]
    if window.size < 2:
        raise InsufficientData(f"only {int(window.size)} point(s) between {lo:g}s and {hi:g}s")
    mean = float(window.mean())
    if mean == 0.0:
        return SteadyWindow(False, 0.0, float("inf"), lo, hi, int(window.size))
    cv = float(window.std()) / abs(mean)
    return SteadyWindow(cv <= cv_max, mean, cv, lo, hi, int(window.size))


def detect_steady(
    series: Sequence[Tuple[float, float]],
    ramp_skip: float = RAMP_SKIP_S,
    tail_skip: float = TAIL_SKIP_S,
    cv_max: float = CV_MAX,
) -> Tuple[bool, float]:
    """(steady, rate) over the central window of a one-minute-rate series."""
    window = steady_window(series, ramp_skip, tail_skip, cv_max)
    return window.steady, window.rate
