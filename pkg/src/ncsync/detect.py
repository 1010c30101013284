"""Peak search over a metric trace: timing decision plus CFO estimate."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metrics import MetricTrace
from .streaming import OpCounters

TIMING_RULES = ("argmax", "midpoint90")


class NoSignalError(ValueError):
    """Raised when the whole trace has zero energy (nothing to detect)."""


@dataclass
class SyncResult:
    """Detection outcome: timing n_hat (frame-relative), CFO in subcarrier
    spacings, the metric's peak value, and the op counters spent getting it."""

    n_hat: int
    nu_hat: float
    peak_value: float
    mode: str
    ops: OpCounters = field(default_factory=OpCounters)


def _plateau_midpoint(metric: np.ndarray, i_peak: int) -> int:
    """Midpoint of the contiguous run around i_peak with metric >= 0.9 peak."""
    thresh = 0.9 * metric[i_peak]
    lo = i_peak
    while lo > 0 and metric[lo - 1] >= thresh:
        lo -= 1
    hi = i_peak
    while hi < metric.size - 1 and metric[hi + 1] >= thresh:
        hi += 1
    return (lo + hi) // 2


def detect(trace: MetricTrace, mode: str = "nirs", timing_rule: str = "argmax",
           ops: OpCounters | None = None) -> SyncResult:
    """Locate the preamble in a metric trace and read off the CFO.

    timing_rule "argmax" takes the global metric maximum; "midpoint90" takes
    the midpoint of the >= 90%-of-peak plateau around it, which centers the
    estimate when the cyclic prefix creates a flat top.  The CFO estimate is
    arg(numerator(n_hat)) / pi.  Raises NoSignalError when M is zero
    everywhere.
    """
    if timing_rule not in TIMING_RULES:
        raise ValueError(f"unknown timing rule {timing_rule!r}; expected one of {TIMING_RULES}")
    if len(trace) == 0:
        raise ValueError("empty metric trace")
    if not np.any(trace.m > 0):
        raise NoSignalError("energy normalizer is zero over the whole trace")
    metric = trace.metric(mode)
    i_peak = int(np.argmax(metric))
    idx = i_peak if timing_rule == "argmax" else _plateau_midpoint(metric, i_peak)
    nu_hat = float(np.angle(trace.numerator(mode)[idx]) / np.pi)
    return SyncResult(n_hat=int(trace.n[idx]), nu_hat=nu_hat,
                      peak_value=float(metric[i_peak]), mode=mode,
                      ops=ops if ops is not None else OpCounters())
