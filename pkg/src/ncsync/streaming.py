"""Sample-at-a-time correlator with O(1) work per sample and op accounting.

Each metric window shares almost everything with its predecessor, so after a
one-off direct summation the correlator advances by retiring one term and
admitting one term per quantity:

  G(n) = G(n-1) - p_g(n-1)            + p_g(n-1+N/2)
  M(n) = M(n-1) - |r(n-1+N/2)|^2      + |r(n-1+N)|^2
  Q(n) = Q(n-1) + [p_q(n-1+3N/4) - p_q(n-1) + p_q(n-1+N/2) - p_q(n-1+N/4)] / 2

with p_g(i) = conj(r(i)) r(i+N/2) and p_q(i) = conj(r(i)) r(i+N/4).  Retired
and interior terms come from product delay lines, so each step performs exactly
one new complex multiply per product stream.  Real-operation counters tick at
the sites where that arithmetic happens; the totals per counted step are the
per-sample hardware cost of each algorithm (plain correlator: 10 add/sub,
10 mul/div; interference-hardened: 24, 24, plus one square root).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .metrics import MetricTrace
from .ofdm import TimeSignal

MODES = ("sc", "nirs")

# Real-operation cost per counted step, keyed by mode:
# (add_sub, mul_div, sqrt).
COST_PER_SAMPLE = {"sc": (10, 10, 0), "nirs": (24, 24, 1)}


@dataclass
class OpCounters:
    """Tallies of real arithmetic operations (a complex multiply is 4m + 2a)."""

    add_sub: int = 0
    mul_div: int = 0
    sqrt: int = 0

    def tally(self, add: int = 0, mul: int = 0, sqrt: int = 0):
        self.add_sub += add
        self.mul_div += mul
        self.sqrt += sqrt

    def merged(self, other: "OpCounters") -> "OpCounters":
        return OpCounters(self.add_sub + other.add_sub,
                          self.mul_div + other.mul_div,
                          self.sqrt + other.sqrt)


def count_report(ops: OpCounters, n_samples: int) -> tuple[float, float, float]:
    """Per-sample averages (add_sub, mul_div, sqrt) over n_samples steps."""
    if n_samples <= 0:
        raise ValueError(f"n_samples must be positive, got {n_samples}")
    return (ops.add_sub / n_samples, ops.mul_div / n_samples, ops.sqrt / n_samples)


def model_counters(mode: str, n_samples: int) -> OpCounters:
    """Counters predicted by the per-sample cost model for n_samples steps."""
    a, m, s = COST_PER_SAMPLE[mode]
    return OpCounters(a * n_samples, m * n_samples, s * n_samples)


class _Ring:
    """Fixed-length delay line; push returns the evicted oldest element."""

    def __init__(self, values: np.ndarray):
        self.buf = np.array(values)
        self.size = self.buf.size
        self.head = 0  # position of the oldest element

    def push(self, value):
        old = self.buf[self.head]
        self.buf[self.head] = value
        self.head = (self.head + 1) % self.size
        return old

    def peek(self, offset: int):
        """Element `offset` places after the oldest (offset 0 = oldest)."""
        return self.buf[(self.head + offset) % self.size]


@dataclass
class StepResult:
    """One emitted window: start index (stream coordinates) and metrics."""

    window_start: int
    g: complex
    m: float
    metric: float
    q: complex | None = None
    g_nirs: complex | None = None


class SlidingCorrelator:
    """Streaming correlator: push samples in, get one window result per push.

    The first N pushes warm the state by direct summation (emitting the window
    at stream index 0, uncounted); every later push advances one window using
    the O(1) recursions and ticks the operation counters.  mode "sc" maintains
    only G and M; mode "nirs" adds the quarter-lag probe and the cancellation
    step.  State is a handful of scalars and three short delay lines, so an
    idle instance is cheap to hold or hand off.
    """

    def __init__(self, n_fft: int, mode: str = "nirs"):
        if n_fft < 8 or n_fft % 4 != 0:
            raise ValueError(f"n_fft must be a multiple of 4 and >= 8, got {n_fft}")
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
        self.n_fft = n_fft
        self.half = n_fft // 2
        self.quarter = n_fft // 4
        self.mode = mode
        self.ops = OpCounters()
        self.counted_steps = 0
        self._warmup: list[complex] = []
        self._n_pushed = 0
        # Live after warm-up:
        self._samples: _Ring | None = None  # last half+1 raw samples
        self._dl_g: _Ring | None = None     # half-lag products over [n, n+half)
        self._dl_e: _Ring | None = None     # energies over [n+half, n+N)
        self._dl_q: _Ring | None = None     # quarter-lag products over [n, n+3N/4)
        self._g = 0.0 + 0.0j
        self._m = 0.0
        self._q = 0.0 + 0.0j

    def push(self, sample: complex) -> StepResult | None:
        """Feed one sample; returns a StepResult once N samples are buffered."""
        self._n_pushed += 1
        if self._samples is None:
            self._warmup.append(complex(sample))
            if len(self._warmup) < self.n_fft:
                return None
            return self._init_from_warmup()
        return self._step(complex(sample))

    def _init_from_warmup(self) -> StepResult:
        x = np.asarray(self._warmup, dtype=np.complex128)
        self._warmup = []
        half, quarter = self.half, self.quarter
        gp = np.conj(x[:half]) * x[half:]
        self._g = complex(gp.sum())
        self._dl_g = _Ring(gp)
        en = np.abs(x[half:]) ** 2
        self._m = float(en.sum())
        self._dl_e = _Ring(en)
        if self.mode == "nirs":
            qp = np.conj(x[: 3 * quarter]) * x[quarter:]
            self._q = complex(qp[:quarter].sum() + 2.0 * qp[quarter : 2 * quarter].sum()
                              + qp[2 * quarter :].sum()) * 0.5
            self._dl_q = _Ring(qp)
        self._samples = _Ring(x[half - 1 :])  # last half+1 samples
        return self._emit(0, count=False)

    def _step(self, s_t: complex) -> StepResult:
        ops = self.ops
        self._samples.push(s_t)
        # Ring now spans [t - half, t]; oldest element is r(t - half).
        s_lag_half = self._samples.peek(0)
        s_lag_quarter = self._samples.peek(self.quarter)

        new_gp = np.conj(s_lag_half) * s_t
        ops.tally(add=2, mul=4)
        old_gp = self._dl_g.push(new_gp)
        self._g = self._g - old_gp + new_gp
        ops.tally(add=4)

        new_e = s_t.real * s_t.real + s_t.imag * s_t.imag
        ops.tally(add=1, mul=2)
        old_e = self._dl_e.push(new_e)
        self._m = self._m - old_e + new_e
        ops.tally(add=2)

        if self.mode == "nirs":
            new_qp = np.conj(s_lag_quarter) * s_t
            ops.tally(add=2, mul=4)
            p1 = self._dl_q.peek(0)
            p2 = self._dl_q.peek(self.quarter)
            p3 = self._dl_q.peek(2 * self.quarter)
            self._dl_q.push(new_qp)
            self._q = self._q + 0.5 * ((new_qp - p1) + (p3 - p2))
            ops.tally(add=8, mul=2)

        self.counted_steps += 1
        return self._emit(self._n_pushed - self.n_fft, count=True)

    def _emit(self, window_start: int, count: bool) -> StepResult:
        ops = self.ops if count else OpCounters()
        g, m = self._g, self._m
        if self.mode == "nirs":
            q = self._q
            qsq = q * q
            ops.tally(add=1, mul=4)
            qmag = np.sqrt(q.real * q.real + q.imag * q.imag)
            ops.tally(add=1, mul=2, sqrt=1)
            ops.tally(mul=2)  # the two divisions in Q^2 / |Q|
            corr = qsq / qmag if qmag > 0 else 0.0
            num = g - corr
            ops.tally(add=2)
        else:
            q = None
            num = g
        numsq = num.real * num.real + num.imag * num.imag
        ops.tally(add=1, mul=2)
        msq = m * m
        ops.tally(mul=1)
        ops.tally(mul=1)  # the metric division
        metric = numsq / msq if m > 0 else 0.0
        return StepResult(window_start=window_start, g=complex(g), m=float(m),
                          metric=float(metric),
                          q=None if q is None else complex(q),
                          g_nirs=None if q is None else complex(num))


def trace_from_stream(r: TimeSignal, n_fft: int, mode: str = "nirs"
                      ) -> tuple[MetricTrace, OpCounters, int]:
    """Run the streaming engine over a whole buffer.

    Returns a MetricTrace shaped like metrics.compute_trace's output (the
    uncomputed branch left None for mode "sc"), the accumulated counters, and
    the number of counted steps.
    """
    corr = SlidingCorrelator(n_fft, mode=mode)
    results = [res for s in r.samples if (res := corr.push(s)) is not None]
    if not results:
        raise ValueError(f"buffer of {len(r)} samples is shorter than one window ({n_fft})")
    n = np.array([res.window_start for res in results]) - r.origin
    g = np.array([res.g for res in results])
    m = np.array([res.m for res in results])
    metric = np.array([res.metric for res in results])
    if mode == "sc":
        trace = MetricTrace(n=n, g=g, m=m, metric_sc=metric)
    else:
        q = np.array([res.q for res in results])
        g_nirs = np.array([res.g_nirs for res in results])
        sc = np.zeros_like(m)
        np.divide(np.abs(g) ** 2, m * m, out=sc, where=m > 0)
        trace = MetricTrace(n=n, g=g, m=m, metric_sc=sc, q=q,
                            g_nirs=g_nirs, metric_nirs=metric)
    return trace, corr.ops, corr.counted_steps
