"""Sliding correlation metrics for preamble timing and CFO recovery.

Two numerators share one energy normalizer M(n):

  G(n) = sum_{m=0}^{N/2-1} conj(r(n+m)) r(n+m+N/2)          half-lag correlation
  Q(n) = (1/2) sum_{m=0}^{N/4-1} [ conj(r(n+m)) r(n+m+N/4)
           + 2 conj(r(n+m+N/4)) r(n+m+N/2)
           + conj(r(n+m+N/2)) r(n+m+3N/4) ]                  quarter-lag probe
  M(n) = sum_{m=0}^{N/2-1} |r(n+m+N/2)|^2

A tone at any frequency contributes equal magnitude to G and Q with exactly
twice the phase progression, so G - Q^2/|Q| cancels it while the preamble
(whose quarter-lag products carry data-dependent signs) survives.  The plain
timing metric is |G/M|^2, the interference-hardened one |(G - Q^2/|Q|)/M|^2,
and the CFO estimate at the detected peak is arg(numerator)/pi subcarrier
spacings.

This module computes whole traces at once with cumulative sums; streaming.py
holds the sample-at-a-time engine with the same arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ofdm import TimeSignal


@dataclass
class MetricTrace:
    """Per-window metric records over every full window position in a buffer.

    Entry i corresponds to window start n[i] (frame-relative):
    g, m and metric_sc always present; q, g_nirs, metric_nirs are None when
    the trace was computed for the plain correlator only.
    """

    n: np.ndarray
    g: np.ndarray
    m: np.ndarray
    metric_sc: np.ndarray
    q: np.ndarray | None = None
    g_nirs: np.ndarray | None = None
    metric_nirs: np.ndarray | None = None

    def __len__(self) -> int:
        return self.n.size

    def numerator(self, mode: str) -> np.ndarray:
        if mode == "sc":
            return self.g
        if mode == "nirs":
            if self.g_nirs is None:
                raise ValueError("trace was computed without the NIRS branch")
            return self.g_nirs
        raise ValueError(f"unknown mode {mode!r}")

    def metric(self, mode: str) -> np.ndarray:
        if mode == "sc":
            return self.metric_sc
        if mode == "nirs":
            if self.metric_nirs is None:
                raise ValueError("trace was computed without the NIRS branch")
            return self.metric_nirs
        raise ValueError(f"unknown mode {mode!r}")


def nirs_numerator(g, q):
    """Tone-cancelling numerator G - Q^2 / |Q| (defined as G where Q = 0)."""
    g = np.asarray(g, dtype=np.complex128)
    q = np.asarray(q, dtype=np.complex128)
    mag = np.abs(q)
    corr = np.zeros_like(q)
    np.divide(q * q, mag, out=corr, where=mag > 0)
    return g - corr


def _sliding_sum(values: np.ndarray, width: int) -> np.ndarray:
    """sums[u] = values[u] + ... + values[u + width - 1] via cumsum."""
    cs = np.cumsum(values)
    cs = np.concatenate((np.zeros(1, dtype=cs.dtype), cs))
    return cs[width:] - cs[:-width]


def _safe_ratio_sq(num: np.ndarray, m: np.ndarray) -> np.ndarray:
    out = np.zeros(num.shape, dtype=np.float64)
    np.divide(np.abs(num) ** 2, m * m, out=out, where=m > 0)
    return out


def compute_trace(r: TimeSignal, n_fft: int, with_nirs: bool = True) -> MetricTrace:
    """Evaluate G, M (and optionally Q, the NIRS numerator) at every window.

    Window start n is valid when [n, n + N - 1] lies inside the buffer, so a
    buffer of T samples yields T - N + 1 entries.  Windows where M(n) = 0 get
    metric 0 by convention.
    """
    s = r.samples
    half = n_fft // 2
    quarter = n_fft // 4
    n_windows = s.size - n_fft + 1
    if n_windows < 1:
        raise ValueError(f"buffer of {s.size} samples is shorter than one window ({n_fft})")

    half_products = np.conj(s[:-half]) * s[half:]
    g = _sliding_sum(half_products, half)[:n_windows]

    energy = (s.real * s.real + s.imag * s.imag).astype(np.float64)
    m = _sliding_sum(energy, half)[half : half + n_windows]

    metric_sc = _safe_ratio_sq(g, m)
    n_axis = np.arange(n_windows) - r.origin

    if not with_nirs:
        return MetricTrace(n=n_axis, g=g, m=m, metric_sc=metric_sc)

    quarter_products = np.conj(s[:-quarter]) * s[quarter:]
    s4 = _sliding_sum(quarter_products, quarter)
    q = 0.5 * (s4[:n_windows] + 2.0 * s4[quarter : quarter + n_windows]
               + s4[half : half + n_windows])
    g_nirs = nirs_numerator(g, q)
    metric_nirs = _safe_ratio_sq(g_nirs, m)
    return MetricTrace(n=n_axis, g=g, m=m, metric_sc=metric_sc,
                       q=q, g_nirs=g_nirs, metric_nirs=metric_nirs)
