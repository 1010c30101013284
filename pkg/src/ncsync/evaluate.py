"""Trial scoring: sync-error classification, preamble BER, aggregation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .detect import SyncResult
from .impairments import ChannelRealization
from .ofdm import FrameSpec, TimeSignal, demap_qpsk


@dataclass
class TrialOutcome:
    """Per-trial scores; bit counts are zero when BER was not evaluated."""

    timing_error: int
    cfo_error: float
    is_sync_error: bool
    bit_errors: int = 0
    bits_total: int = 0


@dataclass
class AggregateStats:
    """Cell-level summary over a batch of trials."""

    n_trials: int
    p_sync_error: float
    ci_halfwidth: float
    mse_time: float
    mse_freq: float
    ber: float


def classify(result: SyncResult, true_cfo: float, n_cp: int,
             bit_errors: int = 0, bits_total: int = 0) -> TrialOutcome:
    """Score one detection against the known truth (frame origin is n = 0).

    A trial is a sync error when the timing lands outside the cyclic prefix
    (|n_hat| > n_cp) or the CFO misses by more than half a subcarrier spacing
    (|nu_hat - nu| > 0.5); both comparisons are strict, so the boundary values
    still count as successes.
    """
    timing_error = result.n_hat
    cfo_error = result.nu_hat - true_cfo
    is_err = abs(timing_error) > n_cp or abs(cfo_error) > 0.5
    return TrialOutcome(timing_error=timing_error, cfo_error=cfo_error,
                        is_sync_error=is_err, bit_errors=bit_errors,
                        bits_total=bits_total)


def ber_preamble(r: TimeSignal, sync: SyncResult, ch: ChannelRealization,
                 preamble_bits: np.ndarray, spec: FrameSpec) -> tuple[int, int]:
    """Demodulate the preamble at the detected position and count bit errors.

    The receiver-side chain: de-rotate the estimated CFO, take the unitary DFT
    of the N samples starting at n_hat, then zero-force each preamble bin by
    the known channel response and the timing-offset phase ramp
    exp(j 2 pi k n_hat / N) before hard QPSK decisions.  Bins where the
    channel response is exactly zero cannot be equalized; they are skipped
    (with a warning) and excluded from the bit total.
    """
    n_fft = spec.n_fft
    even = spec.smap.even_occupied()
    preamble_bits = np.asarray(preamble_bits, dtype=np.int64)
    if preamble_bits.size != 2 * even.size:
        raise ValueError(
            f"expected {2 * even.size} preamble bits for {even.size} bins, "
            f"got {preamble_bits.size}"
        )
    window = r.window(sync.n_hat, n_fft)
    n_idx = sync.n_hat + np.arange(n_fft)
    derotated = window * np.exp(-2j * np.pi * sync.nu_hat * n_idx / n_fft)
    spectrum = np.fft.fftshift(np.fft.fft(derotated)) / np.sqrt(n_fft)

    h = ch.freq_response(even, n_fft)
    usable = np.abs(h) > 0
    n_skipped = int(np.count_nonzero(~usable))
    if n_skipped:
        warnings.warn(f"skipping {n_skipped} preamble bin(s) with zero channel response",
                      RuntimeWarning, stacklevel=2)
    ramp = np.exp(2j * np.pi * even * sync.n_hat / n_fft)
    d_hat = np.zeros(even.size, dtype=np.complex128)
    d_hat[usable] = spectrum[spec.smap.columns(even)][usable] / (h[usable] * ramp[usable])

    decided = demap_qpsk(d_hat).reshape(-1, 2)
    truth = preamble_bits.reshape(-1, 2)
    errors = int(np.sum(decided[usable] != truth[usable]))
    return errors, int(2 * np.count_nonzero(usable))


def aggregate(outcomes: list[TrialOutcome]) -> AggregateStats:
    """Summarize a batch: error rate with a 95% Wald interval, MSEs, BER.

    MSEs include every trial (erroneous ones dominate them by design); BER
    averages over all demodulated bits.  Raises on an empty batch.
    """
    if not outcomes:
        raise ValueError("cannot aggregate an empty list of outcomes")
    n = len(outcomes)
    errs = sum(1 for o in outcomes if o.is_sync_error)
    p = errs / n
    ci = 1.96 * np.sqrt(p * (1.0 - p) / n)
    mse_time = float(np.mean([o.timing_error ** 2 for o in outcomes]))
    mse_freq = float(np.mean([o.cfo_error ** 2 for o in outcomes]))
    bits = sum(o.bits_total for o in outcomes)
    ber = (sum(o.bit_errors for o in outcomes) / bits) if bits else 0.0
    return AggregateStats(n_trials=n, p_sync_error=p, ci_halfwidth=float(ci),
                          mse_time=mse_time, mse_freq=mse_freq, ber=float(ber))
