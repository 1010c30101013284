"""Channel, frequency-offset, interference, and noise impairments.

The receive chain modeled here is

    r(n) = y(n) exp(j 2 pi nu n / N) + i(n) + w(n)

with y the multipath-filtered frame, nu the carrier frequency offset in
subcarrier spacings, i a unit-envelope narrowband interferer scaled to a target
SIR, and w complex white Gaussian noise scaled to a target SNR.  Power targets
are measured against the transmitted signal's power over its active region
(the non-silent frame portion including the channel tail), so requested and
measured SNR/SIR agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ofdm import TimeSignal

# COST 207 typical-urban 6-tap power-delay profile: (delay us, mean power dB).
COST207_TU_DELAYS_US = (0.0, 0.2, 0.5, 1.6, 2.3, 5.0)
COST207_TU_POWERS_DB = (-3.0, 0.0, -2.0, -6.0, -8.0, -10.0)

NBI_KINDS = ("ideal_tone", "fm_carson", "fm_wideband")


@dataclass(frozen=True)
class ChannelRealization:
    """Dense FIR channel taps h[0..L-1] (index = delay in samples)."""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.atleast_1d(np.asarray(self.taps, dtype=np.complex128))
        if taps.ndim != 1 or taps.size == 0:
            raise ValueError("taps must be a non-empty 1-D array")
        object.__setattr__(self, "taps", taps)

    @property
    def n_taps(self) -> int:
        return self.taps.size

    def freq_response(self, ks, n_fft: int) -> np.ndarray:
        """H(k) = sum_l h[l] exp(-j 2 pi k l / N) at centered bin indices ks."""
        ks = np.asarray(ks, dtype=np.float64)
        ell = np.arange(self.taps.size)
        return (self.taps[None, :] * np.exp(-2j * np.pi * np.outer(ks, ell) / n_fft)).sum(axis=1)


@dataclass(frozen=True)
class NbiSpec:
    """Narrowband interferer description (unit envelope, scaling applied later).

    f_c is the carrier position in subcarrier spacings; freq_offset_hz is an
    additional carrier shift (e.g. a random draw per frame).  The FM kinds
    modulate a single sinusoidal message of frequency f_m_hz with peak
    deviation delta_f_hz, giving a Carson-rule bandwidth 2 (delta_f + f_m);
    fm_wideband is the same construction pinned to bandwidth_hz.
    """

    kind: str
    f_c: float
    phase0: float = 0.0
    freq_offset_hz: float = 0.0
    f_m_hz: float = 1e3
    delta_f_hz: float = 5e3
    bandwidth_hz: float = 200e3
    sc_spacing_hz: float = 15e3

    def __post_init__(self):
        if self.kind not in NBI_KINDS:
            raise ValueError(f"unknown NBI kind {self.kind!r}; expected one of {NBI_KINDS}")
        if self.sc_spacing_hz <= 0:
            raise ValueError("sc_spacing_hz must be positive")
        if self.kind == "fm_carson":
            if self.f_m_hz <= 0 or self.delta_f_hz <= 0:
                raise ValueError("fm_carson requires positive f_m_hz and delta_f_hz")
        if self.kind == "fm_wideband":
            if self.f_m_hz <= 0:
                raise ValueError("fm_wideband requires positive f_m_hz")
            if self.bandwidth_hz <= 2 * self.f_m_hz:
                raise ValueError("fm_wideband requires bandwidth_hz > 2 * f_m_hz")

    @property
    def f_total(self) -> float:
        """Carrier position including the Hz offset, in subcarrier spacings."""
        return self.f_c + self.freq_offset_hz / self.sc_spacing_hz

    def carson_bandwidth_hz(self) -> float:
        if self.kind == "ideal_tone":
            return 0.0
        if self.kind == "fm_wideband":
            return self.bandwidth_hz
        return 2.0 * (self.delta_f_hz + self.f_m_hz)


@dataclass(frozen=True)
class MixSpec:
    """Per-trial mixing levels: SNR/SIR in dB (np.inf disables a term)."""

    snr_db: float
    sir_db: float
    cfo_norm: float = 0.0
    seed: int = 0


@dataclass
class MixResult:
    """calibrate_and_mix output: the sum plus its calibrated ingredients."""

    received: TimeSignal
    signal_part: np.ndarray
    nbi_part: np.ndarray
    noise_part: np.ndarray
    signal_power: float
    sigma_i2: float
    sigma_w2: float


def apply_multipath(x: TimeSignal, ch: ChannelRealization) -> TimeSignal:
    """Convolve with the channel; output keeps the input's origin.

    Full convolution, so the buffer grows by n_taps - 1 tail samples.
    """
    out = np.convolve(x.samples, ch.taps)
    return TimeSignal(out, origin=x.origin)


def apply_cfo(x: TimeSignal, nu: float, n_fft: int) -> TimeSignal:
    """Multiply by exp(j 2 pi nu n / N) with n the frame-relative index."""
    n = x.n_axis()
    return TimeSignal(x.samples * np.exp(2j * np.pi * nu * n / n_fft), origin=x.origin)


def draw_channel_cost207tu(rng: np.random.Generator, sample_rate_hz: float) -> ChannelRealization:
    """Random quasi-static COST 207 typical-urban channel at a sample rate.

    Tap delays are rounded to the nearest sample; taps are independent
    zero-mean complex Gaussians with the profile's mean powers, normalized so
    the total mean power is 1.  Delays that collide after rounding add power
    in the same tap.
    """
    if sample_rate_hz <= 0:
        raise ValueError("sample_rate_hz must be positive")
    delays = np.rint(np.asarray(COST207_TU_DELAYS_US) * 1e-6 * sample_rate_hz).astype(int)
    powers = 10.0 ** (np.asarray(COST207_TU_POWERS_DB) / 10.0)
    powers /= powers.sum()
    taps = np.zeros(int(delays.max()) + 1, dtype=np.complex128)
    sigma = np.sqrt(powers / 2.0)
    g = rng.standard_normal(2 * powers.size)
    for i, d in enumerate(delays):
        taps[d] += sigma[i] * (g[2 * i] + 1j * g[2 * i + 1])
    return ChannelRealization(taps)


def gen_nbi(spec: NbiSpec, length: int, origin: int, n_fft: int,
            rng: np.random.Generator | None = None) -> TimeSignal:
    """Generate a unit-envelope interferer over a buffer of given geometry.

    The phase accumulates against the frame-relative index n = u - origin so
    the interferer's phase at n = 0 is spec.phase0 (plus any FM message term).
    The FM kinds draw one random message phase from rng.
    """
    if length <= 0:
        raise ValueError("length must be positive")
    n = np.arange(length, dtype=np.float64) - origin
    phase = 2.0 * np.pi * spec.f_total * n / n_fft + spec.phase0
    if spec.kind != "ideal_tone":
        if spec.kind == "fm_wideband":
            delta_f = spec.bandwidth_hz / 2.0 - spec.f_m_hz
        else:
            delta_f = spec.delta_f_hz
        beta = delta_f / spec.f_m_hz
        theta = 0.0 if rng is None else rng.uniform(0.0, 2.0 * np.pi)
        fs = n_fft * spec.sc_spacing_hz
        phase = phase + beta * np.sin(2.0 * np.pi * spec.f_m_hz * n / fs + theta)
    return TimeSignal(np.exp(1j * phase), origin=origin)


def mean_power(x: np.ndarray) -> float:
    x = np.asarray(x)
    if x.size == 0:
        raise ValueError("cannot take mean power of an empty array")
    return float(np.mean(np.abs(x) ** 2))


def calibrate_and_mix(y: TimeSignal, nbi: TimeSignal, mix: MixSpec,
                      active: slice, rng: np.random.Generator | None = None) -> MixResult:
    """Scale interference and noise to the requested SIR/SNR and sum.

    `active` is a buffer-index slice over which the signal power reference is
    measured (the non-silent portion of y, channel tail included).  The noise
    vector is renormalized over that same slice so that the realized SNR
    matches the request exactly rather than only in expectation.  np.inf for
    snr_db or sir_db zeroes the corresponding term.
    """
    if len(nbi) != len(y) or nbi.origin != y.origin:
        raise ValueError("nbi buffer must match y in length and origin")
    sig = y.samples
    p_sig = mean_power(sig[active])
    if p_sig <= 0:
        raise ValueError("signal power over the active region is zero")
    if rng is None:
        rng = np.random.default_rng(mix.seed)

    if np.isinf(mix.sir_db):
        sigma_i2 = 0.0
        nbi_part = np.zeros_like(sig)
    else:
        sigma_i2 = p_sig * 10.0 ** (-mix.sir_db / 10.0)
        nbi_part = np.sqrt(sigma_i2) * nbi.samples

    if np.isinf(mix.snr_db):
        sigma_w2 = 0.0
        noise_part = np.zeros_like(sig)
    else:
        sigma_w2 = p_sig * 10.0 ** (-mix.snr_db / 10.0)
        raw = rng.standard_normal(2 * sig.size).view(np.complex128)
        # Scale against the realized power over the active region, not the
        # ensemble expectation, so the requested SNR is hit exactly.
        noise_part = raw * np.sqrt(sigma_w2 / mean_power(raw[active]))

    received = TimeSignal(sig + nbi_part + noise_part, origin=y.origin)
    return MixResult(received, sig, nbi_part, noise_part, p_sig, sigma_i2, sigma_w2)
