"""NC-OFDM baseband signal construction.

Everything downstream works on a single complex baseband stream laid out the
same way: a frame is a run of CP-extended OFDM symbols, and sample index n = 0
is pinned to the first post-CP sample of the leading preamble symbol.  The
preamble puts energy only on even-indexed occupied subcarriers, which makes its
time-domain body exactly two identical halves; that half-repetition is the hook
every correlator in this package relies on.

Subcarrier indices k run over [-N/2, N/2 - 1] (centered), and dense per-symbol
vectors are stored in that centered order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


class UnsatisfiablePreambleError(ValueError):
    """Raised when the occupied set contains no even subcarrier index."""


@dataclass(frozen=True)
class SubcarrierMap:
    """Occupied-subcarrier set for an NC-OFDM system.

    occupied holds centered indices k in [-n_fft/2, n_fft/2 - 1], sorted and
    unique.  Unoccupied bins (spectrum notches, DC, guards) simply never appear
    in the set.
    """

    n_fft: int
    occupied: tuple[int, ...]

    def __post_init__(self):
        if self.n_fft < 8 or self.n_fft % 4 != 0:
            raise ValueError(f"n_fft must be a multiple of 4 and >= 8, got {self.n_fft}")
        occ = tuple(int(k) for k in self.occupied)
        if len(occ) == 0:
            raise ValueError("occupied set must be non-empty")
        if len(set(occ)) != len(occ):
            raise ValueError("occupied set contains duplicates")
        if occ != tuple(sorted(occ)):
            occ = tuple(sorted(occ))
        lo, hi = -self.n_fft // 2, self.n_fft // 2 - 1
        for k in occ:
            if k < lo or k > hi:
                raise ValueError(f"subcarrier index {k} outside [{lo}, {hi}]")
        object.__setattr__(self, "occupied", occ)

    @property
    def n_occupied(self) -> int:
        return len(self.occupied)

    def occupied_array(self) -> np.ndarray:
        return np.asarray(self.occupied, dtype=np.int64)

    def even_occupied(self) -> np.ndarray:
        """Occupied indices with even k (the preamble's carriers)."""
        occ = self.occupied_array()
        return occ[occ % 2 == 0]

    def columns(self, ks) -> np.ndarray:
        """Map centered indices k to columns of a dense centered vector."""
        return np.asarray(ks, dtype=np.int64) + self.n_fft // 2


@dataclass(frozen=True)
class FrameSpec:
    """Frame geometry: FFT size, CP length, symbol count, leading silence."""

    smap: SubcarrierMap
    n_cp: int
    n_symbols: int
    n_empty_prefix: int = 0
    sc_spacing_hz: float = 15e3

    def __post_init__(self):
        if self.n_cp < 0 or self.n_cp > self.smap.n_fft:
            raise ValueError(f"n_cp must be in [0, n_fft], got {self.n_cp}")
        if self.n_symbols < 1:
            raise ValueError("n_symbols must be >= 1")
        if self.n_empty_prefix < 0:
            raise ValueError("n_empty_prefix must be >= 0")
        if self.sc_spacing_hz <= 0:
            raise ValueError("sc_spacing_hz must be positive")

    @property
    def n_fft(self) -> int:
        return self.smap.n_fft

    @property
    def symbol_len(self) -> int:
        return self.smap.n_fft + self.n_cp

    @property
    def frame_len(self) -> int:
        """Samples in the non-empty frame portion (all P symbols with CPs)."""
        return self.n_symbols * self.symbol_len

    @property
    def total_len(self) -> int:
        return (self.n_empty_prefix + self.n_symbols) * self.symbol_len

    @property
    def sample_rate_hz(self) -> float:
        return self.smap.n_fft * self.sc_spacing_hz


@dataclass
class TimeSignal:
    """Complex baseband samples plus the buffer position of frame index n = 0.

    samples[origin] is the first post-CP sample of the preamble symbol, so the
    frame-relative index of samples[u] is n = u - origin.  Negative n reaches
    into the preamble CP and any leading silence.
    """

    samples: np.ndarray
    origin: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        self.origin = int(self.origin)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def n_first(self) -> int:
        """Frame-relative index of samples[0]."""
        return -self.origin

    @property
    def n_last(self) -> int:
        return self.samples.size - 1 - self.origin

    def n_axis(self) -> np.ndarray:
        return np.arange(self.samples.size) - self.origin

    def window(self, n: int, length: int) -> np.ndarray:
        """View of `length` samples starting at frame-relative index n."""
        u = self.origin + int(n)
        if u < 0 or u + length > self.samples.size:
            raise ValueError(
                f"window [{n}, {n + length}) outside signal "
                f"[{self.n_first}, {self.n_last + 1})"
            )
        return self.samples[u : u + length]


@dataclass
class SymbolGrid:
    """Dense frequency-domain frame content, shape (n_symbols, n_fft).

    Row p is symbol p's centered vector (column j holds subcarrier
    k = j - n_fft/2).  Bins outside the occupied set must stay zero.
    """

    spec: FrameSpec
    data: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        shape = (self.spec.n_symbols, self.spec.n_fft)
        if self.data is None:
            self.data = np.zeros(shape, dtype=np.complex128)
        else:
            self.data = np.asarray(self.data, dtype=np.complex128)
            if self.data.shape != shape:
                raise ValueError(f"grid shape {self.data.shape} != {shape}")

    def set_symbol(self, p: int, values: np.ndarray, ks=None):
        """Fill symbol p, either a full centered vector or values at indices ks."""
        if ks is None:
            values = np.asarray(values, dtype=np.complex128)
            if values.shape != (self.spec.n_fft,):
                raise ValueError("full symbol vector must have length n_fft")
            self.data[p, :] = values
        else:
            self.data[p, :] = 0.0
            self.data[p, self.spec.smap.columns(ks)] = values
        self._check_support(p)

    def _check_support(self, p: int):
        mask = np.zeros(self.spec.n_fft, dtype=bool)
        mask[self.spec.smap.columns(self.spec.smap.occupied_array())] = True
        if np.any(self.data[p, ~mask] != 0):
            raise ValueError(f"symbol {p} has energy outside the occupied set")


def map_qpsk(bits) -> np.ndarray:
    """Gray-map bit pairs to unit-energy QPSK symbols.

    Pair (b0, b1) selects the quadrant: b0 flips the real sign, b1 the
    imaginary sign, so (0, 0) -> (1 + 1j)/sqrt(2).
    """
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if bits.size % 2 != 0:
        raise ValueError(f"bit count must be even, got {bits.size}")
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    b = bits.reshape(-1, 2)
    return ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1])) * _INV_SQRT2


def demap_qpsk(symbols) -> np.ndarray:
    """Hard-decision inverse of map_qpsk (sign of each axis)."""
    s = np.asarray(symbols, dtype=np.complex128).ravel()
    out = np.empty((s.size, 2), dtype=np.int64)
    out[:, 0] = (s.real < 0).astype(np.int64)
    out[:, 1] = (s.imag < 0).astype(np.int64)
    return out.ravel()


def modulate_symbol(column: np.ndarray, spec: FrameSpec) -> TimeSignal:
    """Unitary-IDFT one centered subcarrier vector and prepend its CP.

    Sample n of the body is (1/sqrt(N)) sum_k d_k exp(j 2 pi n k / N); the CP
    copies the last n_cp body samples in front, so the returned origin is n_cp.
    """
    column = np.asarray(column, dtype=np.complex128)
    n = spec.n_fft
    if column.shape != (n,):
        raise ValueError(f"column must have length {n}, got {column.shape}")
    body = np.fft.ifft(np.fft.ifftshift(column)) * np.sqrt(n)
    if spec.n_cp:
        samples = np.concatenate([body[-spec.n_cp :], body])
    else:
        samples = body
    return TimeSignal(samples, origin=spec.n_cp)


def preamble_from_bits(spec: FrameSpec, bits) -> np.ndarray:
    """Build a preamble symbol from explicit bits: QPSK on even occupied bins.

    Only even k are modulated so the time-domain body repeats exactly after
    N/2 samples.  Each used bin gets amplitude sqrt(n_occupied / n_even) so the
    symbol carries the same total power as a fully loaded data symbol.

    Returns the dense centered vector; raises UnsatisfiablePreambleError when
    the map has no even occupied index.
    """
    even = spec.smap.even_occupied()
    if even.size == 0:
        raise UnsatisfiablePreambleError(
            "occupied set has no even subcarrier; no half-repeating preamble exists"
        )
    bits = np.asarray(bits, dtype=np.int64)
    if bits.size != 2 * even.size:
        raise ValueError(f"expected {2 * even.size} bits for {even.size} preamble bins")
    amp = np.sqrt(spec.smap.n_occupied / even.size)
    column = np.zeros(spec.n_fft, dtype=np.complex128)
    column[spec.smap.columns(even)] = amp * map_qpsk(bits)
    return column


def generate_preamble(spec: FrameSpec, rng: np.random.Generator) -> np.ndarray:
    """Draw a random preamble symbol (see preamble_from_bits)."""
    even = spec.smap.even_occupied()
    if even.size == 0:
        raise UnsatisfiablePreambleError(
            "occupied set has no even subcarrier; no half-repeating preamble exists"
        )
    return preamble_from_bits(spec, rng.integers(0, 2, size=2 * even.size))


def random_data_symbol(spec: FrameSpec, rng: np.random.Generator) -> np.ndarray:
    """Dense centered vector with i.i.d. QPSK on every occupied bin."""
    occ = spec.smap.occupied_array()
    bits = rng.integers(0, 2, size=2 * occ.size)
    column = np.zeros(spec.n_fft, dtype=np.complex128)
    column[spec.smap.columns(occ)] = map_qpsk(bits)
    return column


def build_frame(grid: SymbolGrid, spec: FrameSpec | None = None) -> TimeSignal:
    """Serialize a symbol grid into one baseband buffer.

    Layout: n_empty_prefix silent symbol slots, then the preamble symbol
    (grid row 0), then the remaining rows.  origin lands on the first post-CP
    preamble sample.
    """
    spec = grid.spec if spec is None else spec
    chunks = [np.zeros(spec.n_empty_prefix * spec.symbol_len, dtype=np.complex128)]
    for p in range(spec.n_symbols):
        chunks.append(modulate_symbol(grid.data[p], spec).samples)
    samples = np.concatenate(chunks)
    origin = spec.n_empty_prefix * spec.symbol_len + spec.n_cp
    return TimeSignal(samples, origin=origin)
