"""Scenario files: INI-format experiment descriptions and shipped presets.

A scenario pins everything a Monte-Carlo run needs: frame geometry and
occupied-subcarrier set, channel model, CFO and interferer randomization,
the SNR x SIR grid, which detectors run, and the trial budget with its master
seed.  Presets under ncsync/presets/ cover the shipped experiments; `load`
accepts either a path or a preset name.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .detect import TIMING_RULES
from .impairments import NBI_KINDS, NbiSpec
from .ofdm import FrameSpec, SubcarrierMap

CHANNEL_MODELS = ("cost207tu", "flat")
ALGORITHMS = ("sc", "nirs")


class ScenarioError(ValueError):
    """Scenario file cannot be parsed or fails validation."""


@dataclass
class Scenario:
    """Validated experiment description (see presets/*.ini for the format)."""

    name: str
    frame: FrameSpec
    channel_model: str
    cfo_max_hz: float
    nbi_kind: str
    nbi_f_c: float
    nbi_offset_max_hz: float
    nbi_f_m_hz: float
    nbi_delta_f_hz: float
    nbi_bandwidth_hz: float
    snr_grid: tuple[float, ...]
    sir_grid: tuple[float, ...]
    algorithms: tuple[str, ...]
    timing_rule: str
    n_trials: int
    master_seed: int
    sweep_bandwidths_hz: tuple[float, ...] = field(default_factory=tuple)
    source_text: str = ""

    def __post_init__(self):
        if self.channel_model not in CHANNEL_MODELS:
            raise ScenarioError(f"[channel] model must be one of {CHANNEL_MODELS}, "
                                f"got {self.channel_model!r}")
        if self.nbi_kind not in NBI_KINDS:
            raise ScenarioError(f"[nbi] kind must be one of {NBI_KINDS}, got {self.nbi_kind!r}")
        if self.timing_rule not in TIMING_RULES:
            raise ScenarioError(f"[sync] timing_rule must be one of {TIMING_RULES}, "
                                f"got {self.timing_rule!r}")
        if not self.algorithms or any(a not in ALGORITHMS for a in self.algorithms):
            raise ScenarioError(f"[sync] algorithms must be a non-empty subset of {ALGORITHMS}")
        if not self.snr_grid or not self.sir_grid:
            raise ScenarioError("[grid] snr_db and sir_db must be non-empty")
        if self.n_trials < 1:
            raise ScenarioError("[run] n_trials must be >= 1")
        if self.cfo_max_hz < 0 or self.nbi_offset_max_hz < 0:
            raise ScenarioError("cfo/nbi offset bounds must be >= 0")

    @property
    def cfo_max_norm(self) -> float:
        """CFO bound in subcarrier spacings."""
        return self.cfo_max_hz / self.frame.sc_spacing_hz

    def nbi_spec(self, phase0: float = 0.0, freq_offset_hz: float = 0.0) -> NbiSpec:
        """Instantiate the interferer description with per-trial draws."""
        return NbiSpec(kind=self.nbi_kind, f_c=self.nbi_f_c, phase0=phase0,
                       freq_offset_hz=freq_offset_hz, f_m_hz=self.nbi_f_m_hz,
                       delta_f_hz=self.nbi_delta_f_hz,
                       bandwidth_hz=self.nbi_bandwidth_hz,
                       sc_spacing_hz=self.frame.sc_spacing_hz)


def parse_subcarrier_ranges(text: str) -> tuple[int, ...]:
    """Parse "a..b, c, d..e" into a sorted tuple of integers."""
    out: list[int] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if ".." in token:
            lo_s, hi_s = token.split("..", 1)
            lo, hi = int(lo_s), int(hi_s)
            if hi < lo:
                raise ScenarioError(f"bad subcarrier range {token!r} (end before start)")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(token))
    if not out:
        raise ScenarioError("empty subcarrier list")
    return tuple(sorted(out))


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def parse_scenario(text: str, name_hint: str = "scenario") -> Scenario:
    """Parse and validate scenario INI text; errors name the section/field."""
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"cannot parse scenario file: {exc}") from exc

    def need(section: str, option: str) -> str:
        try:
            return cp.get(section, option)
        except (configparser.NoSectionError, configparser.NoOptionError) as exc:
            raise ScenarioError(f"missing [{section}] {option}") from exc

    def opt(section: str, option: str, default: str) -> str:
        return cp.get(section, option, fallback=default)

    try:
        smap = SubcarrierMap(n_fft=int(need("frame", "n_fft")),
                             occupied=parse_subcarrier_ranges(need("frame", "occupied")))
        frame = FrameSpec(smap=smap,
                          n_cp=int(need("frame", "n_cp")),
                          n_symbols=int(need("frame", "n_symbols")),
                          n_empty_prefix=int(opt("frame", "n_empty_prefix", "0")),
                          sc_spacing_hz=float(opt("frame", "sc_spacing_hz", "15000")))
        return Scenario(
            name=opt("scenario", "name", name_hint),
            frame=frame,
            channel_model=opt("channel", "model", "cost207tu"),
            cfo_max_hz=float(opt("cfo", "max_hz", "0")),
            nbi_kind=need("nbi", "kind"),
            nbi_f_c=float(need("nbi", "f_c")),
            nbi_offset_max_hz=float(opt("nbi", "freq_offset_max_hz", "0")),
            nbi_f_m_hz=float(opt("nbi", "f_m_hz", "1000")),
            nbi_delta_f_hz=float(opt("nbi", "delta_f_hz", "5000")),
            nbi_bandwidth_hz=float(opt("nbi", "bandwidth_hz", "200000")),
            snr_grid=_float_list(need("grid", "snr_db")),
            sir_grid=_float_list(need("grid", "sir_db")),
            algorithms=_str_list(opt("sync", "algorithms", "sc, nirs")),
            timing_rule=opt("sync", "timing_rule", "argmax"),
            n_trials=int(need("run", "n_trials")),
            master_seed=int(need("run", "master_seed")),
            sweep_bandwidths_hz=_float_list(opt("sweep", "bandwidths_hz", "")),
            source_text=text,
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"bad scenario value: {exc}") from exc


def preset_names() -> list[str]:
    files = resources.files(__package__).joinpath("presets")
    return sorted(p.name[:-4] for p in files.iterdir() if p.name.endswith(".ini"))


def load(source: str | Path) -> Scenario:
    """Load a scenario from a file path or a shipped preset name."""
    path = Path(source)
    if path.is_file():
        return parse_scenario(path.read_text(), name_hint=path.stem)
    name = str(source).removesuffix(".ini")
    candidate = resources.files(__package__).joinpath("presets").joinpath(f"{name}.ini")
    if candidate.is_file():
        return parse_scenario(candidate.read_text(), name_hint=name)
    raise ScenarioError(
        f"no scenario file at {source!r} and no preset of that name "
        f"(available: {', '.join(preset_names())})"
    )
