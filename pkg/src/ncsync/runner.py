"""Monte-Carlo orchestration: trials, cells, and deterministic outputs.

Each (SNR, SIR) cell runs n_trials independent frame realizations; every
detector in the scenario sees the same realizations, so algorithm comparisons
are paired.  Per-trial randomness comes from
SeedSequence((master_seed, crc32(cell_key), trial_index)) with a fixed draw
order, which makes runs reproducible byte-for-byte, keeps trial streams
disjoint, and lets cells or trials be farmed out in any order without
changing results.
"""

from __future__ import annotations

import csv
import hashlib
import json
import zlib
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .detect import SyncResult, detect
from .evaluate import TrialOutcome, aggregate, ber_preamble, classify
from .impairments import (ChannelRealization, MixSpec, apply_cfo, apply_multipath,
                          calibrate_and_mix, draw_channel_cost207tu, gen_nbi)
from .metrics import MetricTrace, compute_trace
from .ofdm import SymbolGrid, build_frame, preamble_from_bits, random_data_symbol
from .scenario import Scenario
from .streaming import model_counters

FLOAT_FMT = "{:.10g}"


def trial_rng(master_seed: int, cell_key: str, trial: int) -> np.random.Generator:
    """Deterministic, stream-disjoint generator for one trial of one cell."""
    return np.random.default_rng(
        np.random.SeedSequence((master_seed, zlib.crc32(cell_key.encode()), trial)))


@dataclass
class TrialRecord:
    """Everything one trial produced, per algorithm."""

    true_cfo: float
    results: dict[str, SyncResult]
    outcomes: dict[str, TrialOutcome]
    trace: MetricTrace | None = None


def run_trial(sc: Scenario, snr_db: float, sir_db: float,
              rng: np.random.Generator, keep_trace: bool = False) -> TrialRecord:
    """One frame through the full impairment chain and every detector.

    Draw order (fixed for reproducibility): preamble bits, data symbols,
    channel, CFO, interferer offset and phases, noise.  Detectors consume no
    randomness, so the realization does not depend on which are enabled.
    """
    spec = sc.frame
    n_fft = spec.n_fft
    even_bins = spec.smap.even_occupied().size

    bits = rng.integers(0, 2, size=2 * even_bins)
    grid = SymbolGrid(spec)
    grid.data[0] = preamble_from_bits(spec, bits)
    for p in range(1, spec.n_symbols):
        grid.data[p] = random_data_symbol(spec, rng)
    frame = build_frame(grid)

    if sc.channel_model == "flat":
        ch = ChannelRealization(np.ones(1, dtype=np.complex128))
    else:
        ch = draw_channel_cost207tu(rng, spec.sample_rate_hz)
    y = apply_multipath(frame, ch)

    nu = rng.uniform(-sc.cfo_max_norm, sc.cfo_max_norm) if sc.cfo_max_norm else 0.0
    y_cfo = apply_cfo(y, nu, n_fft)

    offset = (rng.uniform(-sc.nbi_offset_max_hz, sc.nbi_offset_max_hz)
              if sc.nbi_offset_max_hz else 0.0)
    phase0 = rng.uniform(0.0, 2.0 * np.pi)
    nbi = gen_nbi(sc.nbi_spec(phase0=phase0, freq_offset_hz=offset),
                  len(y), y.origin, n_fft, rng)

    active = slice(spec.n_empty_prefix * spec.symbol_len, None)
    mix = calibrate_and_mix(y_cfo, nbi, MixSpec(snr_db, sir_db, nu), active, rng)

    trace = compute_trace(mix.received, n_fft, with_nirs="nirs" in sc.algorithms)
    counted = len(trace) - 1
    results: dict[str, SyncResult] = {}
    outcomes: dict[str, TrialOutcome] = {}
    for algo in sc.algorithms:
        res = detect(trace, mode=algo, timing_rule=sc.timing_rule,
                     ops=model_counters(algo, counted))
        errs, total = ber_preamble(mix.received, res, ch, bits, spec)
        results[algo] = res
        outcomes[algo] = classify(res, nu, spec.n_cp, errs, total)
    return TrialRecord(true_cfo=nu, results=results, outcomes=outcomes,
                       trace=trace if keep_trace else None)


def run_cell(sc: Scenario, snr_db: float, sir_db: float, n_trials: int,
             master_seed: int, cell_key: str) -> dict[str, list[TrialOutcome]]:
    out: dict[str, list[TrialOutcome]] = {algo: [] for algo in sc.algorithms}
    for t in range(n_trials):
        rec = run_trial(sc, snr_db, sir_db, trial_rng(master_seed, cell_key, t))
        for algo in sc.algorithms:
            out[algo].append(rec.outcomes[algo])
    return out


def run_scenario(sc: Scenario, out_dir: str | Path | None = None,
                 trials: int | None = None, seed: int | None = None) -> list[dict]:
    """Run the whole grid; returns result rows, optionally writing CSV+manifest."""
    n_trials = sc.n_trials if trials is None else trials
    master_seed = sc.master_seed if seed is None else seed
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    rows: list[dict] = []
    for snr_db in sc.snr_grid:
        for sir_db in sc.sir_grid:
            cell_key = f"snr={snr_db!r}|sir={sir_db!r}"
            per_algo = run_cell(sc, snr_db, sir_db, n_trials, master_seed, cell_key)
            for algo in sc.algorithms:
                stats = aggregate(per_algo[algo])
                rows.append({
                    "snr_db": snr_db,
                    "sir_db": sir_db,
                    "algorithm": algo,
                    "nbi_kind": sc.nbi_kind,
                    "p_sync_error": stats.p_sync_error,
                    "ci95_halfwidth": stats.ci_halfwidth,
                    "mse_time_samples2": stats.mse_time,
                    "mse_freq_sc2": stats.mse_freq,
                    "ber_preamble": stats.ber,
                    "n_trials": stats.n_trials,
                })
    if out_dir is not None:
        out_dir = Path(out_dir)
        write_csv(out_dir / "results.csv", rows)
        write_manifest(out_dir, sc, master_seed, n_trials, ["results.csv"])
    return rows


def run_nbi_bandwidth_sweep(sc: Scenario, bandwidths_hz=None, sir_list=None,
                            snr_db: float = 20.0, out_dir: str | Path | None = None,
                            trials: int | None = None, seed: int | None = None) -> list[dict]:
    """Sweep the FM interferer's occupied bandwidth at fixed SNR.

    The deviation follows from Carson's rule, delta_f = bandwidth/2 - f_m, so
    bandwidths at or below 2 f_m are rejected.  The scenario's own grid/kind
    are overridden: the interferer is single-tone FM at each bandwidth.
    """
    bandwidths = tuple(bandwidths_hz if bandwidths_hz is not None
                       else sc.sweep_bandwidths_hz)
    if not bandwidths:
        raise ValueError("no bandwidths given (flag or [sweep] bandwidths_hz)")
    sirs = tuple(sir_list if sir_list is not None else sc.sir_grid)
    n_trials = sc.n_trials if trials is None else trials
    master_seed = sc.master_seed if seed is None else seed
    f_m = sc.nbi_f_m_hz
    rows: list[dict] = []
    for bw in bandwidths:
        if bw <= 2.0 * f_m:
            raise ValueError(f"bandwidth {bw} Hz <= Carson floor 2*f_m = {2 * f_m} Hz")
        sweep_sc = replace(sc, nbi_kind="fm_carson", nbi_delta_f_hz=bw / 2.0 - f_m)
        for sir_db in sirs:
            cell_key = f"bw={bw!r}|snr={snr_db!r}|sir={sir_db!r}"
            per_algo = run_cell(sweep_sc, snr_db, sir_db, n_trials, master_seed, cell_key)
            for algo in sweep_sc.algorithms:
                stats = aggregate(per_algo[algo])
                rows.append({
                    "bandwidth_hz": bw,
                    "sir_db": sir_db,
                    "algorithm": algo,
                    "p_sync_error": stats.p_sync_error,
                    "ci95_halfwidth": stats.ci_halfwidth,
                    "n_trials": stats.n_trials,
                })
    if out_dir is not None:
        out_dir = Path(out_dir)
        write_csv(out_dir / "bandwidth_sweep.csv", rows)
        write_manifest(out_dir, sc, master_seed, n_trials, ["bandwidth_sweep.csv"])
    return rows


def emit_trace(sc: Scenario, snr_db: float, sir_db: float, trial: int = 0,
               percentiles: bool = False, n_frames: int = 200,
               out_dir: str | Path | None = None) -> tuple[list[dict], str]:
    """Metric-trace dump for one cell.

    Single-trial mode emits the full per-window record of one realization;
    percentile mode re-runs n_frames realizations and emits per-index
    10th/50th/90th percentiles of both timing metrics.  Returns (rows,
    filename).
    """
    cell_key = f"trace|snr={snr_db!r}|sir={sir_db!r}"
    rows: list[dict] = []
    if percentiles:
        sc_stack, nirs_stack = [], []
        n_axis = None
        for t in range(n_frames):
            rec = run_trial(sc, snr_db, sir_db,
                            trial_rng(sc.master_seed, cell_key, t), keep_trace=True)
            sc_stack.append(rec.trace.metric_sc)
            nirs_stack.append(rec.trace.metric_nirs)
            n_axis = rec.trace.n
        sc_q = np.percentile(np.vstack(sc_stack), [10, 50, 90], axis=0)
        nirs_q = np.percentile(np.vstack(nirs_stack), [10, 50, 90], axis=0)
        for i, n in enumerate(n_axis):
            rows.append({
                "n": int(n),
                "metric_sc_p10": sc_q[0, i], "metric_sc_p50": sc_q[1, i],
                "metric_sc_p90": sc_q[2, i],
                "metric_nirs_p10": nirs_q[0, i], "metric_nirs_p50": nirs_q[1, i],
                "metric_nirs_p90": nirs_q[2, i],
            })
        fname = "trace_percentiles.csv"
    else:
        rec = run_trial(sc, snr_db, sir_db,
                        trial_rng(sc.master_seed, cell_key, trial), keep_trace=True)
        tr = rec.trace
        for i, n in enumerate(tr.n):
            rows.append({
                "n": int(n),
                "g_re": tr.g[i].real, "g_im": tr.g[i].imag,
                "m": tr.m[i],
                "q_re": tr.q[i].real, "q_im": tr.q[i].imag,
                "g_nirs_re": tr.g_nirs[i].real, "g_nirs_im": tr.g_nirs[i].imag,
                "metric_sc": tr.metric_sc[i],
                "metric_nirs": tr.metric_nirs[i],
            })
        fname = "trace.csv"
    if out_dir is not None:
        out_dir = Path(out_dir)
        write_csv(out_dir / fname, rows)
        write_manifest(out_dir, sc, sc.master_seed,
                       n_frames if percentiles else 1, [fname])
    return rows, fname


def _fmt(value) -> str:
    if isinstance(value, float):
        return FLOAT_FMT.format(value)
    return str(value)


def write_csv(path: Path, rows: list[dict]):
    """Write rows with a fixed float format so identical runs give identical bytes."""
    if not rows:
        raise ValueError(f"refusing to write empty CSV {path}")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = list(rows[0].keys())
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(row[key]) for key in header])


def write_manifest(out_dir: Path, sc: Scenario, master_seed: int,
                   n_trials: int, outputs: list[str]):
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "scenario": sc.name,
        "config_sha256": hashlib.sha256(sc.source_text.encode()).hexdigest(),
        "master_seed": master_seed,
        "n_trials": n_trials,
        "version": __version__,
        "outputs": outputs,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
