"""Monte Carlo of the repump/probe PLE sequence.

Each detuning point owns a numpy stream spawned from (seed, point index), so
points can run in any order or on any worker. Within a point the dwell of every
scan is simulated repetition by repetition as arrays of shape
(n_scans, repetitions): a successful repump makes the emitter bright and moves
its line, an ionisation at a random moment of the probe window darkens it until
the next successful repump.
"""

import time
from typing import Optional

import numpy as np
from joblib import Parallel, delayed
from scipy.signal import lfilter

from ple.model import EmitterModel, PleScan, PleScanConfig
from runtime.config import logger, BACKEND
from runtime.errors import ConfigurationError


def power_broadened_width(homogeneous_fwhm: float, saturation: float) -> float:
    """Gamma_h sqrt(1 + s)."""
    if saturation < 0:
        raise ConfigurationError(f"saturation must be >= 0, got {saturation}")
    return float(homogeneous_fwhm * np.sqrt(1.0 + saturation))


def lineshape(detuning: np.ndarray, homogeneous_fwhm: float, saturation: float) -> np.ndarray:
    """Saturated two-level response, 1 on resonance: (1+s) / (1 + s + (2 delta / Gamma_h)^2)."""
    x = 2.0 * np.asarray(detuning, dtype=float) / homogeneous_fwhm
    return (1.0 + saturation) / (1.0 + saturation + x * x)


def _jump_draws(emitter: EmitterModel, rng: np.random.Generator, shape) -> np.ndarray:
    innovations = rng.standard_normal(shape)
    if emitter.jump_mode == "iid" or emitter.jump_sigma == 0.0:
        return emitter.jump_sigma * innovations
    rho = emitter.jump_correlation
    start = emitter.jump_sigma * rng.standard_normal((shape[0], 1))
    gain = emitter.jump_sigma * np.sqrt(1.0 - rho * rho)
    walk, _ = lfilter([gain], [1.0, -rho], innovations, axis=1, zi=rho * start)
    return walk


def _simulate_point(emitter: EmitterModel, cfg: PleScanConfig, seed: int, index: int, poisson: bool) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    shape = (cfg.n_scans, cfg.repetitions)
    rep = np.arange(cfg.repetitions)

    success = rng.random(shape) < emitter.repump_recovery_prob
    ionized = rng.random(shape) < emitter.ionization_prob
    moment = rng.random(shape)
    draws = _jump_draws(emitter, rng, shape)

    n_success = np.cumsum(success, axis=1)
    center = emitter.center_frequency + np.take_along_axis(draws, np.maximum(n_success - 1, 0), axis=1)

    last_success = np.maximum.accumulate(np.where(success, rep, -1), axis=1)
    ion_before = np.cumsum(ionized, axis=1) - ionized
    ion_at_last = np.take_along_axis(ion_before, np.maximum(last_success, 0), axis=1)
    bright = (last_success >= 0) & (ion_before == ion_at_last)
    bright_fraction = np.where(ionized, moment, 1.0) * bright

    probe_s = cfg.probe_duration * 1e-6
    line = lineshape(cfg.detunings[index] - center, emitter.homogeneous_fwhm, emitter.saturation)
    expected = (cfg.collection_rate * probe_s * line * bright_fraction).sum(axis=1)
    expected += emitter.background_rate * probe_s * cfg.repetitions
    return rng.poisson(expected).astype(float) if poisson else expected


def simulate_ple_scan(emitter: EmitterModel, cfg: PleScanConfig, seed: int = 0, workers: int = 1,
                      backend: Optional[str] = None, poisson: bool = True) -> PleScan:
    """Mean counts per dwell at every detuning, averaged over `cfg.n_scans` scans.

    Args:
        emitter: Line and noise model.
        cfg: Pulse timing, detuning grid and scan count.
        seed: Master seed; point i draws from SeedSequence(seed, spawn_key=(i,)).
        workers: joblib workers over detuning points.
        backend: joblib backend, defaults to NVFORGE_BACKEND.
        poisson: Sample shot noise; False returns expected counts.
    """
    start = time.time()
    columns = Parallel(n_jobs=workers, backend=backend or BACKEND)(
        delayed(_simulate_point)(emitter, cfg, seed, i, poisson) for i in range(cfg.detunings.size)
    )
    traces = np.stack(columns, axis=1)
    logger.info(f"PLE scan simulated: {cfg.detunings.size} points x {cfg.n_scans} scans x "
                f"{cfg.repetitions} repetitions in {time.time() - start:.1f}s")
    return PleScan(cfg.detunings.copy(), traces.mean(axis=0), traces)


def expected_single_window_profile(emitter: EmitterModel, detunings: np.ndarray,
                                   cfg: Optional[PleScanConfig] = None) -> PleScan:
    """Expected profile of one probe window with the line frozen at its offset (no redraws)."""
    cfg = cfg or PleScanConfig(detunings=np.asarray(detunings, dtype=float))
    probe_s = cfg.probe_duration * 1e-6
    detunings = np.asarray(detunings, dtype=float)
    line = lineshape(detunings - emitter.center_frequency, emitter.homogeneous_fwhm, emitter.saturation)
    counts = cfg.collection_rate * probe_s * line + emitter.background_rate * probe_s
    return PleScan(detunings, counts)
