import numpy as np
import pytest

from ple.fitting import FWHM_PER_SIGMA, fit_line_gaussian, gauss, olivero_fwhm, voigt_fwhm_oracle
from ple.model import EmitterModel, PleScan, PleScanConfig, emitter_from_config, read_scan, scan_from_config, write_scan
from ple.simulate import (
    _jump_draws,
    expected_single_window_profile,
    lineshape,
    power_broadened_width,
    simulate_ple_scan,
)
from runtime.errors import ConfigurationError, FitError


def _grid(half_width, points=41):
    return np.linspace(-half_width, half_width, points)


def test_power_broadening():
    assert power_broadened_width(13.0, 3.0) == pytest.approx(26.0)
    assert power_broadened_width(13.0, 0.0) == 13.0
    with pytest.raises(ConfigurationError):
        power_broadened_width(13.0, -1.0)


def test_lineshape_half_maximum_at_broadened_width():
    width = power_broadened_width(13.0, 3.0)
    assert lineshape(np.array([0.0]), 13.0, 3.0)[0] == 1.0
    assert lineshape(np.array([width / 2.0]), 13.0, 3.0)[0] == pytest.approx(0.5)


def test_voigt_oracle_limits():
    assert voigt_fwhm_oracle(0.0, 40.0) == 40.0
    assert voigt_fwhm_oracle(26.0, 0.0) == 26.0
    with pytest.raises(ConfigurationError):
        voigt_fwhm_oracle(-1.0, 5.0)


@pytest.mark.parametrize("lorentz,gaussian", [(26.0, 136.6), (13.0, 13.0), (50.0, 5.0)])
def test_voigt_oracle_agrees_with_olivero(lorentz, gaussian):
    oracle = voigt_fwhm_oracle(lorentz, gaussian)
    assert oracle == pytest.approx(olivero_fwhm(lorentz, gaussian), rel=5e-3)
    assert max(lorentz, gaussian) < oracle < lorentz + gaussian


def test_gaussian_fit_recovers_exact_gaussian():
    x = _grid(100.0, 81)
    y = gauss(x, 5.0, 40.0, 3.0, 20.0)
    fit = fit_line_gaussian(PleScan(x, y))
    assert fit.fwhm == pytest.approx(FWHM_PER_SIGMA * 20.0, rel=1e-4)
    assert fit.center == pytest.approx(3.0, abs=1e-3)
    assert fit.baseline == pytest.approx(5.0, abs=1e-3)
    assert fit.resolved


@pytest.mark.parametrize("saturation", [0.0, 3.0])
def test_no_jumps_gives_power_broadened_width(saturation):
    emitter = EmitterModel(homogeneous_fwhm=13.0, saturation=saturation)
    width = power_broadened_width(13.0, saturation)
    cfg = PleScanConfig(detunings=_grid(2.0 * width), n_scans=2)
    scan = simulate_ple_scan(emitter, cfg, seed=1, poisson=False)
    assert fit_line_gaussian(scan).fwhm == pytest.approx(width, rel=0.10)


@pytest.mark.parametrize("jump_sigma", [20.0, 58.0])
def test_spectral_diffusion_matches_voigt_oracle(jump_sigma):
    emitter = EmitterModel(homogeneous_fwhm=13.0, saturation=3.0, jump_sigma=jump_sigma)
    oracle = voigt_fwhm_oracle(power_broadened_width(13.0, 3.0), FWHM_PER_SIGMA * jump_sigma)
    cfg = PleScanConfig(detunings=_grid(2.0 * oracle, 61), n_scans=5)
    scan = simulate_ple_scan(emitter, cfg, seed=4, poisson=False)
    assert fit_line_gaussian(scan).fwhm == pytest.approx(oracle, rel=0.10)


def _mean_fitted_fwhm(emitter, half_width, seeds=20, n_scans=2, points=41):
    cfg = PleScanConfig(detunings=_grid(half_width, points), n_scans=n_scans)
    return float(np.mean([fit_line_gaussian(simulate_ple_scan(emitter, cfg, seed=s)).fwhm for s in range(seeds)]))


@pytest.mark.parametrize("homogeneous", [13.0, 20.0, 30.0])
@pytest.mark.parametrize("jump_sigma", [15.0, 30.0, 58.0])
def test_shot_noise_scans_match_voigt_oracle_over_seeds(homogeneous, jump_sigma):
    emitter = EmitterModel(homogeneous_fwhm=homogeneous, saturation=1.0, jump_sigma=jump_sigma)
    oracle = voigt_fwhm_oracle(power_broadened_width(homogeneous, 1.0), FWHM_PER_SIGMA * jump_sigma)
    assert _mean_fitted_fwhm(emitter, 2.0 * oracle, n_scans=4) == pytest.approx(oracle, rel=0.05)


def test_single_window_is_narrower_than_the_full_sequence():
    emitter = EmitterModel(homogeneous_fwhm=13.0, saturation=3.0, jump_sigma=30.0)
    detunings = _grid(150.0, 61)
    full = fit_line_gaussian(simulate_ple_scan(emitter, PleScanConfig(detunings=detunings, n_scans=3), seed=5))
    single = fit_line_gaussian(expected_single_window_profile(emitter, detunings))
    assert single.fwhm < 0.6 * full.fwhm
    assert single.fwhm < 1.5 * power_broadened_width(13.0, 3.0)


def test_fitted_width_grows_with_jump_sigma():
    widths = []
    for jump_sigma in [0.0, 20.0, 40.0, 60.0]:
        emitter = EmitterModel(homogeneous_fwhm=13.0, saturation=1.0, jump_sigma=jump_sigma)
        oracle = voigt_fwhm_oracle(power_broadened_width(13.0, 1.0), FWHM_PER_SIGMA * jump_sigma)
        widths.append(_mean_fitted_fwhm(emitter, 2.0 * oracle))
    assert np.all(np.diff(widths) > 0)


def test_fitted_width_grows_with_saturation():
    widths = []
    for saturation in [0.0, 1.0, 3.0, 8.0]:
        emitter = EmitterModel(homogeneous_fwhm=13.0, saturation=saturation)
        widths.append(_mean_fitted_fwhm(emitter, 2.0 * power_broadened_width(13.0, saturation)))
    assert np.all(np.diff(widths) > 0)


def test_same_seed_same_scan_for_any_worker_count():
    emitter = EmitterModel(jump_sigma=30.0, ionization_prob=0.1, background_rate=500.0)
    cfg = PleScanConfig(detunings=_grid(100.0, 21), n_scans=3)
    a = simulate_ple_scan(emitter, cfg, seed=7)
    b = simulate_ple_scan(emitter, cfg, seed=7, workers=2, backend="loky")
    assert np.array_equal(a.counts, b.counts)
    assert np.array_equal(a.traces, b.traces)
    assert a.traces.shape == (3, 21)
    c = simulate_ple_scan(emitter, cfg, seed=8)
    assert not np.array_equal(a.counts, c.counts)


def test_ionization_darkens_the_line():
    cfg = PleScanConfig(detunings=_grid(30.0, 9), n_scans=2)
    bright = simulate_ple_scan(EmitterModel(), cfg, seed=2, poisson=False)
    blinking = simulate_ple_scan(EmitterModel(ionization_prob=0.5), cfg, seed=2, poisson=False)
    assert blinking.counts[4] < 0.9 * bright.counts[4]


def test_failed_repumps_keep_the_emitter_dark():
    cfg = PleScanConfig(detunings=_grid(30.0, 9), n_scans=2)
    scan = simulate_ple_scan(EmitterModel(ionization_prob=1.0, repump_recovery_prob=0.0), cfg, seed=2,
                             poisson=False)
    assert np.all(scan.counts == 0.0)


def test_background_only():
    cfg = PleScanConfig(detunings=_grid(50.0, 11), n_scans=1, collection_rate=0.0)
    scan = simulate_ple_scan(EmitterModel(background_rate=2000.0), cfg, poisson=False)
    assert np.allclose(scan.counts, 2000.0 * 5e-6 * cfg.repetitions)


def test_random_walk_jumps_are_stationary():
    emitter = EmitterModel(jump_sigma=10.0, jump_mode="random_walk", jump_correlation=0.9)
    draws = _jump_draws(emitter, np.random.default_rng(0), (200, 2000))
    assert draws.std() == pytest.approx(10.0, rel=0.05)
    lag1 = np.corrcoef(draws[:, 1:].ravel(), draws[:, :-1].ravel())[0, 1]
    assert lag1 == pytest.approx(0.9, abs=0.02)


def test_single_window_profile_peaks_at_center():
    emitter = EmitterModel(center_frequency=12.0)
    profile = expected_single_window_profile(emitter, np.linspace(-50.0, 50.0, 101))
    assert profile.detuning[np.argmax(profile.counts)] == 12.0


@pytest.mark.parametrize("kwargs", [
    {"homogeneous_fwhm": 10.0},
    {"jump_sigma": -1.0},
    {"ionization_prob": 1.5},
    {"jump_mode": "levy"},
    {"jump_correlation": 1.0},
    {"background_rate": -5.0},
])
def test_invalid_emitter(kwargs):
    with pytest.raises(ConfigurationError):
        EmitterModel(**kwargs)


def test_invalid_scan_config():
    with pytest.raises(ConfigurationError):
        PleScanConfig(rep_rate=1000.0)
    with pytest.raises(ConfigurationError):
        PleScanConfig(detunings=np.array([1.0, 0.0]))
    with pytest.raises(ConfigurationError):
        PleScanConfig(n_scans=0)


def test_config_sections():
    emitter = emitter_from_config({"homogeneous_fwhm_mhz": 20.0, "jump_sigma_mhz": 5.0})
    assert emitter.homogeneous_fwhm == 20.0 and emitter.jump_sigma == 5.0
    cfg = scan_from_config({"detuning_min_mhz": -10, "detuning_max_mhz": 10, "detuning_points": 11, "n_scans": 4.0})
    assert cfg.detunings.size == 11 and cfg.n_scans == 4
    with pytest.raises(ConfigurationError):
        emitter_from_config({"fwhm": 20.0})
    with pytest.raises(ConfigurationError):
        scan_from_config({"points": 11})


def test_fit_preconditions():
    with pytest.raises(ConfigurationError):
        fit_line_gaussian(PleScan(np.arange(5.0), np.arange(5.0)))
    with pytest.raises(FitError):
        fit_line_gaussian(PleScan(np.arange(20.0), np.full(20, 3.0)))


def test_scan_csv_round_trip(tmp_path):
    scan = PleScan(_grid(50.0, 11), np.linspace(1.0, 2.0, 11))
    path = str(tmp_path / "scan.csv")
    write_scan(scan, path)
    loaded = read_scan(path)
    assert np.allclose(loaded.detuning, scan.detuning)
    assert np.allclose(loaded.counts, scan.counts)
