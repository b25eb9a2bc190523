import numpy as np
import pytest

from optics.etalon import EtalonModel, RefractiveIndex, fringe_spacing, fringe_visibility, slab_modulation
from optics.fit import FringeDesign, fit_thickness, periodogram
from optics.spectrum import Spectrum, psb_envelope, read_spectrum, synthesize_psb_spectrum, write_spectrum
from runtime.errors import ConfigurationError, IndeterminateThicknessError


def test_diamond_fringe_visibility():
    assert fringe_visibility(2.41) == pytest.approx(0.332, abs=1e-3)
    assert fringe_visibility(1.0) == 0.0


def test_modulation_extremes():
    model = EtalonModel(5.4)
    orders = model.constructive_wavelengths()
    lam = orders[0][1]
    assert slab_modulation(5.4, 2.41, lam) == pytest.approx(1.0 + fringe_visibility(2.41))


def test_constructive_wavelengths_constant_index():
    model = EtalonModel(5.4)
    orders = model.constructive_wavelengths(630.0, 800.0)
    assert orders
    for m, lam in orders:
        assert 630.0 <= lam <= 800.0
        assert 2.0 * 2.41 * 5400.0 == pytest.approx(m * lam)
    assert [m for m, _ in orders] == list(range(orders[0][0], orders[-1][0] - 1, -1))
    gap = orders[1][1] - orders[0][1]
    assert gap == pytest.approx(fringe_spacing(5.4, 2.41, orders[0][1]), rel=0.05)


def test_constructive_wavelengths_with_dispersion():
    index = RefractiveIndex(2.38, 0.012)
    for m, lam in EtalonModel(3.8, index).constructive_wavelengths():
        assert 2.0 * index(lam) * 3800.0 == pytest.approx(m * lam, rel=1e-9)


def test_etalon_validation():
    with pytest.raises(ConfigurationError):
        EtalonModel(0.0)
    with pytest.raises(ConfigurationError):
        EtalonModel(2.0, RefractiveIndex(1.0))
    with pytest.raises(ConfigurationError):
        slab_modulation(-1.0, 2.41, 700.0)


def test_envelope_peaks_at_680nm():
    wavelength = np.linspace(630.0, 800.0, 1701)
    envelope = psb_envelope(wavelength)
    assert wavelength[np.argmax(envelope)] == pytest.approx(680.0, abs=0.2)
    assert envelope.max() == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("envelope", ["median", "poly"])
@pytest.mark.parametrize("d_um", [1.5, 1.9, 2.5, 3.8, 5.4, 6.0])
def test_thickness_round_trip_with_noise(d_um, envelope):
    spectrum = synthesize_psb_spectrum(d_um, noise_level=0.05, seed=3)
    fit = fit_thickness(spectrum, 2.41, (1.0, 10.0), envelope=envelope)
    assert fit.envelope == envelope
    assert fit.thickness == pytest.approx(d_um, rel=0.02)
    assert fit.uncertainty < 0.02 * d_um
    assert fit.power_ratio >= 3.0
    assert fit.false_alarm_probability <= 1e-3


def test_median_is_the_default_envelope():
    assert fit_thickness(synthesize_psb_spectrum(2.5, noise_level=0.02, seed=5)).envelope == "median"


def test_median_envelope_follows_sideband():
    spectrum = synthesize_psb_spectrum(3.8)
    design = FringeDesign(spectrum, RefractiveIndex(), "median", (1.0, 10.0))
    deviation = design.log_envelope - np.log(psb_envelope(spectrum.wavelength))
    assert np.ptp(deviation) < 0.15


def test_median_window_spans_five_fringe_periods():
    spectrum = synthesize_psb_spectrum(12.0, noise_level=0.02, seed=6)
    design = FringeDesign(spectrum, RefractiveIndex(), "median", (1.0, 20.0))
    step = float(np.median(np.diff(spectrum.wavelength)))
    expected = 5.0 * fringe_spacing(12.0, 2.41, float(np.median(spectrum.wavelength))) / step
    assert design.envelope_window == pytest.approx(expected, rel=0.03)
    assert design.envelope_window % 2 == 1
    assert fit_thickness(spectrum, 2.41, (1.0, 20.0)).thickness == pytest.approx(12.0, rel=0.02)


def test_poly_design_has_no_median_window():
    design = FringeDesign(synthesize_psb_spectrum(3.8), RefractiveIndex(), "poly", (1.0, 10.0))
    assert design.envelope_window == 0 and design.log_envelope is None


def test_fit_ignores_overall_scale():
    spectrum = synthesize_psb_spectrum(3.8, noise_level=0.02, seed=1)
    a = fit_thickness(spectrum)
    b = fit_thickness(spectrum.scaled(250.0))
    assert b.thickness == pytest.approx(a.thickness, rel=1e-6)


def test_dispersive_round_trip():
    index = RefractiveIndex(2.38, 0.012)
    spectrum = synthesize_psb_spectrum(2.5, index, noise_level=0.02, seed=2)
    assert fit_thickness(spectrum, index).thickness == pytest.approx(2.5, rel=0.02)


def test_periodogram_peaks_near_truth():
    grid, power = periodogram(synthesize_psb_spectrum(5.4), 2.41, (1.0, 10.0))
    assert grid[np.argmax(power)] == pytest.approx(5.4, rel=0.02)


def test_white_noise_is_indeterminate():
    rng = np.random.default_rng(0)
    wavelength = np.linspace(630.0, 800.0, 1024)
    noise = Spectrum(wavelength, rng.uniform(0.5, 1.5, wavelength.size))
    with pytest.raises(IndeterminateThicknessError):
        fit_thickness(noise)


def test_undersampled_fringes_are_rejected():
    spectrum = synthesize_psb_spectrum(5.4, n_samples=128)
    with pytest.raises(IndeterminateThicknessError):
        fit_thickness(spectrum, 2.41, (1.0, 60.0))


def test_fit_argument_validation():
    spectrum = synthesize_psb_spectrum(3.8)
    with pytest.raises(ConfigurationError):
        fit_thickness(spectrum, 2.41, (5.0, 2.0))
    with pytest.raises(ConfigurationError):
        fit_thickness(spectrum, 2.41, (0.1, 10.0))
    with pytest.raises(ConfigurationError):
        fit_thickness(spectrum, 2.41, envelope="spline")


def test_spectrum_validation():
    wavelength = np.linspace(630.0, 800.0, 100)
    with pytest.raises(ConfigurationError):
        Spectrum(wavelength[:10], np.ones(10))
    with pytest.raises(ConfigurationError):
        Spectrum(wavelength[::-1], np.ones(100))
    with pytest.raises(ConfigurationError):
        Spectrum(wavelength, -np.ones(100))
    with pytest.raises(ConfigurationError):
        synthesize_psb_spectrum(2.0, noise_level=-0.1)


def test_spectrum_csv_round_trip(tmp_path):
    spectrum = synthesize_psb_spectrum(2.5, noise_level=0.05, seed=9)
    path = str(tmp_path / "psb.csv")
    write_spectrum(spectrum, path)
    loaded = read_spectrum(path)
    assert np.allclose(loaded.wavelength, spectrum.wavelength)
    assert np.allclose(loaded.intensity, spectrum.intensity)


def test_spectrum_csv_needs_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("lambda,counts\n700,1\n")
    with pytest.raises(ConfigurationError):
        read_spectrum(str(path))
