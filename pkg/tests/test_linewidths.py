import math

import numpy as np
import pandas as pd
import pytest
from scipy import stats

from linewidths.reference import (
    export_region_table,
    load_linewidths,
    population_parameters,
    reference_population,
    sigma_from_mean_median,
)
from linewidths.stats import (
    LinewidthSample,
    dkw_epsilon,
    ecdf_with_band,
    fraction_below,
    lognormal_mle,
    median_by_thickness,
    samples_to_frame,
    threshold_report,
)
from runtime.errors import ConfigurationError, InsufficientSamplesError


def test_mle_recovers_median():
    rng = np.random.default_rng(11)
    fit = lognormal_mle(rng.lognormal(math.log(143.0), 0.7, size=10_000))
    assert fit.median == pytest.approx(143.0, rel=0.03)
    assert fit.sigma == pytest.approx(0.7, rel=0.03)
    assert fit.lognormal_mean == pytest.approx(143.0 * math.exp(0.245), rel=0.05)


def test_mle_uses_population_spread():
    fit = lognormal_mle([1.0, math.e, math.e ** 2])
    assert fit.mu == pytest.approx(1.0)
    assert fit.sigma == pytest.approx(math.sqrt(2.0 / 3.0))
    assert fit.interval() == pytest.approx((fit.median / fit.geometric_std, fit.median * fit.geometric_std))


def test_mle_needs_three_positive_samples():
    with pytest.raises(InsufficientSamplesError):
        lognormal_mle([100.0, 200.0])
    with pytest.raises(ConfigurationError):
        lognormal_mle([100.0, 200.0, -1.0])


def test_dkw_band_coverage():
    truth = stats.lognorm(s=0.7, scale=140.0)
    rng = np.random.default_rng(5)
    covered = sum(ecdf_with_band(truth.rvs(size=50, random_state=rng)).covers(truth.cdf) for _ in range(1000))
    assert covered >= 940


def test_dkw_band_shape():
    band = ecdf_with_band([3.0, 1.0, 2.0, 2.0], alpha=0.05)
    assert band.x.tolist() == [1.0, 2.0, 2.0, 3.0]
    assert band.f.tolist() == [0.25, 0.75, 0.75, 1.0]
    assert band.epsilon == pytest.approx(dkw_epsilon(4, 0.05))
    assert np.all(band.lower >= 0.0) and np.all(band.upper <= 1.0)
    assert band(0.5) == 0.0 and band(2.0) == 0.75 and band(10.0) == 1.0


def test_binomial_band_brackets_the_ecdf():
    rng = np.random.default_rng(2)
    band = ecdf_with_band(rng.lognormal(5.0, 0.5, size=40), method="binomial")
    assert band.epsilon is None
    assert np.all(band.lower <= band.f) and np.all(band.f <= band.upper)
    assert band.upper[-1] == 1.0


def test_band_validation():
    with pytest.raises(ConfigurationError):
        ecdf_with_band([1.0, 2.0], alpha=1.5)
    with pytest.raises(ConfigurationError):
        ecdf_with_band([1.0, 2.0], method="bootstrap")
    with pytest.raises(InsufficientSamplesError):
        ecdf_with_band([])


def test_fraction_below_is_an_inclusive_step():
    values = [100.0, 150.0, 200.0, 300.0]
    assert fraction_below(values, 99.0) == 0.0
    assert fraction_below(values, 150.0) == 0.5
    assert fraction_below(values, 300.0) == 1.0
    thresholds = np.linspace(50.0, 350.0, 31)
    fractions = [fraction_below(values, t) for t in thresholds]
    assert all(b >= a for a, b in zip(fractions, fractions[1:]))


def test_pooled_reference_fraction_below_threshold():
    samples = reference_population("A+B", 4000, seed=3)
    assert fraction_below(samples, 150.0) == pytest.approx(0.54, abs=0.05)


def test_population_parameters():
    assert population_parameters("A")["sigma_log"] == pytest.approx(math.sqrt(2.0 * math.log(227.0 / 143.0)))
    assert population_parameters("A+B") == {"median_mhz": 140.0, "sigma_log": 0.687}
    with pytest.raises(ConfigurationError):
        population_parameters("D")


def test_sigma_from_mean_median():
    assert sigma_from_mean_median(227.0, 143.0) == pytest.approx(0.9614, abs=1e-3)
    with pytest.raises(ConfigurationError):
        sigma_from_mean_median(100.0, 143.0)


def test_reference_population_is_seeded():
    a = reference_population("C", 50, seed=1)
    b = reference_population("C", 50, seed=1)
    assert a == b
    assert all(s.thickness == 2.5 and s.sample_label == "C" for s in a)
    spread = reference_population("A", 200, seed=1)
    assert all(1.9 <= s.thickness <= 4.6 for s in spread)
    fixed = reference_population("B", 5, seed=1, thickness_um=3.3, region="B7")
    assert {(s.thickness, s.region_label) for s in fixed} == {(3.3, "B7")}
    with pytest.raises(ConfigurationError):
        reference_population("A", 0)


def test_sample_validation():
    with pytest.raises(ConfigurationError):
        LinewidthSample(0.0, 2.0)
    with pytest.raises(ConfigurationError):
        LinewidthSample(100.0, -2.0)


def test_median_by_thickness_sorts_and_drops_small_regions(linewidth_table):
    extra = [LinewidthSample(120.0, 3.0, "A", "A9"), LinewidthSample(130.0, 3.0, "A", "A9")]
    table = median_by_thickness(linewidth_table + extra)
    assert "A9" not in set(table["region"])
    assert len(table) == 9
    assert list(table["thickness_um"]) == sorted(table["thickness_um"])
    assert set(table["n"]) == {5}


def test_median_does_not_trend_with_thickness():
    samples = []
    for k, thickness in enumerate((1.9, 2.8, 3.7, 4.6)):
        samples += reference_population("A", 40, seed=k, thickness_um=thickness, region=f"A{k + 1}")
    table = median_by_thickness(samples)
    lower = table["median_mhz"] / table["geometric_std"]
    upper = table["median_mhz"] * table["geometric_std"]
    assert lower.max() < upper.min()


def test_threshold_report(linewidth_table):
    report = threshold_report(linewidth_table, 150.0)
    assert report["A+B"]["n"] == 30 and report["C"]["n"] == 15 and report["all"]["n"] == 45
    assert report["all"]["fraction"] == fraction_below(linewidth_table, 150.0)
    only_c = threshold_report(linewidth_table, 150.0, {"C": ("C",), "D": ("D",)})
    assert set(only_c) == {"C"}


def test_load_linewidths_from_csv(tmp_path, linewidth_table):
    path = tmp_path / "lines.csv"
    samples_to_frame(linewidth_table).to_csv(path, index=False)
    loaded = load_linewidths(str(path))
    assert [s.fwhm for s in loaded] == pytest.approx([s.fwhm for s in linewidth_table])
    assert loaded[0].sample_label == "A" and loaded[0].region_label == "A1"


def test_load_linewidths_needs_columns(tmp_path):
    path = tmp_path / "lines.csv"
    path.write_text("fwhm,thickness\n100,2\n")
    with pytest.raises(ConfigurationError):
        load_linewidths(str(path))


def test_export_region_table(tmp_path, linewidth_table):
    table = median_by_thickness(linewidth_table)
    table.loc[0, "region"] = "=SUM(A1)"
    path = export_region_table(table, str(tmp_path / "regions.xlsx"))
    loaded = pd.read_excel(path)
    assert len(loaded) == len(table)
    assert loaded.loc[0, "region"] == "'=SUM(A1)"
