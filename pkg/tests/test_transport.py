import numpy as np
import pytest

from damage.histograms import build_depth_histograms, peak_depth, vacancy_yield
from materials.model import IonBeam
from materials.presets import C12, fig1b_beam
from runtime.errors import ConfigurationError
from transport.engine import chunk_ranges, run_implantation, transport_ion
from transport.records import DamageMode, Terminal
from transport.rng import RngStream


def test_rng_stream_is_a_pure_function():
    a = RngStream(42, 7).sequence(1000)
    b = RngStream(42, 7).sequence(1000)
    assert np.array_equal(a, b)
    assert np.all((a >= 0.0) & (a < 1.0))
    assert not np.array_equal(a, RngStream(42, 8).sequence(1000))
    assert not np.array_equal(a, RngStream(43, 7).sequence(1000))
    assert abs(a.mean() - 0.5) < 0.05


def test_rng_draw_does_not_depend_on_batch():
    stream = RngStream(1, 3)
    batch = stream.uniform(np.arange(5, dtype=np.uint64), 4, 2)
    single = [stream.uniform(np.uint64(i), 4, 2)[0] for i in range(5)]
    assert np.array_equal(batch, single)


def test_damage_mode_aliases():
    assert DamageMode.parse("cascade") is DamageMode.FULL_CASCADE
    assert DamageMode.parse("kp") is DamageMode.KINCHIN_PEASE
    with pytest.raises(ConfigurationError):
        DamageMode.parse("quick")


def test_chunks_depend_only_on_ion_count():
    ranges = chunk_ranges(300)
    assert [len(r) for r in ranges] == [128, 128, 44]
    assert ranges[-1].stop == 300


def test_invalid_run_arguments(target, carbon_12kev):
    with pytest.raises(ConfigurationError):
        run_implantation(carbon_12kev, target, 100.0, 0)
    with pytest.raises(ConfigurationError):
        run_implantation(carbon_12kev, target, -1.0, 10)
    with pytest.raises(ConfigurationError):
        run_implantation(carbon_12kev, target, 100.0, 10, mode="quick")


def test_single_ion_run_matches_transport_ion(target, carbon_12kev):
    batch = run_implantation(carbon_12kev, target, 1000.0, 1, seed=11)
    single = transport_ion(carbon_12kev, target, 1000.0, "cascade", RngStream(11, 0))
    assert batch.records[0].same_as(single)


@pytest.mark.parametrize("mode", ["full-cascade", "kinchin-pease"])
def test_energy_is_conserved_per_cascade(target, carbon_12kev, mode):
    result = run_implantation(carbon_12kev, target, 1000.0, 200, mode=mode, seed=3)
    errors = np.array([r.energy_balance_error() for r in result.records])
    assert np.all(errors < 1e-3)


def test_energy_is_conserved_in_a_thin_slab(target):
    beam = fig1b_beam("15N", 50.0)
    result = run_implantation(beam, target, 40.0, 100, seed=5)
    assert result.transmitted > 0
    assert all(r.energy_balance_error() < 1e-3 for r in result.records)
    assert all(r.final_depth is None for r in result.records if r.exited)


def test_same_seed_same_records_across_worker_counts(target, carbon_12kev):
    serial = run_implantation(carbon_12kev, target, 1000.0, 300, seed=9, workers=1)
    parallel = run_implantation(carbon_12kev, target, 1000.0, 300, seed=9, workers=3, backend="loky")
    assert [r.ion_index for r in parallel.records] == list(range(300))
    assert all(a.same_as(b) for a, b in zip(serial.records, parallel.records))


def test_different_seeds_differ(target, carbon_12kev):
    a = run_implantation(carbon_12kev, target, 1000.0, 20, seed=1)
    b = run_implantation(carbon_12kev, target, 1000.0, 20, seed=2)
    assert not all(x.same_as(y) for x, y in zip(a.records, b.records))


def test_sub_threshold_beam_makes_no_vacancies(target):
    beam = IonBeam(ion=C12, energy=0.02, fluence=1e10, tilt_angle=7.0)
    result = run_implantation(beam, target, 100.0, 200, seed=4)
    assert vacancy_yield(result.records) == 0.0
    depths = [r.final_depth for r in result.records if r.terminal is Terminal.STOPPED]
    assert depths and max(depths) < 2.0


def test_kinchin_pease_weights_follow_nrt(target, carbon_12kev):
    result = run_implantation(carbon_12kev, target, 1000.0, 50, mode="kp", seed=2)
    weights = np.concatenate([r.vacancy_weight for r in result.records])
    assert weights.size > 0
    assert np.all((weights == 1.0) | (weights > 1.0))


def test_full_cascade_logs_unit_vacancies(target, carbon_12kev):
    result = run_implantation(carbon_12kev, target, 1000.0, 50, seed=2)
    record = max(result.records, key=lambda r: r.vacancy_count)
    assert record.vacancy_count > 0
    assert all(event.weight == 1.0 and event.recoil_displaced for event in record.vacancies)
    assert all(0.0 <= event.depth <= 1000.0 for event in record.vacancies)


def test_higher_energy_goes_deeper_and_damages_more(target):
    low = run_implantation(fig1b_beam("12C", 12.0), target, 1000.0, 500, seed=1)
    high = run_implantation(fig1b_beam("12C", 50.0), target, 1000.0, 500, seed=1)
    ion_low, _ = build_depth_histograms(low.records, 1.0)
    ion_high, _ = build_depth_histograms(high.records, 1.0)
    assert peak_depth(ion_high) > 2.0 * peak_depth(ion_low)
    assert vacancy_yield(high.records) > vacancy_yield(low.records)


@pytest.mark.slow
@pytest.mark.parametrize("ion", ["12C", "15N"])
@pytest.mark.parametrize("energy", [12.0, 50.0])
def test_vacancies_peak_shallower_than_ions(target, ion, energy):
    result = run_implantation(fig1b_beam(ion, energy), target, 1000.0, 2000, seed=8)
    width = 0.5 if energy < 30 else 2.0
    ions, vacancies = build_depth_histograms(result.records, width)
    assert peak_depth(vacancies) < peak_depth(ions)


@pytest.mark.slow
def test_carbon_12kev_depth_maxima(target, carbon_12kev):
    result = run_implantation(carbon_12kev, target, 1000.0, 10_000, seed=20210, workers=2)
    ions, vacancies = build_depth_histograms(result.records, 0.5)
    assert peak_depth(vacancies) == pytest.approx(15.3, rel=0.3)
    assert peak_depth(ions) == pytest.approx(20.4, rel=0.3)


@pytest.mark.slow
@pytest.mark.parametrize("energy,expected", [(12.0, 0.92), (50.0, 0.86)])
def test_carbon_to_nitrogen_yield_ratio(target, energy, expected):
    carbon = run_implantation(fig1b_beam("12C", energy), target, 1000.0, 3000, mode="kp", seed=6)
    nitrogen = run_implantation(fig1b_beam("15N", energy), target, 1000.0, 3000, mode="kp", seed=6)
    ratio = vacancy_yield(carbon.records) / vacancy_yield(nitrogen.records)
    assert ratio == pytest.approx(expected, rel=0.10)


@pytest.mark.slow
def test_kinchin_pease_within_corridor_of_full_cascade(target, carbon_12kev):
    cascade = run_implantation(carbon_12kev, target, 1000.0, 1000, seed=12)
    kp = run_implantation(carbon_12kev, target, 1000.0, 1000, mode="kp", seed=12)
    ratio = vacancy_yield(kp.records) / vacancy_yield(cascade.records)
    assert 0.4 <= ratio <= 1.5
