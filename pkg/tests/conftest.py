import numpy as np
import pytest

from linewidths.stats import LinewidthSample
from materials.presets import diamond, fig1b_beam
from transport.records import CascadeRecord, Terminal


@pytest.fixture
def target():
    return diamond()


@pytest.fixture
def carbon_12kev():
    return fig1b_beam("12C", 12.0)


@pytest.fixture
def make_record():
    """Build a stopped CascadeRecord with the given ion depth and vacancy depths."""

    def build(index=0, depth=20.0, vacancies=(), weights=None, terminal=Terminal.STOPPED, energy=1000.0):
        vac = np.asarray(vacancies, dtype=float)
        w = np.ones_like(vac) if weights is None else np.asarray(weights, dtype=float)
        return CascadeRecord(
            ion_index=index,
            terminal=terminal,
            final_depth=depth if terminal is Terminal.STOPPED else None,
            initial_energy=energy,
            energy_to_electrons=0.4 * energy,
            energy_to_phonons=0.6 * energy if terminal is Terminal.STOPPED else 0.0,
            energy_exited=0.0 if terminal is Terminal.STOPPED else 0.6 * energy,
            vacancy_depth=vac,
            vacancy_energy=np.full(vac.size, 50.0),
            vacancy_weight=w,
        )

    return build


@pytest.fixture
def linewidth_table():
    """Three regions per sample, five linewidths each."""
    rng = np.random.default_rng(7)
    samples = []
    for label, median, thicknesses in (("A", 143.0, (1.9, 3.0, 4.6)), ("B", 138.0, (1.9, 3.5, 4.9)),
                                       ("C", 304.0, (2.5, 2.5, 50.0))):
        for k, t in enumerate(thicknesses):
            for f in rng.lognormal(np.log(median), 0.7, size=5):
                samples.append(LinewidthSample(float(f), t, label, f"{label}{k + 1}"))
    return samples
