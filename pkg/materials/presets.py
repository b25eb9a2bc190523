"""Built-in species, the diamond target and the implantation recipes of the study.

Diamond parameters follow the usual SRIM-style carbon defaults; every value can
be overridden from the `[target]` config section.
"""

from typing import Any, Dict

from materials.model import Element, TargetMaterial, IonBeam
from runtime.errors import ConfigurationError

C12 = Element("12C", 6, 12.0)
N15 = Element("15N", 7, 15.0001089)
N14 = Element("14N", 7, 14.0030740)
C = Element("C", 6, 12.011)

SPECIES = {
    "12C": C12,
    "C12": C12,
    "15N": N15,
    "N15": N15,
    "14N": N14,
    "N14": N14,
    "C": C,
}

DIAMOND_DENSITY = 3.515
DIAMOND_ED = 28.0
DIAMOND_EB = 3.0
DIAMOND_ES = 7.41

IMPLANT_TILT_DEG = 7.0

# energy (keV) -> fluence (ions/cm^2) used for the simulated depth profiles
FIG1B_FLUENCE = {12.0: 1e10, 50.0: 5e8}

SAMPLE_RECIPES = {
    "A": {"energy_kev": 55.0, "fluence_per_cm2": 5e8},
    "B": {"energy_kev": 55.0, "fluence_per_cm2": 5e8},
    "C": {"energy_kev": 12.0, "fluence_per_cm2": 1e10},
}

TARGET_KEYS = {"density_g_cm3", "ed_ev", "eb_ev", "es_ev"}
BEAM_KEYS = {"ion", "energy_kev", "fluence_per_cm2", "tilt_deg"}


def species(name: str) -> Element:
    try:
        return SPECIES[name]
    except KeyError:
        raise ConfigurationError(f"unknown ion species {name!r}; known: {sorted(set(SPECIES))}")


def diamond(density: float = DIAMOND_DENSITY, ed: float = DIAMOND_ED, eb: float = DIAMOND_EB,
            es: float = DIAMOND_ES) -> TargetMaterial:
    return TargetMaterial(
        name="diamond",
        elements=((C, 1.0),),
        mass_density=density,
        displacement_energy=(ed,),
        lattice_binding_energy=eb,
        surface_binding_energy=es,
    )


def fig1b_beam(ion: str, energy_kev: float) -> IonBeam:
    """Beam of the simulated depth-profile figure: 12 or 50 keV with the figure fluence."""
    if float(energy_kev) not in FIG1B_FLUENCE:
        raise ConfigurationError(f"no figure fluence for {energy_kev} keV; choose from {sorted(FIG1B_FLUENCE)}")
    return IonBeam(ion=species(ion), energy=float(energy_kev), fluence=FIG1B_FLUENCE[float(energy_kev)],
                   tilt_angle=IMPLANT_TILT_DEG)


def sample_beam(sample: str) -> IonBeam:
    """Carbon implantation recipe of samples A, B and C."""
    try:
        recipe = SAMPLE_RECIPES[sample]
    except KeyError:
        raise ConfigurationError(f"unknown sample {sample!r}; known: {sorted(SAMPLE_RECIPES)}")
    return IonBeam(ion=C12, energy=recipe["energy_kev"], fluence=recipe["fluence_per_cm2"],
                   tilt_angle=IMPLANT_TILT_DEG)


def _check_keys(section: Dict[str, Any], allowed: set, name: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigurationError(f"unknown keys in [{name}]: {sorted(unknown)}; allowed: {sorted(allowed)}")


def target_from_config(section: Dict[str, Any]) -> TargetMaterial:
    """Diamond preset with `[target]` overrides."""
    _check_keys(section, TARGET_KEYS, "target")
    return diamond(
        density=float(section.get("density_g_cm3", DIAMOND_DENSITY)),
        ed=float(section.get("ed_ev", DIAMOND_ED)),
        eb=float(section.get("eb_ev", DIAMOND_EB)),
        es=float(section.get("es_ev", DIAMOND_ES)),
    )


def beam_from_config(section: Dict[str, Any]) -> IonBeam:
    _check_keys(section, BEAM_KEYS, "beam")
    energy = float(section.get("energy_kev", 12.0))
    return IonBeam(
        ion=species(str(section.get("ion", "12C"))),
        energy=energy,
        fluence=float(section.get("fluence_per_cm2", FIG1B_FLUENCE.get(energy, 1e10))),
        tilt_angle=float(section.get("tilt_deg", IMPLANT_TILT_DEG)),
    )
