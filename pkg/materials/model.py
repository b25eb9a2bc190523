"""Ions, targets and beams shared by every physics module.

All three types are frozen dataclasses validated on construction, so they can
be handed to parallel workers without copies.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, Tuple

from runtime.errors import ConfigurationError

AVOGADRO = 6.02214076e23
MAX_ELEMENTS = 4


@dataclass(frozen=True)
class Element:
    symbol: str
    atomic_number: int
    mass: float  # amu

    def __post_init__(self) -> None:
        if int(self.atomic_number) != self.atomic_number or self.atomic_number < 1:
            raise ConfigurationError(f"{self.symbol}: atomic number must be an integer >= 1")
        if not self.mass > 0:
            raise ConfigurationError(f"{self.symbol}: mass must be > 0 amu")

    def to_dict(self) -> Dict[str, Any]:
        return {"symbol": self.symbol, "atomic_number": self.atomic_number, "mass": self.mass}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Element":
        return cls(symbol=data["symbol"], atomic_number=int(data["atomic_number"]), mass=float(data["mass"]))


@dataclass(frozen=True)
class TargetMaterial:
    name: str
    elements: Tuple[Tuple[Element, float], ...]
    mass_density: float  # g/cm^3
    displacement_energy: Tuple[float, ...]  # eV, one per element
    lattice_binding_energy: float  # eV
    surface_binding_energy: float  # eV

    def __post_init__(self) -> None:
        if not self.elements:
            raise ConfigurationError(f"{self.name}: target needs at least one element")
        if len(self.elements) > MAX_ELEMENTS:
            raise ConfigurationError(f"{self.name}: at most {MAX_ELEMENTS} elements are supported")
        fractions = [f for _, f in self.elements]
        if any(f <= 0 for f in fractions):
            raise ConfigurationError(f"{self.name}: stoichiometric fractions must be > 0")
        if abs(math.fsum(fractions) - 1.0) > 1e-12:
            raise ConfigurationError(f"{self.name}: fractions sum to {math.fsum(fractions)!r}, expected 1")
        if len(self.displacement_energy) != len(self.elements):
            raise ConfigurationError(f"{self.name}: need one displacement energy per element")
        energies = list(self.displacement_energy) + [self.lattice_binding_energy, self.surface_binding_energy]
        if any(not e > 0 for e in energies):
            raise ConfigurationError(f"{self.name}: all energies must be > 0 eV")
        if not self.mass_density > 0:
            raise ConfigurationError(f"{self.name}: mass density must be > 0")

    @property
    def mean_atomic_mass(self) -> float:
        return math.fsum(el.mass * f for el, f in self.elements)

    @property
    def mean_atomic_number(self) -> float:
        return math.fsum(el.atomic_number * f for el, f in self.elements)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "elements": [{"element": el.to_dict(), "fraction": f} for el, f in self.elements],
            "mass_density": self.mass_density,
            "displacement_energy": list(self.displacement_energy),
            "lattice_binding_energy": self.lattice_binding_energy,
            "surface_binding_energy": self.surface_binding_energy,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TargetMaterial":
        return cls(
            name=data["name"],
            elements=tuple((Element.from_dict(e["element"]), float(e["fraction"])) for e in data["elements"]),
            mass_density=float(data["mass_density"]),
            displacement_energy=tuple(float(e) for e in data["displacement_energy"]),
            lattice_binding_energy=float(data["lattice_binding_energy"]),
            surface_binding_energy=float(data["surface_binding_energy"]),
        )


@dataclass(frozen=True)
class IonBeam:
    ion: Element
    energy: float  # keV
    fluence: float  # ions/cm^2
    tilt_angle: float = 0.0  # degrees from the surface normal
    charge_state: int = 1  # provenance only

    def __post_init__(self) -> None:
        if not self.energy > 0:
            raise ConfigurationError(f"beam energy must be > 0 keV, got {self.energy}")
        if not self.fluence > 0:
            raise ConfigurationError(f"beam fluence must be > 0, got {self.fluence}")
        if not 0.0 <= self.tilt_angle < 90.0:
            raise ConfigurationError(f"tilt angle must be in [0, 90) degrees, got {self.tilt_angle}")

    @property
    def energy_ev(self) -> float:
        return self.energy * 1e3

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ion": self.ion.to_dict(),
            "energy": self.energy,
            "fluence": self.fluence,
            "tilt_angle": self.tilt_angle,
            "charge_state": self.charge_state,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IonBeam":
        return cls(
            ion=Element.from_dict(data["ion"]),
            energy=float(data["energy"]),
            fluence=float(data["fluence"]),
            tilt_angle=float(data["tilt_angle"]),
            charge_state=int(data.get("charge_state", 1)),
        )


def atomic_density(material: TargetMaterial) -> float:
    """Atoms per cm^3: N = rho * N_A / mean atomic mass."""
    return material.mass_density * AVOGADRO / material.mean_atomic_mass
