from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from materials.model import IonBeam, TargetMaterial
from runtime.errors import ConfigurationError


class DamageMode(str, Enum):
    FULL_CASCADE = "full-cascade"
    KINCHIN_PEASE = "kinchin-pease"

    @classmethod
    def parse(cls, value: "str | DamageMode") -> "DamageMode":
        if isinstance(value, DamageMode):
            return value
        aliases = {"cascade": cls.FULL_CASCADE, "full": cls.FULL_CASCADE, "full-cascade": cls.FULL_CASCADE,
                   "kp": cls.KINCHIN_PEASE, "kinchin-pease": cls.KINCHIN_PEASE}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ConfigurationError(f"invalid damage mode {value!r}; use one of {sorted(aliases)}")


class Terminal(str, Enum):
    STOPPED = "stopped"
    BACKSCATTERED = "backscattered"
    TRANSMITTED = "transmitted"


@dataclass(frozen=True)
class CollisionEvent:
    depth: float  # nm
    energy_transferred: float  # eV
    recoil_displaced: bool
    weight: float = 1.0


@dataclass
class CascadeRecord:
    ion_index: int
    terminal: Terminal
    final_depth: Optional[float]  # nm, None unless the ion stopped inside the slab
    initial_energy: float  # eV
    energy_to_electrons: float
    energy_to_phonons: float
    energy_exited: float
    vacancy_depth: np.ndarray = field(default_factory=lambda: np.zeros(0))
    vacancy_energy: np.ndarray = field(default_factory=lambda: np.zeros(0))
    vacancy_weight: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def vacancies(self) -> List[CollisionEvent]:
        return [CollisionEvent(float(d), float(t), True, float(w))
                for d, t, w in zip(self.vacancy_depth, self.vacancy_energy, self.vacancy_weight)]

    @property
    def vacancy_count(self) -> float:
        return float(np.sum(self.vacancy_weight))

    @property
    def exited(self) -> bool:
        return self.terminal is not Terminal.STOPPED

    def energy_balance_error(self) -> float:
        """Relative mismatch between the initial energy and where it went."""
        accounted = self.energy_to_electrons + self.energy_to_phonons + self.energy_exited
        return abs(accounted - self.initial_energy) / self.initial_energy

    def same_as(self, other: "CascadeRecord") -> bool:
        """Bit-level equality, used by the determinism audit."""
        scalars = ("ion_index", "terminal", "final_depth", "initial_energy", "energy_to_electrons",
                   "energy_to_phonons", "energy_exited")
        if any(getattr(self, k) != getattr(other, k) for k in scalars):
            return False
        return all(np.array_equal(getattr(self, k), getattr(other, k))
                   for k in ("vacancy_depth", "vacancy_energy", "vacancy_weight"))


@dataclass
class ImplantationResult:
    beam: IonBeam
    target: TargetMaterial
    slab_thickness: float
    mode: DamageMode
    seed: int
    records: List[CascadeRecord]

    @property
    def n_ions(self) -> int:
        return len(self.records)

    @property
    def backscattered(self) -> int:
        return sum(r.terminal is Terminal.BACKSCATTERED for r in self.records)

    @property
    def transmitted(self) -> int:
        return sum(r.terminal is Terminal.TRANSMITTED for r in self.records)

    def describe(self) -> Dict[str, Any]:
        return {
            "beam": self.beam.to_dict(),
            "target": self.target.to_dict(),
            "slab_thickness_nm": self.slab_thickness,
            "mode": self.mode.value,
            "seed": self.seed,
            "n_ions": self.n_ions,
        }
