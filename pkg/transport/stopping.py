"""Electronic stopping and damage-energy partition.

Lindhard-Scharff velocity-proportional stopping covers the 12-55 keV light-ion
beams of interest; above `LS_VALIDITY_KEV` a warning is logged.
"""

import math
from typing import Union

import numpy as np

from materials.model import Element, TargetMaterial, atomic_density
from runtime.config import logger
from transport.scattering import BOHR_RADIUS_NM, E2_EV_NM

ArrayLike = Union[float, np.ndarray]

LS_VALIDITY_KEV = 100.0
NRT_EFFICIENCY = 0.8


def lindhard_scharff_coefficient(z1: int, m1: float, z2: int) -> float:
    """k in eV / (1e15 atoms/cm^2) / sqrt(keV) for one projectile/target pair."""
    return 1.212 * z1 ** (7.0 / 6.0) * z2 / ((z1 ** (2.0 / 3.0) + z2 ** (2.0 / 3.0)) ** 1.5 * math.sqrt(m1))


def stopping_coefficient(ion: Element, target: TargetMaterial) -> float:
    """k such that S_e = k * sqrt(E / keV) in eV/nm (Bragg additivity over elements)."""
    k = math.fsum(f * lindhard_scharff_coefficient(ion.atomic_number, ion.mass, el.atomic_number)
                  for el, f in target.elements)
    # eV per 1e15 atoms/cm^2 -> eV/nm: N [cm^-3] * 1e-7 cm/nm * 1e-15
    return k * atomic_density(target) * 1e-22


def electronic_stopping(ion: Element, target: TargetMaterial, energy: ArrayLike) -> ArrayLike:
    """Electronic stopping in eV/nm at `energy` keV."""
    energy = np.asarray(energy, dtype=float)
    if np.any(energy <= 0):
        raise ValueError("electronic_stopping needs energy > 0 keV")
    if np.any(energy > LS_VALIDITY_KEV):
        logger.warning(f"⚠️ Lindhard-Scharff stopping used above {LS_VALIDITY_KEV} keV for {ion.symbol}")
    value = stopping_coefficient(ion, target) * np.sqrt(energy)
    return float(value) if value.ndim == 0 else value


def robinson_damage_energy(recoil: Element, target: TargetMaterial, recoil_energy_ev: ArrayLike) -> ArrayLike:
    """Damage energy (eV) of a recoil after the Lindhard/Robinson electronic partition."""
    z1, m1 = recoil.atomic_number, recoil.mass
    z2, m2 = target.mean_atomic_number, target.mean_atomic_mass
    a = (9.0 * math.pi ** 2 / 128.0) ** (1.0 / 3.0) * BOHR_RADIUS_NM / math.sqrt(z1 ** (2.0 / 3.0) + z2 ** (2.0 / 3.0))
    t = np.asarray(recoil_energy_ev, dtype=float)
    reduced = m2 * t / (m1 + m2) * a / (z1 * z2 * E2_EV_NM)
    k = 0.1337 * z1 ** (1.0 / 6.0) * math.sqrt(z1 / m1)
    g = 3.4008 * reduced ** (1.0 / 6.0) + 0.40244 * reduced ** 0.75 + reduced
    value = t / (1.0 + k * g)
    return float(value) if value.ndim == 0 else value


def nrt_displacements(damage_energy_ev: ArrayLike, ed_ev: ArrayLike) -> ArrayLike:
    """Modified Kinchin-Pease (NRT) number of displacements."""
    tdam = np.asarray(damage_energy_ev, dtype=float)
    ed = np.asarray(ed_ev, dtype=float)
    value = np.where(
        tdam < ed,
        0.0,
        np.where(tdam < 2.0 * ed / NRT_EFFICIENCY, 1.0, NRT_EFFICIENCY * tdam / (2.0 * ed)),
    )
    return float(value) if value.ndim == 0 else value
