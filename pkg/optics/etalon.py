"""Thin-slab interference on the phonon sideband."""

import math
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from runtime.errors import ConfigurationError

ArrayLike = Union[float, np.ndarray]

DEFAULT_INDEX = 2.41


@dataclass(frozen=True)
class RefractiveIndex:
    """Two-term Cauchy dispersion n = a + b / lambda_um^2; b = 0 is a constant index."""

    a: float = DEFAULT_INDEX
    b: float = 0.0  # um^2

    def __call__(self, wavelength_nm: ArrayLike) -> ArrayLike:
        lam_um = np.asarray(wavelength_nm, dtype=float) * 1e-3
        value = self.a + self.b / lam_um ** 2
        return float(value) if np.ndim(value) == 0 else value

    @property
    def dispersive(self) -> bool:
        return self.b != 0.0

    @classmethod
    def coerce(cls, value: Union[float, "RefractiveIndex"]) -> "RefractiveIndex":
        if isinstance(value, RefractiveIndex):
            return value
        return cls(a=float(value))

    def check(self, wavelength_nm: ArrayLike) -> None:
        if np.any(np.asarray(self(wavelength_nm)) <= 1.0):
            raise ConfigurationError(f"refractive index must be > 1 over the spectrum (a={self.a}, b={self.b})")


def fresnel_reflectivity(n: ArrayLike) -> ArrayLike:
    """Normal-incidence power reflectivity of a slab/vacuum interface."""
    n = np.asarray(n, dtype=float)
    return ((n - 1.0) / (n + 1.0)) ** 2


def fringe_visibility(n: ArrayLike) -> ArrayLike:
    """Contrast (Tmax - Tmin) / (Tmax + Tmin) of the Airy transmission."""
    r = fresnel_reflectivity(n)
    value = 2.0 * r / (1.0 + r * r)
    return float(value) if np.ndim(value) == 0 else value


def slab_modulation(d_um: float, n: Union[float, RefractiveIndex], wavelength_nm: ArrayLike) -> ArrayLike:
    """1 + V cos(4 pi n d / lambda): periodic in 1/lambda with period 1/(2 n d)."""
    if not d_um > 0:
        raise ConfigurationError(f"slab thickness must be > 0 um, got {d_um}")
    wavelength_nm = np.asarray(wavelength_nm, dtype=float)
    if np.any(wavelength_nm <= 0):
        raise ConfigurationError("wavelengths must be > 0 nm")
    index = RefractiveIndex.coerce(n)
    n_lam = np.asarray(index(wavelength_nm))
    value = 1.0 + fringe_visibility(n_lam) * np.cos(4.0 * np.pi * n_lam * d_um * 1e3 / wavelength_nm)
    return float(value) if value.ndim == 0 else value


def fringe_spacing(d_um: float, n: Union[float, RefractiveIndex], wavelength_nm: float) -> float:
    """Local fringe period in wavelength, lambda^2 / (2 n d), in nm."""
    index = RefractiveIndex.coerce(n)
    return wavelength_nm ** 2 / (2.0 * index(wavelength_nm) * d_um * 1e3)


@dataclass(frozen=True)
class EtalonModel:
    thickness: float  # um
    refractive_index: RefractiveIndex = RefractiveIndex()

    def __post_init__(self) -> None:
        if not self.thickness > 0:
            raise ConfigurationError(f"slab thickness must be > 0 um, got {self.thickness}")
        if not self.refractive_index.a > 1.0:
            raise ConfigurationError(f"refractive index must be > 1, got {self.refractive_index.a}")

    def optical_path(self, wavelength_nm: ArrayLike) -> ArrayLike:
        """2 n(lambda) d in nm."""
        return 2.0 * np.asarray(self.refractive_index(wavelength_nm)) * self.thickness * 1e3

    def modulation(self, wavelength_nm: ArrayLike) -> ArrayLike:
        return slab_modulation(self.thickness, self.refractive_index, wavelength_nm)

    def constructive_wavelengths(self, lmin: float = 630.0, lmax: float = 800.0) -> List[Tuple[int, float]]:
        """Fringe orders m and wavelengths with 2 n(lambda_m) d = m lambda_m inside [lmin, lmax]."""
        self.refractive_index.check(np.array([lmin, lmax]))
        m_low = int(math.ceil(float(self.optical_path(lmax)) / lmax))
        m_high = int(math.floor(float(self.optical_path(lmin)) / lmin))
        orders = []
        for m in range(m_high, m_low - 1, -1):
            if self.refractive_index.dispersive:
                lam = brentq(lambda x: float(self.optical_path(x)) - m * x, lmin, lmax, xtol=1e-10)
            else:
                lam = float(self.optical_path(lmin)) / m
            if lmin <= lam <= lmax:
                orders.append((m, lam))
        return orders
