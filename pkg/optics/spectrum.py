from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import pandas as pd

from optics.etalon import RefractiveIndex, slab_modulation, DEFAULT_INDEX
from runtime.errors import ConfigurationError
from runtime.manifest import RunManifest
from utils.artifacts import read_csv, write_csv

PSB_WINDOW_NM = (630.0, 800.0)
PSB_PEAK_NM = 680.0
PSB_LOG_WIDTH = 0.06
MIN_SAMPLES = 64
SPECTRUM_COLUMNS = ("wavelength_nm", "intensity")


@dataclass
class Spectrum:
    wavelength: np.ndarray  # nm
    intensity: np.ndarray

    def __post_init__(self) -> None:
        self.wavelength = np.asarray(self.wavelength, dtype=float)
        self.intensity = np.asarray(self.intensity, dtype=float)
        if self.wavelength.shape != self.intensity.shape or self.wavelength.ndim != 1:
            raise ConfigurationError("spectrum needs matching 1-D wavelength and intensity arrays")
        if self.wavelength.size < MIN_SAMPLES:
            raise ConfigurationError(f"spectrum needs at least {MIN_SAMPLES} samples, got {self.wavelength.size}")
        if np.any(np.diff(self.wavelength) <= 0):
            raise ConfigurationError("spectrum wavelengths must be strictly increasing")
        if np.any(self.intensity < 0) or not np.all(np.isfinite(self.intensity)):
            raise ConfigurationError("spectrum intensities must be finite and >= 0")

    def scaled(self, factor: float) -> "Spectrum":
        return Spectrum(self.wavelength, self.intensity * factor)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"wavelength_nm": self.wavelength, "intensity": self.intensity})

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "Spectrum":
        frame = frame.sort_values("wavelength_nm")
        return cls(frame["wavelength_nm"].to_numpy(dtype=float), frame["intensity"].to_numpy(dtype=float))


def psb_envelope(wavelength_nm: np.ndarray, peak_nm: float = PSB_PEAK_NM, log_width: float = PSB_LOG_WIDTH) -> np.ndarray:
    """Log-normal shaped sideband with its maximum at `peak_nm`, scaled to 1 there."""
    mu = np.log(peak_nm) + log_width ** 2
    shape = np.exp(-(np.log(wavelength_nm) - mu) ** 2 / (2.0 * log_width ** 2)) / wavelength_nm
    peak = np.exp(-(np.log(peak_nm) - mu) ** 2 / (2.0 * log_width ** 2)) / peak_nm
    return shape / peak


def synthesize_psb_spectrum(d_um: float, n: Union[float, RefractiveIndex] = DEFAULT_INDEX, noise_level: float = 0.0,
                            seed: Optional[int] = 0, n_samples: int = 1024, lmin: float = PSB_WINDOW_NM[0],
                            lmax: float = PSB_WINDOW_NM[1]) -> Spectrum:
    """Sideband envelope times slab fringes, with multiplicative Gaussian noise."""
    if not d_um > 0:
        raise ConfigurationError(f"slab thickness must be > 0 um, got {d_um}")
    if noise_level < 0:
        raise ConfigurationError(f"noise level must be >= 0, got {noise_level}")
    wavelength = np.linspace(lmin, lmax, n_samples)
    intensity = psb_envelope(wavelength) * slab_modulation(d_um, n, wavelength)
    if noise_level > 0:
        rng = np.random.default_rng(seed)
        intensity = intensity * (1.0 + noise_level * rng.standard_normal(n_samples))
    return Spectrum(wavelength, np.clip(intensity, 0.0, None))


def read_spectrum(path: str) -> Spectrum:
    return Spectrum.from_frame(read_csv(path, SPECTRUM_COLUMNS))


def write_spectrum(spectrum: Spectrum, path: str, manifest: Optional[RunManifest] = None) -> None:
    write_csv(spectrum.to_frame(), path, manifest)
