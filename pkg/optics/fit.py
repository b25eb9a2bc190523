"""Slab thickness from the fringes on a sideband spectrum.

The fit works on log-intensity, where the sideband envelope and the fringes
separate additively. By default the envelope is a moving median taken once a
first-pass fringe has been divided out; a Legendre trend in 1/lambda is then
removed jointly with a cos/sin pair at the fringe phase 4 pi n d / lambda,
and the periodogram power over a thickness grid is the drop in residual sum
of squares the fringe pair buys. The peak is refined with a
bounded scalar search; its uncertainty comes from the RSS curvature.
"""

import math
from dataclasses import dataclass, asdict
from typing import Any, Dict, Tuple, Union

import numpy as np
from scipy.ndimage import median_filter
from scipy.optimize import minimize_scalar

from optics.etalon import DEFAULT_INDEX, RefractiveIndex, fringe_spacing
from optics.spectrum import Spectrum
from runtime.config import logger
from runtime.errors import ConfigurationError, FitError, IndeterminateThicknessError

D_LIMITS_UM = (0.5, 60.0)
POLY_DEGREE = 4
GRID_OVERSAMPLING = 20
MIN_POWER_RATIO = 3.0
MAX_FALSE_ALARM = 1e-3
ALIAS_SAMPLES = 3.0
MEDIAN_PERIODS = 5
ENVELOPES = ("median", "poly")


@dataclass(frozen=True)
class ThicknessFit:
    thickness: float  # um
    uncertainty: float  # um
    power_ratio: float
    false_alarm_probability: float
    resolution: float  # um, periodogram main-lobe half width
    envelope: str

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["thickness_um"] = data.pop("thickness")
        data["uncertainty_um"] = data.pop("uncertainty")
        data["resolution_um"] = data.pop("resolution")
        return data


class FringeDesign:
    """Detrended log spectrum and the projector that removes the trend basis.

    With the median envelope a first pass on the polynomial trend locates the
    fringe; the fitted fringe is divided out, a moving median over
    MEDIAN_PERIODS fringe periods gives the envelope, and the periodogram runs
    on the spectrum divided by that envelope.
    """

    def __init__(self, spectrum: Spectrum, index: RefractiveIndex, envelope: str,
                 d_range: Tuple[float, float]) -> None:
        if envelope not in ENVELOPES:
            raise ConfigurationError(f"unknown envelope {envelope!r}; use 'median' or 'poly'")
        wavelength = spectrum.wavelength
        intensity = spectrum.intensity
        peak = float(intensity.max())
        if peak <= 0:
            raise IndeterminateThicknessError("spectrum has no signal")
        y = np.log(np.maximum(intensity, peak * 1e-12))
        self.x = 1.0 / wavelength
        self.n_lam = np.asarray(index(wavelength), dtype=float)

        u = (self.x - self.x.mean()) / (0.5 * np.ptp(self.x))
        basis = np.polynomial.legendre.legvander(u, POLY_DEGREE)
        self.q, _ = np.linalg.qr(basis)
        self.n_params = basis.shape[1] + 2
        self._project(y)
        self.envelope_window = 0
        self.log_envelope = None

        if envelope == "median":
            d0 = self.locate(d_range)
            period = fringe_spacing(d0, index, float(np.median(wavelength)))
            size = int(round(MEDIAN_PERIODS * period / float(np.median(np.diff(wavelength)))))
            size = max(3, min(size, wavelength.size // 3)) | 1
            trend = median_filter(y - self.fringe(d0), size=size, mode="nearest")
            self.envelope_window = size
            self.log_envelope = trend
            self._project(y - trend)

    def _project(self, y: np.ndarray) -> None:
        self.residual = y - self.q @ (self.q.T @ y)
        self.rss0 = float(self.residual @ self.residual)

    @property
    def dof(self) -> int:
        return self.x.size - self.n_params

    def resolution(self) -> float:
        """Main-lobe half width of the periodogram, in um."""
        return 1.0 / (2.0 * float(self.n_lam.mean()) * float(np.ptp(self.x))) * 1e-3

    def grid(self, d_range: Tuple[float, float]) -> np.ndarray:
        step = self.resolution() / GRID_OVERSAMPLING
        return np.arange(d_range[0], d_range[1] + 0.5 * step, step)

    def locate(self, d_range: Tuple[float, float]) -> float:
        """Periodogram maximum on the grid, refined by a bounded scalar search."""
        grid = self.grid(d_range)
        k = int(np.argmax(self.power(grid)))
        step = self.resolution() / GRID_OVERSAMPLING
        lo, hi = max(d_range[0], grid[k] - step), min(d_range[1], grid[k] + step)
        refined = minimize_scalar(lambda d: -float(self.power(d)[0]), bounds=(lo, hi), method="bounded",
                                  options={"xatol": step * 1e-4})
        return float(refined.x)

    def _basis(self, d_um: Union[float, np.ndarray]) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        d_nm = np.atleast_1d(np.asarray(d_um, dtype=float)) * 1e3
        phase = 4.0 * np.pi * np.multiply.outer(self.n_lam * self.x, d_nm)
        c_raw = np.cos(phase)
        s_raw = np.sin(phase)
        c = c_raw - self.q @ (self.q.T @ c_raw)
        s = s_raw - self.q @ (self.q.T @ s_raw)
        return c_raw, s_raw, c, s

    def _normal_equations(self, c: np.ndarray, s: np.ndarray):
        a11 = np.einsum("ij,ij->j", c, c)
        a22 = np.einsum("ij,ij->j", s, s)
        a12 = np.einsum("ij,ij->j", c, s)
        b1 = self.residual @ c
        b2 = self.residual @ s
        return a11, a22, a12, b1, b2, a11 * a22 - a12 * a12

    def power(self, d_um: Union[float, np.ndarray]) -> np.ndarray:
        _, _, c, s = self._basis(d_um)
        a11, a22, a12, b1, b2, det = self._normal_equations(c, s)
        return (a22 * b1 * b1 - 2.0 * a12 * b1 * b2 + a11 * b2 * b2) / det

    def fringe(self, d_um: float) -> np.ndarray:
        """Least-squares fringe term of the log spectrum at one thickness."""
        c_raw, s_raw, c, s = self._basis(d_um)
        a11, a22, a12, b1, b2, det = self._normal_equations(c, s)
        a = (a22 * b1 - a12 * b2) / det
        b = (a11 * b2 - a12 * b1) / det
        return (c_raw * a + s_raw * b)[:, 0]


def _check_range(d_range: Tuple[float, float]) -> Tuple[float, float]:
    d_min, d_max = float(d_range[0]), float(d_range[1])
    if not D_LIMITS_UM[0] <= d_min < d_max <= D_LIMITS_UM[1]:
        raise ConfigurationError(f"thickness range must satisfy {D_LIMITS_UM[0]} <= dmin < dmax <= {D_LIMITS_UM[1]} um, "
                                 f"got ({d_min}, {d_max})")
    return d_min, d_max


def periodogram(spectrum: Spectrum, n: Union[float, RefractiveIndex] = DEFAULT_INDEX,
                d_range: Tuple[float, float] = (1.0, 10.0), envelope: str = "median") -> Tuple[np.ndarray, np.ndarray]:
    """Thickness grid (um) and fringe power on it."""
    d_range = _check_range(d_range)
    index = RefractiveIndex.coerce(n)
    index.check(spectrum.wavelength)
    design = FringeDesign(spectrum, index, envelope, d_range)
    grid = design.grid(d_range)
    return grid, design.power(grid)


def fit_thickness(spectrum: Spectrum, n: Union[float, RefractiveIndex] = DEFAULT_INDEX,
                  d_range: Tuple[float, float] = (1.0, 10.0), envelope: str = "median") -> ThicknessFit:
    """Fit the slab thickness in um.

    Args:
        spectrum: Sideband spectrum; any overall scale.
        n: Constant refractive index or a RefractiveIndex with dispersion.
        d_range: Search interval in um, inside [0.5, 60].
        envelope: "median" (moving median over five fringe periods of a
            first-pass estimate, then a fit on the ratio spectrum) or "poly"
            (polynomial trend fitted jointly with the fringe).

    Returns:
        ThicknessFit with the refined thickness and its 1-sigma uncertainty.

    Raises:
        IndeterminateThicknessError: fringes under-sampled at the top of the
            range, or no significant periodogram peak.
    """
    d_min, d_max = _check_range(d_range)
    index = RefractiveIndex.coerce(n)
    index.check(spectrum.wavelength)

    spacing = fringe_spacing(d_max, index, float(spectrum.wavelength[0]))
    max_step = float(np.max(np.diff(spectrum.wavelength)))
    if spacing <= ALIAS_SAMPLES * max_step:
        raise IndeterminateThicknessError(
            f"fringes at {d_max} um ({spacing:.3f} nm) are not resolved by {max_step:.3f} nm sampling; lower dmax")

    design = FringeDesign(spectrum, index, envelope, (d_min, d_max))
    resolution = design.resolution()
    step = resolution / GRID_OVERSAMPLING
    grid = design.grid((d_min, d_max))
    power = design.power(grid)
    k = int(np.argmax(power))
    peak = float(power[k])

    outside = np.abs(grid - grid[k]) > 1.5 * resolution
    off_lobe = float(power[outside].max()) if outside.any() else 0.0
    ratio = peak / off_lobe if off_lobe > 0 else math.inf

    lo, hi = max(d_min, grid[k] - step), min(d_max, grid[k] + step)
    refined = minimize_scalar(lambda d: -float(design.power(d)[0]), bounds=(lo, hi), method="bounded",
                              options={"xatol": step * 1e-4})
    d_fit = float(refined.x)
    p_fit = float(design.power(d_fit)[0])

    sigma2 = max(design.rss0 - p_fit, 0.0) / design.dof
    if sigma2 > 0:
        single = math.exp(-max(peak, p_fit) / (2.0 * sigma2))
        trials = (d_max - d_min) / resolution + 1.0
        fap = -math.expm1(trials * math.log1p(-single)) if single < 1.0 else 1.0
    else:
        fap = 0.0

    if ratio < MIN_POWER_RATIO or fap > MAX_FALSE_ALARM:
        raise IndeterminateThicknessError(
            f"no significant fringe peak in [{d_min}, {d_max}] um (power ratio {ratio:.2f}, false-alarm {fap:.2e})")

    h = resolution * 1e-3
    curvature = (2.0 * p_fit - float(design.power(d_fit + h)[0]) - float(design.power(d_fit - h)[0])) / (h * h)
    if not curvature > 0:
        raise FitError(f"fringe fit at {d_fit:.4f} um has no RSS minimum")
    uncertainty = math.sqrt(2.0 * sigma2 / curvature) if sigma2 > 0 else 0.0

    logger.info(f"✅ Thickness {d_fit:.4f} ± {uncertainty:.4f} um (power ratio {ratio:.1f}, envelope={envelope})")
    return ThicknessFit(d_fit, uncertainty, ratio, fap, resolution, envelope)
