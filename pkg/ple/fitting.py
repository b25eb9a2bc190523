import math
from dataclasses import dataclass, asdict
from typing import Any, Dict

import numpy as np
from scipy.integrate import quad
from scipy.optimize import bisect, curve_fit

from ple.model import PleScan
from runtime.config import logger
from runtime.errors import ConfigurationError, FitError

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))
MIN_POINTS = 8
ORACLE_TOLERANCE_MHZ = 0.1


def gauss(x: np.ndarray, y0: float, amplitude: float, mu: float, sigma: float) -> np.ndarray:
    """y0 + A exp(-(x - mu)^2 / (2 sigma^2))"""
    return y0 + amplitude * np.exp(-(x - mu) ** 2 / (2.0 * sigma ** 2))


@dataclass(frozen=True)
class GaussianLineFit:
    fwhm: float  # MHz
    center: float  # MHz
    amplitude: float
    baseline: float
    fwhm_err: float
    center_err: float
    amplitude_err: float
    baseline_err: float
    resolved: bool

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["fwhm_mhz"] = data.pop("fwhm")
        data["center_mhz"] = data.pop("center")
        return data


def _initial_guess(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    y0 = 0.5 * (y[0] + y[-1])
    amplitude = float(y.max() - y0)
    mu = float(x[np.argmax(y)])
    above = y - y0 > 0.5 * amplitude
    width = (x[above].max() - x[above].min()) if above.sum() > 1 else float(np.min(np.diff(x)))
    sigma = max(width, float(np.min(np.diff(x)))) / FWHM_PER_SIGMA
    return np.array([y0, amplitude, mu, sigma])


def fit_line_gaussian(scan: PleScan) -> GaussianLineFit:
    """Least-squares Gaussian plus constant baseline; FWHM = 2 sqrt(2 ln 2) sigma."""
    x, y = scan.detuning, scan.counts
    if x.size < MIN_POINTS:
        raise ConfigurationError(f"Gaussian line fit needs at least {MIN_POINTS} points, got {x.size}")
    if np.ptp(y) == 0:
        raise FitError("scan is flat; there is no line to fit")

    p0 = _initial_guess(x, y)
    span = float(np.ptp(x))
    bounds = ([-np.inf, 0.0, x.min(), 0.0], [np.inf, np.inf, x.max(), span])
    try:
        popt, pcov = curve_fit(gauss, x, y, p0=p0, bounds=bounds, maxfev=20000)
    except (RuntimeError, ValueError) as e:
        raise FitError(f"Gaussian line fit diverged: {e}")
    errors = np.sqrt(np.clip(np.diag(pcov), 0.0, None)) if np.all(np.isfinite(pcov)) else np.full(4, np.nan)

    y0, amplitude, mu, sigma = (float(v) for v in popt)
    fwhm = FWHM_PER_SIGMA * sigma
    spacing = float(np.max(np.diff(x)))
    resolved = fwhm >= spacing
    if not resolved:
        logger.warning(f"⚠️ Fitted FWHM {fwhm:.2f} MHz is below the {spacing:.2f} MHz grid spacing")
    if span < 2.0 * fwhm:
        logger.warning(f"⚠️ Scan span {span:.1f} MHz covers less than twice the fitted FWHM {fwhm:.1f} MHz")
    return GaussianLineFit(fwhm, mu, amplitude, y0, FWHM_PER_SIGMA * float(errors[3]), float(errors[2]),
                           float(errors[1]), float(errors[0]), resolved)


def olivero_fwhm(lorentz_fwhm: float, gauss_fwhm: float) -> float:
    """Olivero-Longbothum approximation of the Voigt FWHM."""
    return 0.5346 * lorentz_fwhm + math.sqrt(0.2166 * lorentz_fwhm ** 2 + gauss_fwhm ** 2)


def voigt_fwhm_oracle(lorentz_fwhm: float, gauss_fwhm: float) -> float:
    """FWHM of the numerical convolution of Lorentzian(lorentz_fwhm) and Gaussian(gauss_fwhm)."""
    if lorentz_fwhm < 0 or gauss_fwhm < 0:
        raise ConfigurationError("Voigt widths must be >= 0")
    if gauss_fwhm == 0.0:
        return float(lorentz_fwhm)
    if lorentz_fwhm == 0.0:
        return float(gauss_fwhm)

    sigma = gauss_fwhm / FWHM_PER_SIGMA
    hwhm = 0.5 * lorentz_fwhm
    reach = 10.0 * sigma

    def gaussian(t: float) -> float:
        return math.exp(-0.5 * (t / sigma) ** 2)

    def profile(x: float) -> float:
        value, _ = quad(lambda t: gaussian(t) * hwhm / ((x - t) ** 2 + hwhm ** 2), -reach, reach,
                        points=[x] if -reach < x < reach else None, limit=200, epsabs=0.0, epsrel=1e-10)
        return value

    half = 0.5 * profile(0.0)
    half_width = bisect(lambda x: profile(x) - half, 0.0, 0.5 * (lorentz_fwhm + gauss_fwhm),
                        xtol=0.25 * ORACLE_TOLERANCE_MHZ)
    return 2.0 * half_width
