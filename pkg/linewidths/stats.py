"""Lognormal population statistics of optical linewidths."""

import math
from dataclasses import dataclass, asdict
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats

from runtime.config import logger
from runtime.errors import ConfigurationError, InsufficientSamplesError

MIN_FIT_SAMPLES = 3
LINEWIDTH_COLUMNS = ("fwhm_mhz", "thickness_um", "sample", "region")
DEFAULT_GROUPS = {"A+B": ("A", "B"), "C": ("C",), "all": None}


@dataclass(frozen=True)
class LinewidthSample:
    fwhm: float  # MHz
    thickness: float  # um
    sample_label: str = ""
    region_label: str = ""

    def __post_init__(self) -> None:
        if not self.fwhm > 0:
            raise ConfigurationError(f"linewidth must be > 0 MHz, got {self.fwhm}")
        if not self.thickness > 0:
            raise ConfigurationError(f"thickness must be > 0 um, got {self.thickness}")


Samples = Union[Sequence[LinewidthSample], Sequence[float], np.ndarray]


def _values(samples: Samples) -> np.ndarray:
    items = list(samples)
    if items and isinstance(items[0], LinewidthSample):
        return np.array([s.fwhm for s in items], dtype=float)
    return np.asarray(items, dtype=float)


@dataclass(frozen=True)
class LognormalFit:
    mu: float
    sigma: float
    median: float  # MHz
    geometric_std: float
    n: int
    sample_mean: float  # MHz
    lognormal_mean: float  # MHz

    def interval(self) -> Tuple[float, float]:
        """One geometric standard deviation around the median."""
        return self.median / self.geometric_std, self.median * self.geometric_std

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def lognormal_mle(samples: Samples) -> LognormalFit:
    """Maximum-likelihood lognormal fit; sigma is the population (1/n) spread of ln x."""
    x = _values(samples)
    if x.size < MIN_FIT_SAMPLES:
        raise InsufficientSamplesError(f"lognormal fit needs at least {MIN_FIT_SAMPLES} samples, got {x.size}")
    if np.any(x <= 0) or not np.all(np.isfinite(x)):
        raise ConfigurationError("lognormal fit needs finite, positive samples")
    logs = np.log(x)
    mu = float(np.mean(logs))
    sigma = float(np.std(logs))
    return LognormalFit(
        mu=mu,
        sigma=sigma,
        median=math.exp(mu),
        geometric_std=math.exp(sigma),
        n=int(x.size),
        sample_mean=float(np.mean(x)),
        lognormal_mean=math.exp(mu + 0.5 * sigma * sigma),
    )


@dataclass
class EcdfBand:
    x: np.ndarray  # sorted samples
    f: np.ndarray  # ECDF just after each sample
    lower: np.ndarray
    upper: np.ndarray
    alpha: float
    method: str
    epsilon: Optional[float] = None  # DKW half width

    def __call__(self, value: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """Right-continuous step function F(value) = #(x <= value) / n."""
        result = np.searchsorted(self.x, value, side="right") / self.x.size
        return float(result) if np.ndim(result) == 0 else result

    def covers(self, cdf) -> bool:
        """Whether the continuous CDF `cdf` lies inside the band.

        The DKW band is checked everywhere through the Kolmogorov distance; the
        pointwise band only at the sample values.
        """
        true = cdf(self.x)
        if self.epsilon is None:
            return bool(np.all((true >= self.lower) & (true <= self.upper)))
        before = np.searchsorted(self.x, self.x, side="left") / self.x.size
        distance = max(float(np.max(self.f - true)), float(np.max(true - before)))
        return distance <= self.epsilon

    def to_dict(self) -> Dict[str, Any]:
        return {
            "x_mhz": self.x.tolist(),
            "ecdf": self.f.tolist(),
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "alpha": self.alpha,
            "method": self.method,
            "epsilon": self.epsilon,
        }


def dkw_epsilon(n: int, alpha: float = 0.05) -> float:
    """Half width of the Dvoretzky-Kiefer-Wolfowitz band."""
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def ecdf_with_band(samples: Samples, alpha: float = 0.05, method: str = "dkw") -> EcdfBand:
    """ECDF with a (1 - alpha) confidence band.

    `method="dkw"` gives the uniform DKW band F +/- eps clipped to [0, 1];
    `method="binomial"` gives pointwise Clopper-Pearson intervals.
    """
    x = np.sort(_values(samples))
    n = x.size
    if n < 1:
        raise InsufficientSamplesError("ECDF needs at least one sample")
    if not 0.0 < alpha < 1.0:
        raise ConfigurationError(f"alpha must be in (0, 1), got {alpha}")
    f = np.searchsorted(x, x, side="right") / n
    if method == "dkw":
        eps = dkw_epsilon(n, alpha)
        return EcdfBand(x, f, np.clip(f - eps, 0.0, 1.0), np.clip(f + eps, 0.0, 1.0), alpha, method, eps)
    if method == "binomial":
        k = np.round(f * n)
        lower = np.where(k > 0, stats.beta.ppf(alpha / 2.0, np.maximum(k, 1), n - k + 1), 0.0)
        upper = np.where(k < n, stats.beta.ppf(1.0 - alpha / 2.0, k + 1, np.maximum(n - k, 1)), 1.0)
        return EcdfBand(x, f, lower, upper, alpha, method)
    raise ConfigurationError(f"unknown band method {method!r}; use 'dkw' or 'binomial'")


def fraction_below(samples: Samples, threshold: float) -> float:
    """Fraction of linewidths at or below `threshold`."""
    x = _values(samples)
    if x.size < 1:
        raise InsufficientSamplesError("fraction_below needs at least one sample")
    return float(np.count_nonzero(x <= threshold)) / x.size


def samples_from_frame(frame: pd.DataFrame) -> List[LinewidthSample]:
    missing = [c for c in LINEWIDTH_COLUMNS if c not in frame.columns]
    if missing:
        raise ConfigurationError(f"linewidth table is missing columns {missing}")
    return [LinewidthSample(float(row.fwhm_mhz), float(row.thickness_um), str(row.sample), str(row.region))
            for row in frame.itertuples(index=False)]


def samples_to_frame(samples: Iterable[LinewidthSample]) -> pd.DataFrame:
    return pd.DataFrame([{"fwhm_mhz": s.fwhm, "thickness_um": s.thickness, "sample": s.sample_label,
                          "region": s.region_label} for s in samples], columns=list(LINEWIDTH_COLUMNS))


def median_by_thickness(samples: Sequence[LinewidthSample]) -> pd.DataFrame:
    """Per-region lognormal summaries ordered by thickness.

    Regions with fewer than three linewidths are dropped with a warning.
    """
    frame = samples_to_frame(samples)
    rows = []
    for (sample, region), group in frame.groupby(["sample", "region"], sort=False):
        if len(group) < MIN_FIT_SAMPLES:
            logger.warning(f"⚠️ Region {sample}/{region} has {len(group)} linewidths; "
                           f"need {MIN_FIT_SAMPLES}, excluded")
            continue
        fit = lognormal_mle(group["fwhm_mhz"].to_numpy())
        rows.append({
            "sample": sample,
            "region": region,
            "thickness_um": float(group["thickness_um"].mean()),
            "median_mhz": fit.median,
            "geometric_std": fit.geometric_std,
            "mean_mhz": fit.sample_mean,
            "n": fit.n,
        })
    table = pd.DataFrame(rows, columns=["sample", "region", "thickness_um", "median_mhz", "geometric_std",
                                        "mean_mhz", "n"])
    return table.sort_values(["thickness_um", "sample", "region"], kind="mergesort").reset_index(drop=True)


def threshold_report(samples: Sequence[LinewidthSample], threshold: float = 150.0,
                     groups: Optional[Dict[str, Optional[Tuple[str, ...]]]] = None) -> Dict[str, Dict[str, Any]]:
    """Fraction at or below `threshold` per named group of sample labels; None selects everything."""
    groups = DEFAULT_GROUPS if groups is None else groups
    report = {}
    for name, labels in groups.items():
        chosen = [s for s in samples if labels is None or s.sample_label in labels]
        if not chosen:
            logger.warning(f"⚠️ No linewidths in group {name}; skipped")
            continue
        report[name] = {"fraction": fraction_below(chosen, threshold), "n": len(chosen)}
    return report
