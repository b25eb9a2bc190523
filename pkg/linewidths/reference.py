import math
import os
from functools import lru_cache
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
import toml

from linewidths.stats import LINEWIDTH_COLUMNS, LinewidthSample, samples_from_frame
from runtime.config import logger
from runtime.errors import ConfigurationError
from utils.artifacts import read_csv, write_excel

REFERENCE_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data",
                              "reference_linewidths.toml")


@lru_cache(maxsize=None)
def load_reference(path: str = REFERENCE_PATH) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise ConfigurationError(f"reference fixture not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return toml.load(fh)


def sigma_from_mean_median(mean: float, median: float) -> float:
    """Log-space spread of a lognormal with the given mean and median."""
    if not mean > median > 0:
        raise ConfigurationError(f"need mean > median > 0, got mean={mean}, median={median}")
    return math.sqrt(2.0 * math.log(mean / median))


def population_parameters(name: str) -> Dict[str, float]:
    """Median (MHz) and log-space sigma of a reference sample or pooled group."""
    reference = load_reference()
    if name in reference.get("groups", {}):
        group = reference["groups"][name]
        return {"median_mhz": float(group["median_mhz"]), "sigma_log": float(group["sigma_log"])}
    if name in reference.get("samples", {}):
        sample = reference["samples"][name]
        return {"median_mhz": float(sample["median_mhz"]),
                "sigma_log": sigma_from_mean_median(float(sample["mean_mhz"]), float(sample["median_mhz"]))}
    known = sorted(set(reference.get("samples", {})) | set(reference.get("groups", {})))
    raise ConfigurationError(f"unknown reference population {name!r}; known: {known}")


def reference_population(name: str, n: int, seed: Optional[int] = 0, thickness_um: Optional[float] = None,
                         region: str = "") -> List[LinewidthSample]:
    """Lognormal draws matching a published sample's median and mean."""
    if n < 1:
        raise ConfigurationError(f"population size must be >= 1, got {n}")
    params = population_parameters(name)
    rng = np.random.default_rng(seed)
    fwhm = rng.lognormal(mean=math.log(params["median_mhz"]), sigma=params["sigma_log"], size=n)
    if thickness_um is None:
        sample = load_reference().get("samples", {}).get(name, {})
        span = sample.get("thickness_um", [2.0, 5.0])
        thickness = rng.uniform(span[0], span[1], size=n) if span[1] > span[0] else np.full(n, float(span[0]))
    else:
        thickness = np.full(n, float(thickness_um))
    return [LinewidthSample(float(f), float(t), name, region) for f, t in zip(fwhm, thickness)]


def load_linewidths(path: str) -> List[LinewidthSample]:
    samples = samples_from_frame(read_csv(path, LINEWIDTH_COLUMNS))
    logger.info(f"Loaded {len(samples)} linewidths from {os.path.basename(path)}")
    return samples


def export_region_table(table: pd.DataFrame, path: str) -> str:
    """Per-region table to an .xlsx workbook."""
    return write_excel(table, path)
