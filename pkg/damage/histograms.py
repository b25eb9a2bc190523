"""Depth distributions of implanted ions and vacancies, and the numbers read off them."""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from materials.model import Element, TargetMaterial, atomic_density
from materials.presets import diamond
from runtime.config import logger
from runtime.errors import ConfigurationError, DepthMismatchError, EmptyHistogramError
from transport.records import CascadeRecord, ImplantationResult

ION_KIND = "implanted-ion"
VACANCY_KIND = "vacancy"
EMPTY_WARNINGS = {
    ION_KIND: "all ions left the slab; the ion histogram is empty",
    VACANCY_KIND: "no vacancies were created; the vacancy histogram is empty",
}


def default_bin_width(energy_kev: float) -> float:
    """0.5 nm for the shallow (~12 keV) profiles, 2 nm for the deeper ones."""
    return 0.5 if energy_kev < 30.0 else 2.0


@dataclass
class DepthHistogram:
    bin_edges: np.ndarray  # nm
    counts: np.ndarray
    normalization: int  # ions simulated
    kind: str
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.bin_edges = np.asarray(self.bin_edges, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.bin_edges.size != self.counts.size + 1:
            raise ConfigurationError("histogram needs len(bin_edges) == len(counts) + 1")
        if np.any(np.diff(self.bin_edges) <= 0):
            raise ConfigurationError("histogram bin edges must be strictly increasing")
        if np.any(self.counts < 0):
            raise ConfigurationError("histogram counts must be >= 0")

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    @property
    def empty(self) -> bool:
        return self.total == 0.0

    def per_ion(self) -> np.ndarray:
        """Counts per simulated ion per nm."""
        return self.counts / (self.normalization * self.widths)

    def rebin(self, factor: int) -> "DepthHistogram":
        """Merge groups of `factor` adjacent bins; the last group may be short."""
        if factor < 1:
            raise ConfigurationError("rebin factor must be >= 1")
        starts = np.arange(0, self.counts.size, factor)
        counts = np.add.reduceat(self.counts, starts)
        edges = np.append(self.bin_edges[starts], self.bin_edges[-1])
        return DepthHistogram(edges, counts, self.normalization, self.kind, list(self.warnings))

    def to_dict(self) -> Dict[str, Any]:
        data = {"bin_edges_nm": self.bin_edges.tolist(), "counts": self.counts.tolist()}
        if self.warnings:
            data["warnings"] = list(self.warnings)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any], normalization: int, kind: str) -> "DepthHistogram":
        return cls(np.array(data["bin_edges_nm"], dtype=float), np.array(data["counts"], dtype=float),
                   normalization, kind, list(data.get("warnings", [])))


@dataclass(frozen=True)
class DepthSummary:
    peak_depth: Optional[float]  # nm; None for an empty histogram
    vacancies_per_ion: float
    species: Element
    energy: float  # keV
    kind: str
    warnings: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "species": self.species.symbol,
            "energy_kev": self.energy,
            "peak_depth_nm": self.peak_depth,
            "vacancies_per_ion": self.vacancies_per_ion,
            "warnings": list(self.warnings),
        }


def _bin(depths: np.ndarray, weights: np.ndarray, bin_width: float, n_bins: int) -> np.ndarray:
    index = np.floor(depths / bin_width).astype(np.int64)
    return np.bincount(index, weights=weights, minlength=n_bins).astype(float)


def build_depth_histograms(records: Sequence[CascadeRecord], bin_width: float) -> Tuple[DepthHistogram, DepthHistogram]:
    """Ion and vacancy histograms on common edges starting at 0 nm.

    Ions that left the slab are excluded from the ion histogram; vacancies are
    binned with their weights (1 per displacement, the NRT estimate in
    Kinchin-Pease mode).
    """
    if not records:
        raise ConfigurationError("build_depth_histograms needs at least one record")
    if not bin_width > 0:
        raise ConfigurationError(f"bin width must be > 0 nm, got {bin_width}")

    ion_depths = np.array([r.final_depth for r in records if not r.exited], dtype=float)
    vac_depths = np.concatenate([r.vacancy_depth for r in records] + [np.zeros(0)])
    vac_weights = np.concatenate([r.vacancy_weight for r in records] + [np.zeros(0)])

    deepest = max([0.0] + [float(d.max()) for d in (ion_depths, vac_depths) if d.size])
    n_bins = int(math.floor(deepest / bin_width)) + 1
    edges = np.arange(n_bins + 1) * bin_width

    ion_hist = DepthHistogram(edges, _bin(ion_depths, np.ones(ion_depths.size), bin_width, n_bins),
                              len(records), ION_KIND)
    vac_hist = DepthHistogram(edges, _bin(vac_depths, vac_weights, bin_width, n_bins), len(records), VACANCY_KIND)
    for hist in (ion_hist, vac_hist):
        if hist.empty:
            message = EMPTY_WARNINGS[hist.kind]
            hist.warnings.append(message)
            logger.warning(f"⚠️ {message} ({len(records)} ions)")
    return ion_hist, vac_hist


def peak_depth(hist: DepthHistogram) -> float:
    """Center of the maximum bin after 3-bin moving-average smoothing.

    Ties between smoothed maxima go to the larger raw count, then to the
    shallower bin.
    """
    if hist.empty:
        raise EmptyHistogramError(f"cannot locate the peak of an empty {hist.kind} histogram")
    padded = np.pad(hist.counts, 1)
    smoothed = (padded[:-2] + padded[1:-1] + padded[2:]) / 3.0
    tied = np.flatnonzero(np.isclose(smoothed, smoothed.max(), rtol=1e-12, atol=0.0))
    best = tied[np.argmax(hist.counts[tied])]
    return float(hist.centers[best])


def vacancy_yield(records: Sequence[CascadeRecord]) -> float:
    """Vacancies per simulated ion; exited ions count in the denominator."""
    if not records:
        raise ConfigurationError("vacancy_yield needs at least one record")
    return math.fsum(r.vacancy_count for r in records) / len(records)


def summarize_histogram(hist: DepthHistogram, species: Element, energy: float,
                        vacancies_per_ion: float) -> DepthSummary:
    peak = None if hist.empty else peak_depth(hist)
    return DepthSummary(peak, vacancies_per_ion, species, energy, hist.kind, tuple(hist.warnings))


def summarize(result: ImplantationResult, bin_width: Optional[float] = None) -> Tuple[DepthSummary, DepthSummary]:
    """Ion and vacancy summaries of one implantation run."""
    width = bin_width or default_bin_width(result.beam.energy)
    ion_hist, vac_hist = build_depth_histograms(result.records, width)
    yield_ = vacancy_yield(result.records)
    return (summarize_histogram(ion_hist, result.beam.ion, result.beam.energy, yield_),
            summarize_histogram(vac_hist, result.beam.ion, result.beam.energy, yield_))


def depth_delta(summary_n: DepthSummary, summary_c: DepthSummary) -> Tuple[float, float]:
    """Absolute and relative peak-depth difference; the relative form divides by the first argument."""
    if summary_n.kind != summary_c.kind:
        raise DepthMismatchError(f"cannot compare a {summary_n.kind} summary with a {summary_c.kind} summary")
    if not math.isclose(summary_n.energy, summary_c.energy):
        raise DepthMismatchError(f"energies differ: {summary_n.energy} keV vs {summary_c.energy} keV")
    if summary_n.peak_depth is None or summary_c.peak_depth is None:
        raise EmptyHistogramError(f"no {summary_n.kind} peak to compare")
    delta = abs(summary_n.peak_depth - summary_c.peak_depth)
    relative = delta / summary_n.peak_depth if delta else 0.0
    return delta, relative


def comparison_report(summaries_c: Tuple[DepthSummary, DepthSummary],
                      summaries_n: Tuple[DepthSummary, DepthSummary]) -> Dict[str, Any]:
    """Peak depths, their differences and yields for a carbon/nitrogen pair at one energy."""
    ion_c, vac_c = summaries_c
    ion_n, vac_n = summaries_n
    report: Dict[str, Any] = {
        "inputs": [
            {"ion": ion_c.to_dict(), "vacancy": vac_c.to_dict()},
            {"ion": ion_n.to_dict(), "vacancy": vac_n.to_dict()},
        ],
        "D_ion_nm": [ion_c.peak_depth, ion_n.peak_depth],
        "D_vacancy_nm": [vac_c.peak_depth, vac_n.peak_depth],
        "vacancies_per_ion": [vac_c.vacancies_per_ion, vac_n.vacancies_per_ion],
    }
    delta_i, rel_i = depth_delta(ion_n, ion_c)
    delta_v, rel_v = depth_delta(vac_n, vac_c)
    report.update({
        "delta_ion_nm": delta_i,
        "relative_ion": rel_i,
        "delta_vacancy_nm": delta_v,
        "relative_vacancy": rel_v,
    })
    if vac_n.vacancies_per_ion > 0:
        report["yield_ratio"] = vac_c.vacancies_per_ion / vac_n.vacancies_per_ion
    return report


def nv_density_profile(vac_hist: DepthHistogram, native_n_ppb: float, capture_fraction: float, fluence: float,
                       sites_visited: float = 1e6, target: Optional[TargetMaterial] = None,
                       clamp: bool = True) -> np.ndarray:
    """Phenomenological NV areal density (NV/cm^2) per depth bin.

    A vacancy visits `sites_visited` lattice sites while annealing and is
    captured by a nitrogen it meets with probability `capture_fraction`. The
    result never exceeds the native nitrogen or the vacancies in a bin unless
    `clamp` is False.
    """
    if not 0.0 <= capture_fraction <= 1.0:
        raise ConfigurationError(f"capture fraction must be in [0, 1], got {capture_fraction}")
    if native_n_ppb < 0 or fluence < 0 or sites_visited < 0:
        raise ConfigurationError("nitrogen concentration, fluence and sites visited must be >= 0")
    target = target or diamond()
    x_n = native_n_ppb * 1e-9
    vacancies = vac_hist.counts / vac_hist.normalization * fluence
    nv = capture_fraction * x_n * sites_visited * vacancies
    if not clamp:
        return nv
    native_n = x_n * atomic_density(target) * vac_hist.widths * 1e-7
    return np.minimum(nv, np.minimum(native_n, vacancies))
