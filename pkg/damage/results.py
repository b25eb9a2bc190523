"""Implantation results files: `{meta, ions, vacancies, backscattered, transmitted, vacancies_per_ion}`."""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

from materials.model import IonBeam
from runtime.errors import ConfigurationError
from runtime.manifest import RunManifest
from transport.records import ImplantationResult
from utils.artifacts import read_json, write_json
from damage.histograms import (
    ION_KIND,
    VACANCY_KIND,
    DepthHistogram,
    DepthSummary,
    build_depth_histograms,
    default_bin_width,
    summarize_histogram,
    vacancy_yield,
)


@dataclass
class ResultsFile:
    beam: IonBeam
    n_ions: int
    ions: DepthHistogram
    vacancies: DepthHistogram
    backscattered: int
    transmitted: int
    vacancies_per_ion: float
    meta: Dict[str, Any]

    def summaries(self) -> Tuple[DepthSummary, DepthSummary]:
        return (summarize_histogram(self.ions, self.beam.ion, self.beam.energy, self.vacancies_per_ion),
                summarize_histogram(self.vacancies, self.beam.ion, self.beam.energy, self.vacancies_per_ion))


def results_payload(result: ImplantationResult, bin_width: Optional[float] = None) -> Dict[str, Any]:
    width = bin_width or default_bin_width(result.beam.energy)
    ion_hist, vac_hist = build_depth_histograms(result.records, width)
    return {
        "meta": {**result.describe(), "bin_width_nm": width},
        "ions": ion_hist.to_dict(),
        "vacancies": vac_hist.to_dict(),
        "backscattered": result.backscattered,
        "transmitted": result.transmitted,
        "vacancies_per_ion": vacancy_yield(result.records),
    }


def write_results(result: ImplantationResult, path: str, manifest: Optional[RunManifest] = None,
                  bin_width: Optional[float] = None) -> Dict[str, Any]:
    return write_json(results_payload(result, bin_width), path, manifest)


def parse_results(document: Dict[str, Any], source: str = "<results>") -> ResultsFile:
    try:
        meta = document["meta"]
        beam = IonBeam.from_dict(meta["beam"])
        n_ions = int(meta["n_ions"])
        return ResultsFile(
            beam=beam,
            n_ions=n_ions,
            ions=DepthHistogram.from_dict(document["ions"], n_ions, ION_KIND),
            vacancies=DepthHistogram.from_dict(document["vacancies"], n_ions, VACANCY_KIND),
            backscattered=int(document["backscattered"]),
            transmitted=int(document["transmitted"]),
            vacancies_per_ion=float(document["vacancies_per_ion"]),
            meta=meta,
        )
    except (KeyError, TypeError) as e:
        raise ConfigurationError(f"{source} is not an implantation results file: missing {e}")


def read_results(path: str) -> ResultsFile:
    return parse_results(read_json(path), path)
