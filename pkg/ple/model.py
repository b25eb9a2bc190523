from dataclasses import dataclass, asdict, field
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from runtime.errors import ConfigurationError
from runtime.manifest import RunManifest
from utils.artifacts import read_csv, write_csv

HOMOGENEOUS_FLOOR_MHZ = 13.0
JUMP_MODES = ("iid", "random_walk")
SCAN_COLUMNS = ("detuning_MHz", "counts")


@dataclass(frozen=True)
class EmitterModel:
    homogeneous_fwhm: float = 13.0  # MHz
    center_frequency: float = 0.0  # MHz offset
    jump_sigma: float = 0.0  # MHz
    saturation: float = 1.0
    ionization_prob: float = 0.0  # per probe pulse
    repump_recovery_prob: float = 1.0
    background_rate: float = 0.0  # counts/s
    jump_mode: str = "iid"
    jump_correlation: float = 0.0  # random_walk only
    fwhm_floor: float = HOMOGENEOUS_FLOOR_MHZ

    def __post_init__(self) -> None:
        if self.homogeneous_fwhm < self.fwhm_floor:
            raise ConfigurationError(f"homogeneous FWHM {self.homogeneous_fwhm} MHz is below the "
                                     f"{self.fwhm_floor} MHz floor")
        if self.jump_sigma < 0:
            raise ConfigurationError(f"jump sigma must be >= 0, got {self.jump_sigma}")
        if self.saturation < 0:
            raise ConfigurationError(f"saturation must be >= 0, got {self.saturation}")
        for name in ("ionization_prob", "repump_recovery_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError(f"{name} must be in [0, 1], got {value}")
        if self.background_rate < 0:
            raise ConfigurationError(f"background rate must be >= 0, got {self.background_rate}")
        if self.jump_mode not in JUMP_MODES:
            raise ConfigurationError(f"jump mode must be one of {JUMP_MODES}, got {self.jump_mode!r}")
        if not 0.0 <= self.jump_correlation < 1.0:
            raise ConfigurationError(f"jump correlation must be in [0, 1), got {self.jump_correlation}")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class PleScanConfig:
    detunings: np.ndarray = field(default_factory=lambda: np.linspace(-400.0, 400.0, 81))  # MHz
    repump_duration: float = 1.0  # us
    probe_duration: float = 5.0  # us
    rep_rate: float = 100.0  # kHz
    dwell: float = 10.0  # ms per detuning
    n_scans: int = 100
    collection_rate: float = 1e5  # counts/s on resonance

    def __post_init__(self) -> None:
        detunings = np.asarray(self.detunings, dtype=float)
        object.__setattr__(self, "detunings", detunings)
        if detunings.ndim != 1 or detunings.size < 1 or np.any(np.diff(detunings) <= 0):
            raise ConfigurationError("detuning grid must be strictly increasing")
        if self.repump_duration <= 0 or self.probe_duration <= 0:
            raise ConfigurationError("pulse durations must be > 0 us")
        if self.rep_rate <= 0 or self.dwell <= 0:
            raise ConfigurationError("repetition rate and dwell must be > 0")
        if self.repump_duration + self.probe_duration > 1e3 / self.rep_rate:
            raise ConfigurationError(f"repump + probe ({self.repump_duration + self.probe_duration} us) exceeds "
                                     f"the {1e3 / self.rep_rate:.2f} us repetition period")
        if self.n_scans < 1:
            raise ConfigurationError(f"n_scans must be >= 1, got {self.n_scans}")
        if self.collection_rate < 0:
            raise ConfigurationError(f"collection rate must be >= 0, got {self.collection_rate}")

    @property
    def repetitions(self) -> int:
        """Sequence repetitions per dwell (ms x kHz)."""
        return max(1, int(round(self.dwell * self.rep_rate)))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["detunings"] = self.detunings.tolist()
        return data


@dataclass
class PleScan:
    detuning: np.ndarray  # MHz
    counts: np.ndarray  # mean counts per dwell
    traces: Optional[np.ndarray] = None  # (n_scans, n_points)

    def __post_init__(self) -> None:
        self.detuning = np.asarray(self.detuning, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.detuning.shape != self.counts.shape:
            raise ConfigurationError("scan needs one count value per detuning")
        if np.any(self.counts < 0):
            raise ConfigurationError("scan counts must be >= 0")

    @property
    def total_counts(self) -> float:
        if self.traces is not None:
            return float(self.traces.sum())
        return float(self.counts.sum())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"detuning_MHz": self.detuning, "counts": self.counts})

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "PleScan":
        frame = frame.sort_values("detuning_MHz")
        return cls(frame["detuning_MHz"].to_numpy(dtype=float), frame["counts"].to_numpy(dtype=float))


EMITTER_KEYS = {
    "homogeneous_fwhm_mhz": "homogeneous_fwhm",
    "center_mhz": "center_frequency",
    "jump_sigma_mhz": "jump_sigma",
    "saturation": "saturation",
    "ionization_prob": "ionization_prob",
    "repump_recovery_prob": "repump_recovery_prob",
    "background_rate": "background_rate",
    "jump_mode": "jump_mode",
    "jump_correlation": "jump_correlation",
    "fwhm_floor_mhz": "fwhm_floor",
}

SCAN_KEYS = {
    "repump_duration_us": "repump_duration",
    "probe_duration_us": "probe_duration",
    "rep_rate_khz": "rep_rate",
    "dwell_ms": "dwell",
    "n_scans": "n_scans",
    "collection_rate": "collection_rate",
}
GRID_KEYS = {"detuning_min_mhz", "detuning_max_mhz", "detuning_points"}


def _translate(section: Dict[str, Any], keys: Dict[str, str], extra: set, name: str) -> Dict[str, Any]:
    unknown = set(section) - set(keys) - extra
    if unknown:
        raise ConfigurationError(f"unknown keys in [{name}]: {sorted(unknown)}")
    return {keys[k]: v for k, v in section.items() if k in keys}


def emitter_from_config(section: Dict[str, Any]) -> EmitterModel:
    return EmitterModel(**_translate(section, EMITTER_KEYS, set(), "emitter"))


def scan_from_config(section: Dict[str, Any]) -> PleScanConfig:
    kwargs = _translate(section, SCAN_KEYS, GRID_KEYS, "scan")
    if GRID_KEYS & set(section):
        kwargs["detunings"] = np.linspace(float(section.get("detuning_min_mhz", -400.0)),
                                          float(section.get("detuning_max_mhz", 400.0)),
                                          int(section.get("detuning_points", 81)))
    if "n_scans" in kwargs:
        kwargs["n_scans"] = int(kwargs["n_scans"])
    return PleScanConfig(**kwargs)


def read_scan(path: str) -> PleScan:
    return PleScan.from_frame(read_csv(path, SCAN_COLUMNS))


def write_scan(scan: PleScan, path: str, manifest: Optional[RunManifest] = None) -> None:
    write_csv(scan.to_frame(), path, manifest)
