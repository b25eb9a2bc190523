"""Pinned published values that the reproduction recipes are compared against."""

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

# (vacancy peak, ion peak) of 12C in nm
PEAK_DEPTHS_NM = {12.0: (15.3, 20.4), 50.0: (64.6, 79.9)}
# vacancies per ion, (12C, 15N)
VACANCY_YIELDS = {12.0: (68.0, 74.0), 50.0: (151.0, 175.0)}
YIELD_RATIOS = {12.0: 0.92, 50.0: 0.86}
MAX_RELATIVE_ION_DELTA = 0.20
MAX_RELATIVE_VACANCY_DELTA = 0.15
DEPTH_TOLERANCE = 0.30
YIELD_TOLERANCE = 0.30
RATIO_TOLERANCE = 0.10

SHOWCASE_THICKNESS_UM = 5.4
ROUND_TRIP_THICKNESSES_UM = (1.9, 2.5, 3.8, 5.4)
THICKNESS_TOLERANCE = 0.02
SPECTRUM_NOISE = 0.05

PLE_ORACLE_TOLERANCE = 0.10

SAMPLE_MEDIANS_MHZ = {"A": 143.0, "B": 138.0, "C": 304.0}
MEDIAN_TOLERANCE = 0.20
THRESHOLD_MHZ = 150.0
FRACTIONS_BELOW = {"A+B": 0.54, "C": 0.26, "all": 0.48}
MICROSTRUCTURE_FRACTION = 0.52
FRACTION_TOLERANCE = 0.06

LIFETIME_NS = 12.0
WINDOW_PS = 300.0
TARGET_VISIBILITY = 0.9
MAX_FWHM_RANGE_MHZ = (120.0, 180.0)
MONTE_CARLO_TOLERANCE = 0.02
ZPL_FRACTIONS = (0.03, 0.3)
ENTANGLEMENT_GAIN = 100.0


def _within(delta: float, limit: float) -> bool:
    """delta <= limit, counting a value on the boundary as inside."""
    return delta <= limit or math.isclose(delta, limit, rel_tol=1e-9, abs_tol=1e-12)


@dataclass(frozen=True)
class Target:
    name: str
    expected: Any
    tolerance: Optional[float] = None
    kind: str = "relative"  # relative | absolute | below | within

    def passes(self, value: Optional[float]) -> bool:
        if value is None:
            return False
        if self.kind == "relative":
            return _within(abs(value - self.expected), self.tolerance * abs(self.expected))
        if self.kind == "absolute":
            return _within(abs(value - self.expected), self.tolerance)
        if self.kind == "below":
            return value < self.expected
        if self.kind == "within":
            low, high = self.expected
            return low <= value <= high
        raise ValueError(f"unknown target kind {self.kind!r}")

    def check(self, value: Optional[float], **context: Any) -> Dict[str, Any]:
        return {
            "name": self.name,
            "value": value,
            "expected": list(self.expected) if isinstance(self.expected, tuple) else self.expected,
            "tolerance": self.tolerance,
            "kind": self.kind,
            "passed": self.passes(value),
            **context,
        }
