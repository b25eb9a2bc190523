"""Two-photon interference of broadened emitters under temporal filtering.

All linewidth in excess of the lifetime limit is treated as Markovian pure
dephasing. Photons are one-sided exponential wavepackets emitted at a common
time; a coincidence window of width dt keeps only detections within dt of the
emission.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed
from scipy import optimize

from runtime.config import logger
from runtime.errors import ConfigurationError, LinewidthBelowLifetimeError, UnreachableTargetError

DEFAULT_LIFETIME_NS = 12.0
DEFAULT_WINDOW_PS = 300.0
MAX_SEARCH_FWHM_MHZ = 1.0e4
INVERSION_TOLERANCE_MHZ = 1.0
PAIRS_PER_BLOCK = 100_000


def lifetime_limited_fwhm(lifetime_ns: float) -> float:
    """Fourier limit 1/(2 pi T1) in MHz."""
    return 1.0e3 / (2.0 * math.pi * lifetime_ns)


@dataclass(frozen=True)
class PhotonSource:
    lifetime: float = DEFAULT_LIFETIME_NS  # ns
    measured_fwhm: Optional[float] = None  # MHz; None means lifetime limited

    def __post_init__(self) -> None:
        if not self.lifetime > 0:
            raise ConfigurationError(f"lifetime must be > 0 ns, got {self.lifetime}")
        if self.measured_fwhm is None:
            object.__setattr__(self, "measured_fwhm", self.lifetime_limit)
        # a float-rounding hair below the limit is the limit
        if self.measured_fwhm < self.lifetime_limit * (1.0 - 1e-12):
            raise LinewidthBelowLifetimeError(
                f"measured linewidth {self.measured_fwhm:.3f} MHz is below the lifetime limit "
                f"{self.lifetime_limit:.3f} MHz for T1 = {self.lifetime} ns"
            )

    @property
    def lifetime_limit(self) -> float:
        return lifetime_limited_fwhm(self.lifetime)

    @property
    def decay_rate(self) -> float:
        """1/T1 in 1/s."""
        return 1.0e9 / self.lifetime

    @property
    def dephasing_rate(self) -> float:
        """Pure dephasing rate gamma* = pi (FWHM - limit) in 1/s."""
        return math.pi * max(self.measured_fwhm - self.lifetime_limit, 0.0) * 1.0e6

    def with_fwhm(self, fwhm: float) -> "PhotonSource":
        return PhotonSource(self.lifetime, fwhm)


@dataclass(frozen=True)
class FilterWindow:
    window: float = DEFAULT_WINDOW_PS  # ps

    def __post_init__(self) -> None:
        if not self.window > 0:
            raise ConfigurationError(f"coincidence window must be > 0 ps, got {self.window}")

    @property
    def seconds(self) -> float:
        return self.window * 1.0e-12


def hom_visibility(source: PhotonSource, window: FilterWindow) -> float:
    """Filtered two-photon interference visibility.

    V = (a/b) (1 - exp(-b dt)) / (1 - exp(-a dt)) with a = 1/T1 and
    b = a + 2 gamma*, the emission-weighted average of exp(-2 gamma* t) over
    the window.

    Args:
        source: emitter lifetime and measured linewidth.
        window: coincidence window.

    Returns:
        Visibility in (0, 1].
    """
    gamma = source.dephasing_rate
    if gamma == 0.0:
        return 1.0
    a = source.decay_rate
    b = a + 2.0 * gamma
    dt = window.seconds
    visibility = (a / b) * math.expm1(-b * dt) / math.expm1(-a * dt)
    return min(max(visibility, 0.0), 1.0)


def _truncated_exponential(rng: np.random.Generator, rate: float, window: float, size: int) -> np.ndarray:
    u = rng.random(size)
    return -np.log1p(u * np.expm1(-rate * window)) / rate


def _split_fraction(block_seed: np.random.SeedSequence, n_pairs: int, decay: float, gamma: float,
                    window: float) -> int:
    rng = np.random.default_rng(block_seed)
    t = _truncated_exponential(rng, decay, window, n_pairs)
    # each photon accumulates an independent Wiener phase with variance 2 gamma* t
    phase = rng.normal(0.0, 1.0, size=(2, n_pairs)) * np.sqrt(2.0 * gamma * t)
    relative = phase[0] - phase[1]
    # a 50/50 beamsplitter bunches with probability cos^2(dphi / 2)
    split = rng.random(n_pairs) >= np.cos(0.5 * relative) ** 2
    return int(np.count_nonzero(split))


def hom_visibility_monte_carlo(source: PhotonSource, window: FilterWindow, n_pairs: int = 1_000_000,
                               seed: int = 0, workers: int = 1) -> float:
    """Monte Carlo estimate of `hom_visibility` from simulated photon pairs.

    Pairs are split into blocks of fixed size, each with its own stream spawned
    from `seed`, so the estimate does not depend on `workers`. The visibility is
    one minus the coincidence probability relative to distinguishable photons.
    """
    if n_pairs < 1:
        raise ConfigurationError(f"n_pairs must be >= 1, got {n_pairs}")
    sizes = [PAIRS_PER_BLOCK] * (n_pairs // PAIRS_PER_BLOCK)
    if n_pairs % PAIRS_PER_BLOCK:
        sizes.append(n_pairs % PAIRS_PER_BLOCK)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    gamma = source.dephasing_rate
    decay = source.decay_rate
    splits = Parallel(n_jobs=workers)(
        delayed(_split_fraction)(stream, size, decay, gamma, window.seconds)
        for stream, size in zip(streams, sizes)
    )
    visibility = 1.0 - 2.0 * sum(splits) / n_pairs
    logger.info(f"📝 Monte Carlo HOM visibility {visibility:.4f} from {n_pairs} pairs "
                f"({source.measured_fwhm:.1f} MHz, {window.window:.0f} ps)")
    return visibility


def max_linewidth_for_visibility(lifetime: float = DEFAULT_LIFETIME_NS, window: float = DEFAULT_WINDOW_PS,
                                 target_visibility: float = 0.9) -> float:
    """Largest measured FWHM (MHz) that still reaches `target_visibility`.

    Bisection over [lifetime limit, 10 GHz] to 1 MHz.

    Raises:
        ConfigurationError: target outside (0, 1).
        UnreachableTargetError: even a 10 GHz line stays above the target.
    """
    if not 0.0 < target_visibility < 1.0:
        raise ConfigurationError(f"target visibility must be in (0, 1), got {target_visibility}")
    limit = lifetime_limited_fwhm(lifetime)
    filter_window = FilterWindow(window)

    def excess(fwhm: float) -> float:
        return hom_visibility(PhotonSource(lifetime, fwhm), filter_window) - target_visibility

    if excess(MAX_SEARCH_FWHM_MHZ) >= 0.0:
        raise UnreachableTargetError(
            f"visibility stays above {target_visibility} up to {MAX_SEARCH_FWHM_MHZ:.0f} MHz "
            f"(T1 = {lifetime} ns, window = {window} ps)"
        )
    root = optimize.bisect(excess, limit, MAX_SEARCH_FWHM_MHZ, xtol=INVERSION_TOLERANCE_MHZ)
    return float(root)


def visibility_curve(source: PhotonSource, windows: Sequence[float]) -> List[Dict[str, float]]:
    """Visibility at each coincidence window (ps)."""
    return [{"window_ps": float(w), "visibility": hom_visibility(source, FilterWindow(float(w)))}
            for w in windows]


def barrett_kok_gain(zpl_fraction_bare: float, zpl_fraction_enhanced: float) -> float:
    """Heralded entanglement rate gain; two photons must survive, so the gain is quadratic."""
    for name, value in (("bare", zpl_fraction_bare), ("enhanced", zpl_fraction_enhanced)):
        if not 0.0 < value <= 1.0:
            raise ConfigurationError(f"{name} ZPL fraction must be in (0, 1], got {value}")
    return (zpl_fraction_enhanced / zpl_fraction_bare) ** 2
