"""Counter-based random streams for the cascade engine.

A draw is a pure function of (seed, stream key, particle id, collision counter,
slot), so a cascade sees the same numbers whatever the scheduling, chunking or
worker count. The mixer is the splitmix64 finaliser applied on uint64 arrays.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

IntArray = Union[int, np.ndarray]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_SLOTS = np.uint64(8)
_ONE = np.uint64(1)
_INV_2_53 = 1.0 / 9007199254740992.0


def _u64(value: IntArray) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value))
    if arr.dtype.kind == "i":
        return arr.astype(np.int64).view(np.uint64)
    return arr.astype(np.uint64)


def mix64(x: np.ndarray) -> np.ndarray:
    x = (x ^ (x >> _S30)) * _M1
    x = (x ^ (x >> _S27)) * _M2
    return x ^ (x >> _S31)


def child_id(parent: IntArray, counter: IntArray) -> np.ndarray:
    """Particle id of the recoil launched by `parent` at collision `counter`."""
    return mix64(_u64(parent) * _GOLDEN + _u64(counter) + _ONE)


def counter_uniform(seed: int, stream_key: IntArray, particle: IntArray, counter: IntArray,
                    slot: int) -> np.ndarray:
    """Uniform floats in [0, 1), one per element of the broadcast inputs."""
    key = mix64(_u64(seed) + _GOLDEN * (_u64(stream_key) + _ONE))
    h = mix64(key ^ _u64(particle))
    h = mix64(h + _GOLDEN * (_u64(counter) * _SLOTS + np.uint64(slot) + _ONE))
    return (h >> _S11).astype(np.float64) * _INV_2_53


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_key: int

    def uniform(self, particle: IntArray, counter: IntArray, slot: int) -> np.ndarray:
        return counter_uniform(self.seed, self.stream_key, particle, counter, slot)

    def sequence(self, n: int, particle: int = 0, slot: int = 0) -> np.ndarray:
        """First `n` draws of one particle on one slot."""
        return self.uniform(particle, np.arange(n), slot)
