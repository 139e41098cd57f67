"""Turning chord fitness into a drawable chord set.

Three samplers:

* :func:`sample_connected` walks pin to pin, always taking the fittest
  unused chord from the current pin, and diffuses each choice's error to
  nearby chords in chord space.
* :func:`sample_disconnected` drops the connectivity requirement and pops
  the global fittest chord each step.
* :func:`sample_greedy_baseline` is the classic pixel-coverage walk used for
  comparison.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .chords import ChordSpace


class SamplingError(RuntimeError):
    """The requested chord budget cannot be met."""


@dataclass(frozen=True)
class SamplerParams:
    temperature: float = 30.0
    eps: int = 2
    start_pin: int = 0
    min_loop_span: int = 5
    reduction: float = 15.0

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.eps < 0:
            raise ValueError("eps must be non-negative")


@dataclass(frozen=True)
class GreedyResult:
    pins: np.ndarray
    terminated: bool  # stopped before spending the budget

    @property
    def chord_count(self) -> int:
        return len(self.pins) - 1


def estimate_chord_count(img: np.ndarray, region=None) -> int:
    """Chord budget ``500 + 10 * (255 - mean gray)``, rounded half up.

    The mean is over region pixels of the original (not inverted) image.
    """
    vals = region.gather(img) if region is not None else np.asarray(img, dtype=np.float64)
    if vals.size == 0:
        raise ValueError("empty image")
    return int(math.floor(500.0 + 10.0 * (255.0 - float(np.mean(vals))) + 0.5))


def normalize_fitness(f, temperature: float) -> np.ndarray:
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    return 0.5 * (np.tanh(np.asarray(f, dtype=np.float64) / temperature) + 1.0)


def diffuse_error(fhat: np.ndarray, used: np.ndarray, space: ChordSpace, cid: int, eps: int) -> int:
    """Spread chord ``cid``'s error ``1 - fhat[cid]`` over its eps-neighbours.

    Each neighbour (excluding ``cid``) loses an equal share; ``cid`` is then
    marked used. Works in place on ``fhat`` (float64) and ``used`` (uint8).
    Returns the neighbour count.
    """
    return kernels.diffuse(fhat, used, space.pairs, space.table, int(cid), int(eps))


def _state(fhat, space: ChordSpace):
    fhat = np.array(fhat, dtype=np.float64, copy=True)
    if fhat.shape != (space.m,):
        raise ValueError(f"fitness must have length {space.m}")
    return fhat, np.zeros(space.m, dtype=np.uint8)


def sample_connected(fhat, space: ChordSpace, k: int, start_pin: int = 0, eps: int = 2) -> np.ndarray:
    """Pin sequence of length ``k + 1``; the input array is not modified."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if not 0 <= start_pin < space.pin_count:
        raise ValueError(f"start pin {start_pin} out of range")
    fhat, used = _state(fhat, space)
    pins = kernels.connected_walk(fhat, used, space.pairs, space.table, int(start_pin), int(k), int(eps))
    if len(pins) != k + 1:
        raise SamplingError(
            f"pin {pins[-1]} has no unused chord left after {len(pins) - 1} of {k} chords"
        )
    return pins


def sample_disconnected(fhat, space: ChordSpace, k: int, eps: int = 2) -> np.ndarray:
    """Ids of ``k`` chords picked by repeatedly taking the fittest unused one."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > space.m:
        raise ValueError(f"k={k} exceeds the {space.m} available chords")
    fhat, used = _state(fhat, space)
    return kernels.disconnected_select(fhat, used, space.pairs, space.table, int(k), int(eps))


def sample_greedy_baseline(inverted: np.ndarray, space: ChordSpace, k: int, start_pin: int = 0,
                           min_loop_span: int = 5, reduction: float = 15.0) -> GreedyResult:
    """Walk that always takes the chord covering the most remaining ink.

    Covered pixels lose ``reduction`` (floored at zero) after each pick;
    chords shorter than ``min_loop_span`` pins are never taken. Stops early
    when the best available chord covers no ink.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    values = space.region.gather(inverted)
    used = np.zeros(space.m, dtype=np.uint8)
    pins, terminated = kernels.greedy_walk(values, used, space.indptr, space.indices, space.table,
                                           int(start_pin), int(k), int(min_loop_span), float(reduction))
    return GreedyResult(pins, bool(terminated))


def pins_to_chords(pins, space: ChordSpace) -> np.ndarray:
    pins = np.asarray(pins)
    return space.table[pins[:-1], pins[1:]]


def mean_pairwise_distance(pairs, pin_count: int) -> float:
    """Average chord-space distance over all pairs of the given chords."""
    pairs = np.asarray(pairs, dtype=np.int64)
    if len(pairs) < 2:
        return 0.0
    i, j = pairs[:, 0], pairs[:, 1]

    def circ(a, b):
        d = np.abs(a[:, None] - b[None, :])
        return np.minimum(d, pin_count - d)

    dist = np.minimum(np.maximum(circ(i, i), circ(j, j)), np.maximum(circ(i, j), circ(j, i)))
    n = len(pairs)
    return float(dist.sum() / (n * (n - 1)))
