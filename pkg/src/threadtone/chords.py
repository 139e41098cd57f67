"""Pins, chords and the chord-space metric.

A chord is an unordered pin pair stored as ``(i, j)`` with ``i < j``. Chord
ids index the rows of :attr:`ChordSpace.pairs`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .image import GradientField, Region


@dataclass(frozen=True)
class PinLayout:
    count: int
    shape: str
    radius: int
    center: tuple[float, float]
    positions: np.ndarray  # (count, 2) float x, y in crop pixels
    sides: tuple[frozenset, ...] = ()  # square only: boundary sides each pin lies on

    @property
    def pixel_positions(self) -> np.ndarray:
        """Pin pixels: nearest pixel (halves round up), or truncated toward
        the centre when the nearest one falls outside the circle."""
        near = np.floor(self.positions + 0.5).astype(np.int64)
        if self.shape != "circle":
            return near
        c = np.asarray(self.center)
        off = self.positions - c
        outside = ((near - c) ** 2).sum(axis=1) > self.radius ** 2
        near[outside] = (np.trunc(off[outside]) + c).astype(np.int64)
        return near


def place_pins(count: int, shape: str, region: Region) -> PinLayout:
    """Spread ``count`` pins uniformly along the region boundary.

    Circle pins sit at angle ``2*pi*t/count`` from the +x axis. Square pins are
    equally spaced by arc length, clockwise from the top-left corner, offset by
    half a spacing so that no pin lands on a corner when ``count % 4 == 0``.
    """
    if count < 3:
        raise ValueError(f"need at least 3 pins, got {count}")
    cx, cy = region.center
    r = region.radius
    t = np.arange(count)
    if shape == "circle":
        ang = 2.0 * np.pi * t / count
        pos = np.column_stack([cx + r * np.cos(ang), cy + r * np.sin(ang)])
        return PinLayout(count, shape, r, (float(cx), float(cy)), pos)
    if shape != "square":
        raise ValueError(f"unknown shape {shape!r}")

    side_len = 2.0 * r
    arc = (t + 0.5) * (4.0 * side_len / count)
    pos = np.empty((count, 2))
    sides = []
    for q, s in enumerate(arc):
        k = min(int(s // side_len), 3)
        u = s - k * side_len
        if k == 0:
            pos[q] = (cx - r + u, cy - r)
        elif k == 1:
            pos[q] = (cx + r, cy - r + u)
        elif k == 2:
            pos[q] = (cx + r - u, cy + r)
        else:
            pos[q] = (cx - r, cy + r - u)
        on = {k}
        if math.isclose(u, 0.0, abs_tol=1e-9):
            on.add((k - 1) % 4)
        elif math.isclose(u, side_len, abs_tol=1e-9):
            on.add((k + 1) % 4)
        sides.append(frozenset(on))
    return PinLayout(count, shape, r, (float(cx), float(cy)), pos, tuple(sides))


def chord_span(i: int, j: int, count: int) -> int:
    d = abs(i - j)
    return min(d, count - d)


def chord_distance(a, b, count: int) -> int:
    """Smallest L-infinity gap between the two chords' equivalence classes.

    With pin indices in ``[0, count)``, shifting a coordinate by a multiple of
    ``count`` reduces each coordinate gap to its circular distance, and the swap
    pairs the endpoints the other way round.
    """
    (i1, j1), (i2, j2) = a, b
    straight = max(chord_span(i1, i2, count), chord_span(j1, j2, count))
    crossed = max(chord_span(i1, j2, count), chord_span(j1, i2, count))
    return min(straight, crossed)


@dataclass(frozen=True)
class ChordSpace:
    """The enumerated chord set with cached geometry.

    ``indptr``/``indices`` hold each chord's covered pixels (a CSC view of the
    binary coverage matrix). ``table[i, j]`` is the chord id of pins
    ``i, j`` (symmetric) or -1 when that pair is not enumerated.
    """

    layout: PinLayout
    region: Region
    pairs: np.ndarray
    table: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    spans: np.ndarray
    directions: np.ndarray

    @property
    def m(self) -> int:
        return len(self.pairs)

    @property
    def pin_count(self) -> int:
        return self.layout.count

    def pixels(self, cid: int) -> np.ndarray:
        return self.indices[self.indptr[cid]:self.indptr[cid + 1]]

    def chord_id(self, i: int, j: int) -> int:
        return int(self.table[i, j])

    def coverage_counts(self) -> np.ndarray:
        return np.diff(self.indptr)


def _same_side(layout: PinLayout, i: int, j: int) -> bool:
    return bool(layout.sides[i] & layout.sides[j])


def enumerate_chords(layout: PinLayout, region: Region, s_min: int = 1) -> ChordSpace:
    """All pin pairs ``i < j`` with span >= ``s_min``, rasterized.

    Square layouts drop pairs lying along one boundary side. Chords whose
    line misses every region pixel are dropped as well.
    """
    P = layout.count
    s_min = max(int(s_min), 1)
    ii, jj = np.triu_indices(P, k=1)
    diff = jj - ii
    span = np.minimum(diff, P - diff)
    keep = span >= s_min
    if layout.shape == "square":
        keep &= np.array([not _same_side(layout, a, b) for a, b in zip(ii, jj)], dtype=bool)
    ii, jj, span = ii[keep], jj[keep], span[keep]

    pix = layout.pixel_positions
    indptr, indices = kernels.rasterize_chords(
        pix[ii, 0], pix[ii, 1], pix[jj, 0], pix[jj, 1], region.index_map
    )
    counts = np.diff(indptr)
    if (counts == 0).any():
        nz = counts > 0
        starts = indptr[:-1][nz]
        indices = np.concatenate([indices[s:s + c] for s, c in zip(starts, counts[nz])])
        ii, jj, span = ii[nz], jj[nz], span[nz]
        indptr = np.zeros(len(ii) + 1, dtype=np.int64)
        np.cumsum(counts[nz], out=indptr[1:])

    pairs = np.column_stack([ii, jj]).astype(np.int64)
    table = np.full((P, P), -1, dtype=np.int64)
    ids = np.arange(len(pairs))
    table[ii, jj] = ids
    table[jj, ii] = ids

    vec = layout.positions[jj] - layout.positions[ii]
    norm = np.hypot(vec[:, 0], vec[:, 1])
    norm[norm == 0] = 1.0
    directions = vec / norm[:, None]

    for arr in (pairs, table, indptr, indices, span, directions):
        arr.setflags(write=False)
    return ChordSpace(layout, region, pairs, table, indptr, indices,
                      span.astype(np.int64), directions)


def build_chord_space(region: Region, pin_count: int = 300, s_min: int = 1) -> ChordSpace:
    return enumerate_chords(place_pins(pin_count, region.shape, region), region, s_min)


def rasterize_chord(space: ChordSpace, i: int, j: int) -> np.ndarray:
    """Inside-pixel indices on the line between pins ``i`` and ``j``.

    Always walked from the lower pin index, so the result does not depend
    on argument order.
    """
    lo, hi = sorted((int(i), int(j)))
    pix = space.layout.pixel_positions
    _, indices = kernels.rasterize_chords(
        pix[[lo], 0], pix[[lo], 1], pix[[hi], 0], pix[[hi], 1], space.region.index_map
    )
    return indices


def neighbourhood(space: ChordSpace, cid: int, eps: int) -> np.ndarray:
    """Sorted ids of enumerated chords within chord distance ``eps`` (self included)."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    P = space.pin_count
    i, j = space.pairs[cid]
    offs = np.arange(P) if 2 * eps + 1 >= P else np.arange(-eps, eps + 1)
    u = (i + offs) % P
    v = (j + offs) % P
    ids = space.table[u[:, None], v[None, :]].ravel()
    return np.unique(ids[ids >= 0])


def edge_consistency(direction, grad: GradientField, region: Region, pixels) -> float:
    """Mean |g x e| over the chord's pixels."""
    pixels = np.asarray(pixels)
    if pixels.size == 0:
        raise ValueError("chord covers no pixels")
    gx = region.gather(grad.gx)[pixels]
    gy = region.gather(grad.gy)[pixels]
    ex, ey = direction
    return float(np.mean(np.abs(gx * ey - gy * ex)))


def edge_consistencies(space: ChordSpace, grad: GradientField) -> np.ndarray:
    """:func:`edge_consistency` for every chord at once."""
    counts = space.coverage_counts()
    gx = space.region.gather(grad.gx)[space.indices]
    gy = space.region.gather(grad.gy)[space.indices]
    ex = np.repeat(space.directions[:, 0], counts)
    ey = np.repeat(space.directions[:, 1], counts)
    cross = np.abs(gx * ey - gy * ex)
    return np.add.reduceat(cross, space.indptr[:-1]) / counts
