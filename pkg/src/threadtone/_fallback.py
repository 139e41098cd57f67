"""Pure numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_core.pyx``.
The two must agree exactly on integer outputs and on sampler decisions.
"""
import heapq

import numpy as np


def line_points(x0, y0, x1, y1):
    """Bresenham points for a batch of segments.

    Returns ``(owner, xs, ys)`` where ``owner[q]`` is the segment that point
    ``q`` belongs to. Points of each segment are in walk order from
    ``(x0, y0)`` to ``(x1, y1)``.
    """
    x0 = np.asarray(x0, dtype=np.int64)
    y0 = np.asarray(y0, dtype=np.int64)
    x1 = np.asarray(x1, dtype=np.int64)
    y1 = np.asarray(y1, dtype=np.int64)
    dx = x1 - x0
    dy = y1 - y0
    adx = np.abs(dx)
    ady = np.abs(dy)
    steps = np.maximum(adx, ady)
    counts = steps + 1
    owner = np.repeat(np.arange(len(x0), dtype=np.int64), counts)
    starts = np.cumsum(counts) - counts
    t = np.arange(int(counts.sum()), dtype=np.int64) - np.repeat(starts, counts)

    n = np.repeat(steps, counts)
    safe = np.where(n == 0, 1, n)
    x_major = np.repeat(adx >= ady, counts)
    sx = np.repeat(np.sign(dx), counts)
    sy = np.repeat(np.sign(dy), counts)
    minor_x = (2 * t * np.repeat(adx, counts) + n) // (2 * safe)
    minor_y = (2 * t * np.repeat(ady, counts) + n) // (2 * safe)
    xs = np.repeat(x0, counts) + sx * np.where(x_major, t, minor_x)
    ys = np.repeat(y0, counts) + sy * np.where(x_major, minor_y, t)
    return owner, xs, ys


def rasterize_chords(x0, y0, x1, y1, index_map):
    m = len(x0)
    owner, xs, ys = line_points(x0, y0, x1, y1)
    h, w = index_map.shape
    ok = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
    owner, xs, ys = owner[ok], xs[ok], ys[ok]
    pix = index_map[ys, xs]
    keep = pix >= 0
    owner = owner[keep]
    indices = pix[keep].astype(np.int64)
    indptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(np.bincount(owner, minlength=m), out=indptr[1:])
    return indptr, indices


def coverage_matvec(indptr, indices, f, n):
    counts = np.diff(indptr)
    return np.bincount(indices, weights=np.repeat(np.asarray(f, dtype=np.float64), counts),
                       minlength=n).astype(np.float64)


def coverage_rmatvec(indptr, indices, r):
    m = len(indptr) - 1
    out = np.zeros(m, dtype=np.float64)
    if len(indices) == 0:
        return out
    counts = np.diff(indptr)
    nonempty = counts > 0
    gathered = np.asarray(r, dtype=np.float64)[indices]
    out[nonempty] = np.add.reduceat(gathered, indptr[:-1][nonempty])
    return out


def _neighbour_offsets(eps, pin_count):
    if 2 * eps + 1 >= pin_count:
        return range(pin_count)
    return range(-eps, eps + 1)


def diffuse(fhat, used, pairs, table, cid, eps):
    """Spread ``1 - fhat[cid]`` evenly over the eps-neighbours of ``cid``.

    Marks ``cid`` used. Returns the number of neighbours touched.
    """
    pin_count = table.shape[0]
    i, j = int(pairs[cid, 0]), int(pairs[cid, 1])
    err = 1.0 - fhat[cid]
    offsets = _neighbour_offsets(eps, pin_count)
    found = set()
    for a in offsets:
        u = (i + a) % pin_count
        row = table[u]
        for b in offsets:
            nid = row[(j + b) % pin_count]
            if nid >= 0 and nid != cid:
                found.add(int(nid))
    used[cid] = 1
    if found:
        share = err / len(found)
        fhat[np.fromiter(found, dtype=np.int64, count=len(found))] -= share
    return len(found)


def connected_walk(fhat, used, pairs, table, start, k, eps):
    pins = [start]
    cur = start
    for _ in range(k):
        ids = table[cur]
        ok = ids >= 0
        ok[ok] = used[ids[ok]] == 0
        if not ok.any():
            break
        cand = np.flatnonzero(ok)
        vals = fhat[ids[cand]]
        nxt = int(cand[int(np.argmax(vals))])
        diffuse(fhat, used, pairs, table, int(ids[nxt]), eps)
        pins.append(nxt)
        cur = nxt
    return np.asarray(pins, dtype=np.int64)


def disconnected_select(fhat, used, pairs, table, k, eps):
    heap = [(-float(v), c) for c, v in enumerate(fhat) if not used[c]]
    heapq.heapify(heap)
    chosen = []
    while heap and len(chosen) < k:
        key, c = heapq.heappop(heap)
        if used[c]:
            continue
        if -key != fhat[c]:
            heapq.heappush(heap, (-float(fhat[c]), c))
            continue
        diffuse(fhat, used, pairs, table, c, eps)
        chosen.append(c)
    return np.asarray(chosen, dtype=np.int64)


def greedy_walk(values, used, indptr, indices, table, start, k, min_span, reduction):
    """Baseline walk; returns ``(pins, terminated_early)``. Mutates ``values``."""
    pin_count = table.shape[0]
    dest = np.arange(pin_count)
    pins = [start]
    cur = start
    terminated = False
    for _ in range(k):
        ids = table[cur]
        diff = np.abs(dest - cur)
        span = np.minimum(diff, pin_count - diff)
        ok = (ids >= 0) & (span >= min_span)
        ok[ok] = used[ids[ok]] == 0
        cand = np.flatnonzero(ok)
        if len(cand) == 0:
            terminated = True
            break
        cids = ids[cand]
        lo, hi = indptr[cids], indptr[cids + 1]
        seg = np.concatenate([indices[a:b] for a, b in zip(lo, hi)])
        sums = np.zeros(len(cids))
        lens = hi - lo
        nz = lens > 0
        if seg.size:
            sums[nz] = np.add.reduceat(values[seg], (np.cumsum(lens) - lens)[nz])
        best = int(np.argmax(sums))
        if sums[best] <= 0:
            terminated = True
            break
        c = int(cids[best])
        used[c] = 1
        pix = indices[indptr[c]:indptr[c + 1]]
        values[pix] = np.maximum(values[pix] - reduction, 0.0)
        cur = int(cand[best])
        pins.append(cur)
    return np.asarray(pins, dtype=np.int64), terminated


def draw_lines(canvas, x0, y0, x1, y1, value):
    if len(x0) == 0:
        return canvas
    _, xs, ys = line_points(x0, y0, x1, y1)
    h, w = canvas.shape
    ok = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
    xs, ys = xs[ok], ys[ok]
    canvas[ys, xs] = np.minimum(canvas[ys, xs], value)
    return canvas
