# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same signatures and results as ``_fallback``."""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport llabs as iabs

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.float64_t f64
ctypedef cnp.uint8_t u8


cdef inline i64 _count_line(i64 x0, i64 y0, i64 x1, i64 y1) nogil:
    cdef i64 dx = x1 - x0
    cdef i64 dy = y1 - y0
    if dx < 0:
        dx = -dx
    if dy < 0:
        dy = -dy
    return (dx if dx > dy else dy) + 1


def rasterize_chords(x0_, y0_, x1_, y1_, index_map_):
    cdef const i64[::1] x0 = np.ascontiguousarray(x0_, dtype=np.int64)
    cdef const i64[::1] y0 = np.ascontiguousarray(y0_, dtype=np.int64)
    cdef const i64[::1] x1 = np.ascontiguousarray(x1_, dtype=np.int64)
    cdef const i64[::1] y1 = np.ascontiguousarray(y1_, dtype=np.int64)
    cdef const i64[:, ::1] index_map = np.ascontiguousarray(index_map_, dtype=np.int64)
    cdef Py_ssize_t m = x0.shape[0]
    cdef i64 h = index_map.shape[0]
    cdef i64 w = index_map.shape[1]
    cdef Py_ssize_t c
    cdef i64 total = 0
    for c in range(m):
        total += _count_line(x0[c], y0[c], x1[c], y1[c])

    indptr_arr = np.zeros(m + 1, dtype=np.int64)
    buf_arr = np.empty(total, dtype=np.int64)
    cdef i64[::1] indptr = indptr_arr
    cdef i64[::1] buf = buf_arr
    cdef i64 pos = 0
    cdef i64 x, y, tx, ty, dx, dy, sx, sy, err, e2, pix
    with nogil:
        for c in range(m):
            x = x0[c]
            y = y0[c]
            tx = x1[c]
            ty = y1[c]
            dx = iabs(tx - x)
            dy = -iabs(ty - y)
            sx = 1 if x < tx else -1
            sy = 1 if y < ty else -1
            err = dx + dy
            while True:
                if 0 <= x < w and 0 <= y < h:
                    pix = index_map[y, x]
                    if pix >= 0:
                        buf[pos] = pix
                        pos += 1
                if x == tx and y == ty:
                    break
                e2 = 2 * err
                if e2 >= dy:
                    err += dy
                    x += sx
                if e2 <= dx:
                    err += dx
                    y += sy
            indptr[c + 1] = pos
    return indptr_arr, buf_arr[:pos].copy()


def coverage_matvec(indptr_, indices_, f_, Py_ssize_t n):
    cdef const i64[::1] indptr = np.ascontiguousarray(indptr_, dtype=np.int64)
    cdef const i64[::1] indices = np.ascontiguousarray(indices_, dtype=np.int64)
    cdef const f64[::1] f = np.ascontiguousarray(f_, dtype=np.float64)
    out_arr = np.zeros(n, dtype=np.float64)
    cdef f64[::1] out = out_arr
    cdef Py_ssize_t m = indptr.shape[0] - 1
    cdef Py_ssize_t c
    cdef i64 q
    cdef f64 val
    with nogil:
        for c in range(m):
            val = f[c]
            for q in range(indptr[c], indptr[c + 1]):
                out[indices[q]] += val
    return out_arr


def coverage_rmatvec(indptr_, indices_, r_):
    cdef const i64[::1] indptr = np.ascontiguousarray(indptr_, dtype=np.int64)
    cdef const i64[::1] indices = np.ascontiguousarray(indices_, dtype=np.int64)
    cdef const f64[::1] r = np.ascontiguousarray(r_, dtype=np.float64)
    cdef Py_ssize_t m = indptr.shape[0] - 1
    out_arr = np.zeros(m, dtype=np.float64)
    cdef f64[::1] out = out_arr
    cdef Py_ssize_t c
    cdef i64 q
    cdef f64 acc
    with nogil:
        for c in range(m):
            acc = 0.0
            for q in range(indptr[c], indptr[c + 1]):
                acc += r[indices[q]]
            out[c] = acc
    return out_arr


cdef Py_ssize_t _diffuse(f64[::1] fhat, u8[::1] used, const i64[:, ::1] pairs,
                         const i64[:, ::1] table, i64[::1] stamp, i64[::1] found,
                         i64 cid, i64 eps, i64 tick) nogil:
    cdef i64 P = table.shape[0]
    cdef i64 i = pairs[cid, 0]
    cdef i64 j = pairs[cid, 1]
    cdef f64 err = 1.0 - fhat[cid]
    cdef i64 lo, hi, a, b, u, v, nid
    cdef Py_ssize_t nfound = 0, q
    cdef f64 share
    if 2 * eps + 1 >= P:
        lo = 0
        hi = P - 1
    else:
        lo = -eps
        hi = eps
    for a in range(lo, hi + 1):
        u = (i + a) % P
        if u < 0:
            u += P
        for b in range(lo, hi + 1):
            v = (j + b) % P
            if v < 0:
                v += P
            nid = table[u, v]
            if nid >= 0 and nid != cid and stamp[nid] != tick:
                stamp[nid] = tick
                found[nfound] = nid
                nfound += 1
    used[cid] = 1
    if nfound > 0:
        share = err / nfound
        for q in range(nfound):
            fhat[found[q]] -= share
    return nfound


def _scratch(Py_ssize_t m, i64 P, i64 eps):
    cdef i64 side = P if 2 * eps + 1 >= P else 2 * eps + 1
    return np.full(m, -1, dtype=np.int64), np.empty(side * side, dtype=np.int64)


def diffuse(fhat_, used_, pairs_, table_, i64 cid, i64 eps):
    cdef f64[::1] fhat = fhat_
    cdef u8[::1] used = used_
    cdef const i64[:, ::1] pairs = pairs_
    cdef const i64[:, ::1] table = table_
    stamp_arr, found_arr = _scratch(fhat.shape[0], table.shape[0], eps)
    cdef i64[::1] stamp = stamp_arr
    cdef i64[::1] found = found_arr
    return _diffuse(fhat, used, pairs, table, stamp, found, cid, eps, 0)


def connected_walk(fhat_, used_, pairs_, table_, i64 start, i64 k, i64 eps):
    cdef f64[::1] fhat = fhat_
    cdef u8[::1] used = used_
    cdef const i64[:, ::1] pairs = pairs_
    cdef const i64[:, ::1] table = table_
    cdef i64 P = table.shape[0]
    stamp_arr, found_arr = _scratch(fhat.shape[0], P, eps)
    cdef i64[::1] stamp = stamp_arr
    cdef i64[::1] found = found_arr
    pins_arr = np.empty(k + 1, dtype=np.int64)
    cdef i64[::1] pins = pins_arr
    cdef i64 cur = start, step, x, cid, best, best_cid
    cdef f64 best_val
    cdef Py_ssize_t npins = 1
    pins[0] = start
    with nogil:
        for step in range(k):
            best = -1
            best_cid = -1
            best_val = 0.0
            for x in range(P):
                cid = table[cur, x]
                if cid < 0 or used[cid]:
                    continue
                if best < 0 or fhat[cid] > best_val:
                    best = x
                    best_cid = cid
                    best_val = fhat[cid]
            if best < 0:
                break
            _diffuse(fhat, used, pairs, table, stamp, found, best_cid, eps, step)
            pins[npins] = best
            npins += 1
            cur = best
    return pins_arr[:npins].copy()


cdef inline bint _above(f64 va, i64 a, f64 vb, i64 b) nogil:
    # heap order: larger value first, then smaller chord id
    return va > vb or (va == vb and a < b)


cdef void _sift_down(f64[::1] keys, i64[::1] ids, Py_ssize_t size, Py_ssize_t pos) nogil:
    cdef Py_ssize_t child
    cdef f64 kv = keys[pos]
    cdef i64 iv = ids[pos]
    while True:
        child = 2 * pos + 1
        if child >= size:
            break
        if child + 1 < size and _above(keys[child + 1], ids[child + 1], keys[child], ids[child]):
            child += 1
        if not _above(keys[child], ids[child], kv, iv):
            break
        keys[pos] = keys[child]
        ids[pos] = ids[child]
        pos = child
    keys[pos] = kv
    ids[pos] = iv


def disconnected_select(fhat_, used_, pairs_, table_, i64 k, i64 eps):
    cdef f64[::1] fhat = fhat_
    cdef u8[::1] used = used_
    cdef const i64[:, ::1] pairs = pairs_
    cdef const i64[:, ::1] table = table_
    cdef Py_ssize_t m = fhat.shape[0]
    stamp_arr, found_arr = _scratch(m, table.shape[0], eps)
    cdef i64[::1] stamp = stamp_arr
    cdef i64[::1] found = found_arr
    out_arr = np.empty(k, dtype=np.int64)
    cdef i64[::1] out = out_arr
    # lazy max-heap: values only decrease, so a stale top is refreshed in place
    cdef f64[::1] keys = np.empty(m, dtype=np.float64)
    cdef i64[::1] ids = np.empty(m, dtype=np.int64)
    cdef Py_ssize_t c, size = 0, nsel = 0, pos
    cdef i64 top
    with nogil:
        for c in range(m):
            if not used[c]:
                keys[size] = fhat[c]
                ids[size] = c
                size += 1
        pos = size // 2
        while pos > 0:
            pos -= 1
            _sift_down(keys, ids, size, pos)
        while nsel < k and size > 0:
            top = ids[0]
            if used[top]:
                size -= 1
                keys[0] = keys[size]
                ids[0] = ids[size]
                _sift_down(keys, ids, size, 0)
                continue
            if keys[0] != fhat[top]:
                keys[0] = fhat[top]
                _sift_down(keys, ids, size, 0)
                continue
            _diffuse(fhat, used, pairs, table, stamp, found, top, eps, nsel)
            out[nsel] = top
            nsel += 1
            size -= 1
            keys[0] = keys[size]
            ids[0] = ids[size]
            _sift_down(keys, ids, size, 0)
    return out_arr[:nsel].copy()


def greedy_walk(values_, used_, indptr_, indices_, table_, i64 start, i64 k,
                i64 min_span, f64 reduction):
    cdef f64[::1] values = values_
    cdef u8[::1] used = used_
    cdef const i64[::1] indptr = np.ascontiguousarray(indptr_, dtype=np.int64)
    cdef const i64[::1] indices = np.ascontiguousarray(indices_, dtype=np.int64)
    cdef const i64[:, ::1] table = table_
    cdef i64 P = table.shape[0]
    pins_arr = np.empty(k + 1, dtype=np.int64)
    cdef i64[::1] pins = pins_arr
    cdef i64 cur = start, step, x, cid, best, best_cid, span, q, p
    cdef f64 best_sum, s, val
    cdef Py_ssize_t npins = 1
    cdef bint terminated = False
    pins[0] = start
    with nogil:
        for step in range(k):
            best = -1
            best_cid = -1
            best_sum = 0.0
            for x in range(P):
                cid = table[cur, x]
                if cid < 0 or used[cid]:
                    continue
                span = x - cur if x > cur else cur - x
                if P - span < span:
                    span = P - span
                if span < min_span:
                    continue
                s = 0.0
                for q in range(indptr[cid], indptr[cid + 1]):
                    s += values[indices[q]]
                if best < 0 or s > best_sum:
                    best = x
                    best_cid = cid
                    best_sum = s
            if best < 0 or best_sum <= 0.0:
                terminated = True
                break
            used[best_cid] = 1
            for q in range(indptr[best_cid], indptr[best_cid + 1]):
                p = indices[q]
                val = values[p] - reduction
                values[p] = val if val > 0.0 else 0.0
            pins[npins] = best
            npins += 1
            cur = best
    return pins_arr[:npins].copy(), bool(terminated)


def draw_lines(canvas_, x0_, y0_, x1_, y1_, int value):
    cdef u8[:, ::1] canvas = canvas_
    cdef const i64[::1] x0 = np.ascontiguousarray(x0_, dtype=np.int64)
    cdef const i64[::1] y0 = np.ascontiguousarray(y0_, dtype=np.int64)
    cdef const i64[::1] x1 = np.ascontiguousarray(x1_, dtype=np.int64)
    cdef const i64[::1] y1 = np.ascontiguousarray(y1_, dtype=np.int64)
    cdef i64 h = canvas.shape[0]
    cdef i64 w = canvas.shape[1]
    cdef Py_ssize_t c
    cdef i64 x, y, tx, ty, dx, dy, sx, sy, err, e2
    cdef u8 ink = value
    with nogil:
        for c in range(x0.shape[0]):
            x = x0[c]
            y = y0[c]
            tx = x1[c]
            ty = y1[c]
            dx = iabs(tx - x)
            dy = -iabs(ty - y)
            sx = 1 if x < tx else -1
            sy = 1 if y < ty else -1
            err = dx + dy
            while True:
                if 0 <= x < w and 0 <= y < h and canvas[y, x] > ink:
                    canvas[y, x] = ink
                if x == tx and y == ty:
                    break
                e2 = 2 * err
                if e2 >= dy:
                    err += dy
                    x += sx
                if e2 <= dx:
                    err += dx
                    y += sy
    return canvas_
