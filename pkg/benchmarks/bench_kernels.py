"""Time the compiled kernels against the numpy fallback at full scale.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from threadtone import _fallback
from threadtone.chords import build_chord_space
from threadtone.image import make_region
from threadtone.sampling import normalize_fitness

try:
    from threadtone import _core
except ImportError:
    _core = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(space, rng):
    pix = space.layout.pixel_positions
    i, j = space.pairs.T
    seg = (pix[i, 0], pix[i, 1], pix[j, 0], pix[j, 1])
    n, m = space.region.n, space.m
    f = rng.normal(size=m)
    r = rng.normal(size=n)
    fhat = normalize_fitness(rng.normal(0, 30, m), 30.0)
    ink = rng.integers(0, 256, n).astype(np.float64)
    out_seg = ((pix[i] * 2.5).astype(np.int64), (pix[j] * 2.5).astype(np.int64))

    def zeros():
        return np.zeros(m, np.uint8)

    return {
        f"rasterize {m} chords": lambda k: k.rasterize_chords(*seg, space.region.index_map),
        "A @ f": lambda k: k.coverage_matvec(space.indptr, space.indices, f, n),
        "A.T @ r": lambda k: k.coverage_rmatvec(space.indptr, space.indices, r),
        "connected walk, k=2000": lambda k: k.connected_walk(fhat.copy(), zeros(), space.pairs,
                                                             space.table, 0, 2000, 2),
        "disconnected, k=2000": lambda k: k.disconnected_select(fhat.copy(), zeros(), space.pairs,
                                                                space.table, 2000, 2),
        "greedy walk, k=500": lambda k: k.greedy_walk(ink.copy(), zeros(), space.indptr, space.indices,
                                                      space.table, 0, 500, 5, 15.0),
        "draw 5000 lines on 1001^2": lambda k: k.draw_lines(
            np.full((1001, 1001), 255, np.uint8), out_seg[0][:5000, 0], out_seg[0][:5000, 1],
            out_seg[1][:5000, 0], out_seg[1][:5000, 1], 0),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    space = build_chord_space(make_region("circle", 200), 300)
    rng = np.random.default_rng(0)
    print(f"{'kernel':<28}{'numpy (ms)':>12}{'compiled (ms)':>15}{'speedup':>9}")
    for name, run in cases(space, rng).items():
        slow = best_of(lambda: run(_fallback), args.repeat) * 1e3
        if _core is None:
            print(f"{name:<28}{slow:>12.1f}{'n/a':>15}{'':>9}")
            continue
        fast = best_of(lambda: run(_core), args.repeat) * 1e3
        print(f"{name:<28}{slow:>12.1f}{fast:>15.1f}{slow / fast:>8.1f}x")


if __name__ == "__main__":
    main()
