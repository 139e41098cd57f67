"""Hot-loop kernels, compiled when available.

The Cython module ``_core`` is used if it was built; otherwise the numpy
implementations in ``_fallback`` are used. Set ``THREADTONE_PURE_PYTHON=1``
to force the fallback.
"""
import os

if os.environ.get("THREADTONE_PURE_PYTHON"):
    from . import _fallback as _impl
else:
    try:
        from . import _core as _impl
    except ImportError:  # extension not built
        from . import _fallback as _impl

BACKEND = "compiled" if _impl.__name__.endswith("_core") else "python"

rasterize_chords = _impl.rasterize_chords
coverage_matvec = _impl.coverage_matvec
coverage_rmatvec = _impl.coverage_rmatvec
diffuse = _impl.diffuse
connected_walk = _impl.connected_walk
disconnected_select = _impl.disconnected_select
greedy_walk = _impl.greedy_walk
draw_lines = _impl.draw_lines

__all__ = [
    "BACKEND",
    "rasterize_chords",
    "coverage_matvec",
    "coverage_rmatvec",
    "diffuse",
    "connected_walk",
    "disconnected_select",
    "greedy_walk",
    "draw_lines",
]
