"""Weighted, regularized least squares for per-chord fitness.

Minimizes ``||W (A f - b)||^2 + ||V f||^2`` where ``A`` is the binary
pixel-by-chord coverage matrix. ``A`` is never formed densely; products go
through the coverage kernels.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .chords import ChordSpace
from .image import Region

log = logging.getLogger(__name__)


def chord_regularizer(spans, consistencies, pin_count: int, beta: float, gamma: float) -> np.ndarray:
    """Per-chord penalty ``beta*exp(-span/P) + gamma*d/max(d)``.

    When every consistency is zero the direction term is dropped.
    """
    if beta < 0 or gamma < 0:
        raise ValueError("beta and gamma must be non-negative")
    spans = np.asarray(spans, dtype=np.float64)
    d = np.asarray(consistencies, dtype=np.float64)
    if spans.size == 0:
        raise ValueError("no chords to regularize")
    v = beta * np.exp(-spans / pin_count)
    peak = d.max() if d.size else 0.0
    if peak > 0:
        v = v + gamma * d / peak
    return v


@dataclass(frozen=True)
class SparseSystem:
    n: int
    m: int
    indptr: np.ndarray
    indices: np.ndarray
    b: np.ndarray
    w: np.ndarray
    v: np.ndarray

    def matvec(self, f) -> np.ndarray:
        return kernels.coverage_matvec(self.indptr, self.indices, f, self.n)

    def rmatvec(self, r) -> np.ndarray:
        return kernels.coverage_rmatvec(self.indptr, self.indices, r)

    def normal_matvec(self, f) -> np.ndarray:
        """``(A^T W^2 A + V^2) f``"""
        return self.rmatvec(self.w ** 2 * self.matvec(f)) + self.v ** 2 * f

    def normal_rhs(self) -> np.ndarray:
        return self.rmatvec(self.w ** 2 * self.b)

    def normal_diagonal(self) -> np.ndarray:
        return self.rmatvec(self.w ** 2) + self.v ** 2

    def dense(self) -> np.ndarray:
        """Dense ``A`` (n x m). Only for small test systems."""
        a = np.zeros((self.n, self.m))
        cols = np.repeat(np.arange(self.m), np.diff(self.indptr))
        a[self.indices, cols] = 1.0
        return a


def assemble_system(space_or_coverage, b, w, v) -> SparseSystem:
    """Bundle coverage with target, pixel weights and chord penalties.

    The first argument is a :class:`ChordSpace` or an ``(indptr, indices, n)``
    triple.
    """
    if isinstance(space_or_coverage, ChordSpace):
        indptr, indices, n = space_or_coverage.indptr, space_or_coverage.indices, space_or_coverage.region.n
    else:
        indptr, indices, n = space_or_coverage
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    m = len(indptr) - 1
    if m <= 0:
        raise ValueError("system has no chords")
    b = np.asarray(b, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if b.shape != (n,) or w.shape != (n,):
        raise ValueError(f"target/weights must have length {n}, got {b.shape} and {w.shape}")
    if v.shape != (m,):
        raise ValueError(f"chord penalties must have length {m}, got {v.shape}")
    if indices.size and (indices.min() < 0 or indices.max() >= n):
        raise ValueError("coverage refers to pixels outside the region")
    if (v < 0).any():
        raise ValueError("chord penalties must be non-negative")
    return SparseSystem(n, m, indptr, indices, b, w, v)


def objective(system: SparseSystem, f) -> float:
    f = np.asarray(f, dtype=np.float64)
    res = system.w * (system.matvec(f) - system.b)
    return float(res @ res + (system.v * f) @ (system.v * f))


def objective_gradient(system: SparseSystem, f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    res = system.w ** 2 * (system.matvec(f) - system.b)
    return 2.0 * system.rmatvec(res) + 2.0 * system.v ** 2 * f


@dataclass(frozen=True)
class FitnessResult:
    f: np.ndarray
    iterations: int
    residual: float
    converged: bool


def solve_fitness(system: SparseSystem, tol: float = 1e-6, max_iter: int = 500) -> FitnessResult:
    """Jacobi-preconditioned conjugate gradient on the normal equations, from f = 0.

    Stops once ``||rhs - N f|| / ||rhs|| <= tol`` or after ``max_iter``
    iterations. Raises ``FloatingPointError`` if the iteration produces a
    non-finite value.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    rhs = system.normal_rhs()
    rhs_norm = float(np.linalg.norm(rhs))
    f = np.zeros(system.m)
    if rhs_norm == 0.0:
        return FitnessResult(f, 0, 0.0, True)

    diag = system.normal_diagonal()
    inv_diag = np.where(diag > 0, 1.0 / np.where(diag > 0, diag, 1.0), 1.0)
    r = rhs.copy()
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    rel = 1.0
    it = 0
    while it < max_iter:
        it += 1
        q = system.normal_matvec(p)
        pq = float(p @ q)
        if pq <= 0.0:
            # zero curvature: the residual already lies outside the range
            break
        step = rz / pq
        f += step * p
        r -= step * q
        rel = float(np.linalg.norm(r)) / rhs_norm
        if not np.isfinite(rel):
            raise FloatingPointError(f"non-finite residual at iteration {it}; system is ill-conditioned")
        if rel <= tol:
            break
        z = inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new

    if not np.all(np.isfinite(f)):
        raise FloatingPointError("non-finite fitness values")
    true_rel = float(np.linalg.norm(rhs - system.normal_matvec(f))) / rhs_norm
    log.debug("fitness solve: %d iterations, relative residual %.3e", it, true_rel)
    return FitnessResult(f, it, true_rel, true_rel <= tol)


def reconstruct(system: SparseSystem, f, region: Region) -> tuple[np.ndarray, np.ndarray]:
    """Ink image ``A f`` and an error map ``5 * |A f - b|``, both clamped to 8 bits."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (system.m,):
        raise ValueError(f"fitness must have length {system.m}")
    recon = system.matvec(f)
    err = 5.0 * np.abs(recon - system.b)
    to8 = lambda x: np.clip(np.rint(region.scatter(x)), 0, 255).astype(np.uint8)  # noqa: E731
    return to8(recon), to8(err)


def write_fitness_table(path, space: ChordSpace, result: FitnessResult) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# iterations {result.iterations} residual {result.residual:.6e} "
                 f"converged {int(result.converged)}\n")
        fh.write("chord\tpin_i\tpin_j\tfitness\n")
        for cid, ((i, j), val) in enumerate(zip(space.pairs, result.f)):
            fh.write(f"{cid}\t{i}\t{j}\t{val:.9g}\n")
