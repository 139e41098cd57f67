"""SSIM scoring of paintings and the method-comparison report."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .image import Region
from .pipeline import PaintConfig, Problem, build_problem, region_view, sample
from .sampling import estimate_chord_count
from .solver import solve_fitness

K1, K2 = 0.01, 0.03
WINDOW, WINDOW_SIGMA = 11, 1.5
EVAL_SIZE = 201
BLUR_SIGMA = 2.0
METHODS = ("greedy", "connected", "disconnected")


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, g: np.ndarray) -> np.ndarray:
    view = np.lib.stride_tricks.sliding_window_view
    rows = view(img, len(g), axis=1) @ g
    return view(rows, len(g), axis=0) @ g


def ssim(a, b, data_range: float = 255.0) -> float:
    """Mean SSIM over all 11x11 Gaussian (sigma 1.5) windows fully inside the image."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image sizes differ: {a.shape} vs {b.shape}")
    if min(a.shape) < WINDOW:
        raise ValueError(f"images must be at least {WINDOW}x{WINDOW}")
    g = _gaussian_window(WINDOW, WINDOW_SIGMA)
    c1 = (K1 * data_range) ** 2
    c2 = (K2 * data_range) ** 2
    mu_a = _filter_valid(a, g)
    mu_b = _filter_valid(b, g)
    var_a = _filter_valid(a * a, g) - mu_a * mu_a
    var_b = _filter_valid(b * b, g) - mu_b * mu_b
    cov = _filter_valid(a * b, g) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def _area_weights(n_in: int, n_out: int) -> np.ndarray:
    edges = np.arange(n_out + 1) * (n_in / n_out)
    lo = np.arange(n_in)
    overlap = np.clip(np.minimum(edges[1:, None], lo[None, :] + 1) - np.maximum(edges[:-1, None], lo[None, :]), 0, None)
    return overlap / overlap.sum(axis=1, keepdims=True)


def resize_area(img, size: int) -> np.ndarray:
    """Area-average resample to ``size x size`` (exact box means for integer ratios)."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    return _area_weights(h, size) @ img @ _area_weights(w, size).T


def gaussian_blur(img, sigma: float = BLUR_SIGMA) -> np.ndarray:
    return ndimage.gaussian_filter(np.asarray(img, dtype=np.float64), sigma, mode="nearest", truncate=3.0)


def evaluate_pair(source, painting, blur: bool = False, size: int = EVAL_SIZE,
                  sigma: float = BLUR_SIGMA) -> float:
    a = resize_area(source, size)
    b = resize_area(painting, size)
    if blur:
        a = gaussian_blur(a, sigma)
        b = gaussian_blur(b, sigma)
    return ssim(a, b)


@dataclass
class ReportRow:
    name: str
    method: str
    ssim_original: float
    ssim_blurred: float
    chord_count: int
    early_termination: bool


@dataclass
class SSIMReport:
    rows: list[ReportRow] = field(default_factory=list)

    def names(self) -> list[str]:
        return sorted({r.name for r in self.rows})

    def wins(self, column: str = "ssim_original") -> dict[str, int]:
        """Per method, the number of images where it scores highest (first listed wins ties)."""
        counts = {m: 0 for m in METHODS}
        for name in self.names():
            rows = {r.method: r for r in self.rows if r.name == name}
            best = max((m for m in METHODS if m in rows), key=lambda m: getattr(rows[m], column))
            counts[best] += 1
        return counts

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["image", "method", "ssim_original", "ssim_blurred", "chords", "early_termination"])
        for r in sorted(self.rows, key=lambda r: (r.name, METHODS.index(r.method))):
            out.writerow([r.name, r.method, f"{r.ssim_original:.6f}", f"{r.ssim_blurred:.6f}",
                          r.chord_count, int(r.early_termination)])
        return buf.getvalue()

    def to_table(self) -> str:
        head = f"{'image':<20}" + "".join(f"{m[:12]:>13}" for m in METHODS) * 2
        lines = [f"{'':<20}{'SSIM (original)':^39}{'SSIM (blurred)':^39}", head]
        for name in self.names():
            rows = {r.method: r for r in self.rows if r.name == name}
            cells = []
            for col in ("ssim_original", "ssim_blurred"):
                for m in METHODS:
                    r = rows.get(m)
                    mark = "*" if m == "greedy" and r is not None and r.early_termination else " "
                    cells.append(f"{getattr(r, col):12.3f}{mark}" if r else f"{'-':>13}")
            lines.append(f"{name[:20]:<20}" + "".join(cells))
        wins_o, wins_b = self.wins("ssim_original"), self.wins("ssim_blurred")
        lines.append(f"{'wins':<20}" + "".join(f"{wins_o[m]:>13}" for m in METHODS)
                     + "".join(f"{wins_b[m]:>13}" for m in METHODS))
        if any(r.early_termination for r in self.rows):
            lines.append("* greedy baseline stopped before spending its chord budget")
        return "\n".join(lines)


def compare_methods(name: str, crop, region: Region, config: PaintConfig = PaintConfig(),
                    k: int | None = None, start_pin: int = 0, problem: Problem | None = None) -> list[ReportRow]:
    """Score all three samplers on one image at a shared chord budget."""
    if problem is None:
        problem = build_problem(crop, region, config)
    if k is None:
        k = estimate_chord_count(crop, region)
    fitness = solve_fitness(problem.system, config.tol, config.max_iter)
    source = region_view(crop, region)
    rows = []
    for method in METHODS:
        p = sample(problem, method, k, config, fitness, start_pin)
        rows.append(ReportRow(name, method, evaluate_pair(source, p.image, blur=False),
                              evaluate_pair(source, p.image, blur=True), p.chord_count, p.terminated))
    return rows
