"""End-to-end painting: crop -> fitness solve -> sampling -> render."""
from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field

import numpy as np

from .chords import ChordSpace, build_chord_space, edge_consistencies
from .image import (GradientField, Region, build_pixel_weights, build_target, gradient_field,
                    invert, make_region)
from .render import RenderConfig, render_chords, render_pins
from .sampling import (estimate_chord_count, normalize_fitness, sample_connected,
                       sample_disconnected, sample_greedy_baseline)
from .solver import (FitnessResult, SparseSystem, assemble_system, chord_regularizer,
                     solve_fitness)

log = logging.getLogger(__name__)

SAMPLERS = ("connected", "disconnected", "greedy")


@dataclass(frozen=True)
class PaintConfig:
    shape: str = "circle"
    pins: int = 300
    alpha: float = 0.0
    beta: float = 5.0
    gamma: float = 10.0
    temperature: float = 30.0
    eps: int = 2
    s_min: int = 1
    min_loop_span: int = 5
    reduction: float = 15.0
    tol: float = 1e-6
    max_iter: int = 500
    output_size: int = 1001

    def __post_init__(self):
        checks = [
            (self.shape in ("circle", "square"), f"shape must be circle or square, got {self.shape!r}"),
            (self.pins >= 3, "pins must be at least 3"),
            (0.0 <= self.alpha <= 1.0, f"alpha must lie in [0, 1], got {self.alpha}"),
            (self.beta >= 0 and self.gamma >= 0, "beta and gamma must be non-negative"),
            (self.temperature > 0, "temperature must be positive"),
            (self.eps >= 0, "eps must be non-negative"),
            (self.s_min >= 1, "s_min must be at least 1"),
            (self.min_loop_span >= 1, "min_loop_span must be at least 1"),
            (self.reduction >= 0, "reduction must be non-negative"),
            (self.tol > 0, "tol must be positive"),
            (self.max_iter >= 1, "max_iter must be at least 1"),
            (self.output_size >= 3 and self.output_size % 2 == 1, "output size must be odd and >= 3"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    @property
    def render(self) -> RenderConfig:
        return RenderConfig(output_size=self.output_size)


@functools.lru_cache(maxsize=4)
def chord_space_for(shape: str, radius: int, pins: int, s_min: int = 1) -> ChordSpace:
    """Chord geometry depends only on these four values, so it is shared."""
    return build_chord_space(make_region(shape, radius), pins, s_min)


@dataclass
class Problem:
    crop: np.ndarray
    region: Region
    space: ChordSpace
    grad: GradientField
    system: SparseSystem


def build_problem(crop, region: Region, config: PaintConfig, mask=None) -> Problem:
    space = chord_space_for(region.shape, region.radius, config.pins, config.s_min)
    grad = gradient_field(crop, region)
    target = build_target(invert(crop), grad, region, config.alpha)
    weights = build_pixel_weights(region, mask)
    penalties = chord_regularizer(space.spans, edge_consistencies(space, grad), config.pins,
                                  config.beta, config.gamma)
    return Problem(crop, region, space, grad, assemble_system(space, target, weights, penalties))


@dataclass
class Painting:
    sampler: str
    k: int
    image: np.ndarray
    pins: np.ndarray | None = None
    chords: np.ndarray | None = None  # chord ids, disconnected sampler only
    terminated: bool = False
    extras: dict = field(default_factory=dict)

    @property
    def chord_count(self) -> int:
        if self.chords is not None:
            return len(self.chords)
        return len(self.pins) - 1


def sample(problem: Problem, sampler: str, k: int, config: PaintConfig,
           fitness: FitnessResult | None = None, start_pin: int = 0) -> Painting:
    """Run one sampler and render its chords."""
    space = problem.space
    if sampler == "greedy":
        res = sample_greedy_baseline(invert(problem.crop), space, k, start_pin,
                                     config.min_loop_span, config.reduction)
        img = render_pins(res.pins, space.layout, config.render)
        return Painting(sampler, k, img, pins=res.pins, terminated=res.terminated)
    if sampler not in SAMPLERS:
        raise ValueError(f"unknown sampler {sampler!r}")
    if fitness is None:
        fitness = solve_fitness(problem.system, config.tol, config.max_iter)
    fhat = normalize_fitness(fitness.f, config.temperature)
    if sampler == "connected":
        pins = sample_connected(fhat, space, k, start_pin, config.eps)
        return Painting(sampler, k, render_pins(pins, space.layout, config.render), pins=pins)
    ids = sample_disconnected(fhat, space, k, config.eps)
    img = render_chords(space.pairs[ids], space.layout, config.render)
    return Painting(sampler, k, img, chords=ids)


def paint(crop, region: Region, config: PaintConfig = PaintConfig(), sampler: str = "connected",
          k: int | None = None, start_pin: int = 0, mask=None) -> tuple[Painting, Problem, FitnessResult | None]:
    problem = build_problem(crop, region, config, mask)
    if k is None:
        k = estimate_chord_count(crop, region)
    fitness = None
    if sampler != "greedy":
        fitness = solve_fitness(problem.system, config.tol, config.max_iter)
        log.info("solved %d chords in %d iterations (residual %.2e)",
                 problem.space.m, fitness.iterations, fitness.residual)
    return sample(problem, sampler, k, config, fitness, start_pin), problem, fitness


def region_view(crop, region: Region, background: int = 255) -> np.ndarray:
    """The crop with pixels outside the region replaced by the canvas colour."""
    out = np.asarray(crop, dtype=np.uint8).copy()
    out[~region.inside] = background
    return out
