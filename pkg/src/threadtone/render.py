"""Drawing chords and exporting the winding sequence."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .chords import PinLayout


@dataclass(frozen=True)
class RenderConfig:
    output_size: int = 1001
    line_value: int = 0
    background: int = 255

    def __post_init__(self):
        if self.output_size < 3 or self.output_size % 2 == 0:
            raise ValueError("output_size must be odd and at least 3")
        if not 0 <= self.line_value < self.background <= 255:
            raise ValueError("need 0 <= line_value < background <= 255")


def output_pin_positions(layout: PinLayout, config: RenderConfig) -> np.ndarray:
    """Pin pixels on the output canvas; the region fills the canvas."""
    half = (config.output_size - 1) / 2.0
    scale = half / layout.radius if layout.radius > 0 else 1.0
    centre = np.asarray(layout.center)
    return np.floor((layout.positions - centre) * scale + half + 0.5).astype(np.int64)


def render_chords(pairs, layout: PinLayout, config: RenderConfig = RenderConfig()) -> np.ndarray:
    """Draw each ``(i, j)`` pin pair as a 1-pixel line on a blank canvas.

    Lines are walked from the lower pin and composited with ``min``, so the
    result ignores drawing order and repeats.
    """
    canvas = np.full((config.output_size, config.output_size), config.background, dtype=np.uint8)
    pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if len(pairs) == 0:
        return canvas
    lo = pairs.min(axis=1)
    hi = pairs.max(axis=1)
    pos = output_pin_positions(layout, config)
    return kernels.draw_lines(canvas, pos[lo, 0], pos[lo, 1], pos[hi, 0], pos[hi, 1],
                              int(config.line_value))


def render_pins(pins, layout: PinLayout, config: RenderConfig = RenderConfig()) -> np.ndarray:
    pins = np.asarray(pins, dtype=np.int64)
    return render_chords(np.column_stack([pins[:-1], pins[1:]]), layout, config)


def export_sequence(pins, path, pin_count: int, shape: str) -> None:
    """Write ``P <count> <shape>`` followed by one pin index per line."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(f"P {pin_count} {shape}\n")
        for p in pins:
            fh.write(f"{int(p)}\n")


def read_sequence(path) -> tuple[int, str, list[int]]:
    with open(path, encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 3 or header[0] != "P":
            raise ValueError(f"{path}: bad sequence header {header!r}")
        pins = [int(line) for line in fh if line.strip()]
    return int(header[1]), header[2], pins
