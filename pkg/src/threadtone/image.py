"""Image loading, cropping and per-pixel quantities.

Gray images are plain 2D ``uint8`` numpy arrays (rows = y, columns = x).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)
SHAPES = ("circle", "square")


def to_gray(pixels: np.ndarray) -> np.ndarray:
    """Rec. 601 luminance, rounded to 8 bits. Gray input passes through."""
    arr = np.asarray(pixels)
    if arr.ndim == 2:
        return np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    if arr.ndim != 3 or arr.shape[2] < 3:
        raise ValueError(f"expected HxW or HxWx3 pixels, got shape {arr.shape}")
    rgb = arr[..., :3].astype(np.float64)
    if arr.shape[2] == 4:
        # flatten transparency onto a white background
        alpha = arr[..., 3:4].astype(np.float64) / 255.0
        rgb = rgb * alpha + 255.0 * (1.0 - alpha)
    gray = rgb @ np.asarray(LUMA_WEIGHTS)
    return np.clip(np.rint(gray), 0, 255).astype(np.uint8)


def load_grayscale(path) -> np.ndarray:
    """Read a raster file as an 8-bit gray image."""
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("L", "LA"):
                return np.asarray(im.getchannel(0), dtype=np.uint8).copy()
            if mode == "1":
                return np.asarray(im.convert("L"), dtype=np.uint8).copy()
            if mode in ("I", "I;16", "I;16B", "I;16L", "F"):
                arr = np.asarray(im, dtype=np.float64)
                peak = 65535.0 if arr.max() > 255 else 255.0
                return to_gray(arr * (255.0 / peak))
            return to_gray(np.asarray(im.convert("RGBA")))
    except FileNotFoundError:
        raise
    except UnidentifiedImageError as exc:
        raise ValueError(f"unsupported or corrupt image file: {path}") from exc
    except OSError as exc:
        raise ValueError(f"cannot read image {path}: {exc}") from exc


def save_image(img: np.ndarray, path) -> None:
    """Write a gray image; the format follows the file extension (PNG, PGM, ...)."""
    Image.fromarray(np.asarray(img, dtype=np.uint8), mode="L").save(path)


@dataclass(frozen=True)
class Region:
    """Painting region inside a ``(2*radius+1)``-square crop.

    ``index_map`` holds the dense pixel index of every inside pixel and -1
    elsewhere; ``flat`` lists the row-major positions of inside pixels, so
    ``index_map.ravel()[flat] == arange(n)``.
    """

    shape: str
    radius: int
    origin: tuple[int, int]
    inside: np.ndarray
    index_map: np.ndarray
    flat: np.ndarray

    @property
    def size(self) -> int:
        return 2 * self.radius + 1

    @property
    def center(self) -> tuple[int, int]:
        return (self.radius, self.radius)

    @property
    def n(self) -> int:
        return len(self.flat)

    def gather(self, img: np.ndarray) -> np.ndarray:
        """Values of ``img`` at inside pixels, in pixel-index order."""
        return np.asarray(img, dtype=np.float64).ravel()[self.flat]

    def scatter(self, values, fill=0.0) -> np.ndarray:
        """Inverse of :meth:`gather`: a full crop-sized image."""
        out = np.full(self.size * self.size, fill, dtype=np.float64)
        out[self.flat] = values
        return out.reshape(self.size, self.size)


def make_region(shape: str, radius: int, origin=(0, 0)) -> Region:
    if shape not in SHAPES:
        raise ValueError(f"shape must be one of {SHAPES}, got {shape!r}")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    d = np.arange(-radius, radius + 1)
    if shape == "circle":
        inside = d[:, None] ** 2 + d[None, :] ** 2 <= radius * radius
    else:
        inside = np.ones((d.size, d.size), dtype=bool)
    flat = np.flatnonzero(inside)
    index_map = np.full(inside.shape, -1, dtype=np.int64)
    index_map.ravel()[flat] = np.arange(flat.size)
    inside.setflags(write=False)
    index_map.setflags(write=False)
    flat.setflags(write=False)
    return Region(shape, int(radius), tuple(origin), inside, index_map, flat)


def crop_region(img: np.ndarray, shape: str = "circle", center=None, radius=None):
    """Cut the square around ``center`` and describe the region inside it.

    ``center`` is ``(x, y)`` in ``img`` pixels. Defaults give the largest
    centred region. Returns ``(crop, region)``.
    """
    img = np.asarray(img)
    h, w = img.shape
    if center is None:
        center = ((w - 1) // 2, (h - 1) // 2)
    cx, cy = int(center[0]), int(center[1])
    if radius is None:
        radius = min(cx, cy, w - 1 - cx, h - 1 - cy)
    radius = int(radius)
    if radius < 0 or cx - radius < 0 or cy - radius < 0 or cx + radius >= w or cy + radius >= h:
        raise ValueError(
            f"region centre ({cx}, {cy}) radius {radius} exceeds image bounds {w}x{h}"
        )
    crop = img[cy - radius: cy + radius + 1, cx - radius: cx + radius + 1].copy()
    return crop, make_region(shape, radius, origin=(cx - radius, cy - radius))


def invert(img: np.ndarray) -> np.ndarray:
    return (255 - np.asarray(img, dtype=np.uint8)).astype(np.uint8)


@dataclass(frozen=True)
class GradientField:
    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray


def sobel(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3x3 Sobel derivatives along x (columns) and y (rows), edge-replicated."""
    a = np.pad(np.asarray(img, dtype=np.float64), 1, mode="edge")
    top, mid, bot = a[:-2], a[1:-1], a[2:]
    gx = (top[:, 2:] + 2 * mid[:, 2:] + bot[:, 2:]) - (top[:, :-2] + 2 * mid[:, :-2] + bot[:, :-2])
    left, centre, right = a[:, :-2], a[:, 1:-1], a[:, 2:]
    gy = (left[2:] + 2 * centre[2:] + right[2:]) - (left[:-2] + 2 * centre[:-2] + right[:-2])
    return gx, gy


def gradient_field(img: np.ndarray, region: Region | None = None) -> GradientField:
    """Sobel gradients with magnitude rescaled so its maximum becomes 255.

    The maximum is taken over ``region`` when given, else the whole image.
    """
    img = np.asarray(img)
    if img.ndim != 2 or min(img.shape) < 3:
        raise ValueError(f"gradient needs an image of at least 3x3, got {img.shape}")
    gx, gy = sobel(img)
    mag = np.hypot(gx, gy)
    peak = mag.ravel()[region.flat].max() if region is not None else mag.max()
    if peak > 0:
        mag = np.minimum(mag / peak * 255.0, 255.0)
    else:
        mag = np.zeros_like(mag)
    return GradientField(gx, gy, mag)


def build_target(inverted: np.ndarray, grad: GradientField, region: Region, alpha: float) -> np.ndarray:
    """Per-pixel target ``(1 - alpha) * ink + alpha * |gradient|``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    ink = region.gather(inverted)
    if alpha == 0.0:
        return ink
    return (1.0 - alpha) * ink + alpha * region.gather(grad.magnitude)


def build_pixel_weights(region: Region, mask: np.ndarray | None = None,
                        important: float = 2.0, normal: float = 1.0) -> np.ndarray:
    """Weight ``important`` where the mask is bright (> 127), else ``normal``."""
    if mask is None:
        return np.full(region.n, normal)
    mask = np.asarray(mask)
    if mask.shape != region.inside.shape:
        raise ValueError(
            f"mask is {mask.shape[1]}x{mask.shape[0]}, region crop is {region.size}x{region.size}"
        )
    return np.where(region.gather(mask) > 127, important, normal)
