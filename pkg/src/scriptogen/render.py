"""Ink deposition: turn a sampled trajectory into a raster image.

A round nib stamps a disk at every pen-down sample; the disk shrinks
mildly with pen speed, which thins fast strokes the way a real pen does.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .kinematics import SampledTrajectory

DEFAULT_RESOLUTION = 10.0  # px per mm


@dataclass(frozen=True)
class InkModel:
    """Nib geometry.

    ``speed_thinning`` is the fraction by which the nib radius shrinks at
    the trajectory's maximum speed (0 = constant width).
    """

    nib_radius: float = 0.2
    speed_thinning: float = 0.3

    def __post_init__(self) -> None:
        if self.nib_radius <= 0.0:
            raise ValueError(f"nib_radius must be > 0, got {self.nib_radius}")
        if not (0.0 <= self.speed_thinning <= 1.0):
            raise ValueError(
                f"speed_thinning must be in [0, 1], got {self.speed_thinning}"
            )


@dataclass(frozen=True)
class RasterImage:
    """Binary ink raster with its physical placement.

    ``pixels[r, c]`` is True where there is ink; row 0 is the top of the
    image (largest y).  ``origin`` is the millimetre position of the
    bottom-left corner and ``resolution`` the px/mm scale.
    """

    pixels: np.ndarray
    origin: tuple[float, float]
    resolution: float

    @property
    def ink_count(self) -> int:
        return int(self.pixels.sum())


def render_offline(
    traj: SampledTrajectory,
    ink: InkModel = InkModel(),
    resolution: float = DEFAULT_RESOLUTION,
) -> RasterImage:
    """Stamp the trajectory's pen-down samples onto a white canvas.

    The canvas covers the pen-down bounding box plus one nib radius of
    margin.  A trajectory with no pen-down samples yields a minimal blank
    image.
    """
    if resolution <= 0.0:
        raise ValueError(f"resolution must be > 0, got {resolution}")
    down = np.asarray(traj.pen_down, dtype=bool)
    if traj.n_samples == 0 or not down.any():
        return RasterImage(np.zeros((1, 1), dtype=bool), (0.0, 0.0), resolution)
    xs = traj.x[down]
    ys = traj.y[down]
    speeds = traj.speed[down]
    margin = ink.nib_radius
    x0, y0 = xs.min() - margin, ys.min() - margin
    x1, y1 = xs.max() + margin, ys.max() + margin
    width = max(1, int(np.ceil((x1 - x0) * resolution)))
    height = max(1, int(np.ceil((y1 - y0) * resolution)))
    pixels = np.zeros((height, width), dtype=bool)

    v_max = speeds.max()
    if v_max > 0.0:
        radii = ink.nib_radius * (1.0 - ink.speed_thinning * speeds / v_max)
    else:
        radii = np.full(len(xs), ink.nib_radius)

    for x, y, r in zip(xs, ys, radii):
        col = (x - x0) * resolution
        row = (y1 - y) * resolution
        r_px = r * resolution
        c_lo = max(0, int(np.floor(col - r_px)))
        c_hi = min(width - 1, int(np.ceil(col + r_px)))
        r_lo = max(0, int(np.floor(row - r_px)))
        r_hi = min(height - 1, int(np.ceil(row + r_px)))
        rr, cc = np.mgrid[r_lo:r_hi + 1, c_lo:c_hi + 1]
        disk = (rr + 0.5 - row) ** 2 + (cc + 0.5 - col) ** 2 <= r_px**2
        pixels[r_lo:r_hi + 1, c_lo:c_hi + 1] |= disk
    return RasterImage(pixels, (float(x0), float(y0)), resolution)


def save_png(image: RasterImage | np.ndarray, path: str | Path) -> None:
    """Write the raster as a lossless grayscale PNG (ink black on white).

    The file appears atomically: content goes to a temporary sibling that
    is renamed into place.
    """
    pixels = image.pixels if isinstance(image, RasterImage) else np.asarray(image)
    gray = np.where(pixels, 0, 255).astype(np.uint8)
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        Image.fromarray(gray, mode="L").save(tmp, format="PNG")
        os.replace(tmp, path)
    finally:
        tmp.unlink(missing_ok=True)


def load_png(path: str | Path) -> np.ndarray:
    """Read a PNG back into a binary ink mask (gray < 128 counts as ink)."""
    with Image.open(path) as img:
        gray = np.asarray(img.convert("L"))
    return gray < 128
