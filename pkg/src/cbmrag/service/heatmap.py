"""Saliency-grid rendering: half-pixel-center bilinear upsampling to 8-bit
grayscale PNG. Pixel values are floor(255*v + 0.5) (round half up); the UI
applies any color ramp client-side."""

import io

import numpy as np
from PIL import Image

MAX_DIMENSION = 4096


def upsample_bilinear(grid: np.ndarray, width: int, height: int) -> np.ndarray:
    """Resample a [0,1] grid to (height, width) uint8 pixels.

    Output pixel (x, y) samples grid coordinate
    ((x+0.5)*grid_w/width - 0.5, (y+0.5)*grid_h/height - 0.5), clamped to the
    grid, with bilinear interpolation between the four surrounding cells.
    """
    if width < 1 or height < 1 or width > MAX_DIMENSION or height > MAX_DIMENSION:
        raise ValueError(f"width and height must be in [1, {MAX_DIMENSION}]")
    grid = np.asarray(grid, dtype=np.float64)
    grid_h, grid_w = grid.shape
    xs = np.clip((np.arange(width) + 0.5) * grid_w / width - 0.5, 0.0, grid_w - 1.0)
    ys = np.clip((np.arange(height) + 0.5) * grid_h / height - 0.5, 0.0, grid_h - 1.0)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, grid_w - 1)
    y1 = np.minimum(y0 + 1, grid_h - 1)
    fx = xs - x0
    fy = ys - y0
    top = grid[np.ix_(y0, x0)] * (1.0 - fx) + grid[np.ix_(y0, x1)] * fx
    bottom = grid[np.ix_(y1, x0)] * (1.0 - fx) + grid[np.ix_(y1, x1)] * fx
    values = top * (1.0 - fy)[:, np.newaxis] + bottom * fy[:, np.newaxis]
    return np.floor(255.0 * values + 0.5).astype(np.uint8)


def render_png(grid: np.ndarray, width: int, height: int) -> bytes:
    pixels = upsample_bilinear(grid, width, height)
    buffer = io.BytesIO()
    Image.fromarray(pixels, mode="L").save(buffer, format="PNG")
    return buffer.getvalue()
