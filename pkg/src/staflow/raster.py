"""Grayscale frame I/O and the raster primitives shared by both flow solvers.

Frames are plain 2D float64 arrays, row-major, with intensities kept as real
values in [0, 255]; nothing re-quantizes between pipeline stages.
"""

import math
import os
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatch, InvalidScale, Malformed, TooSmall, UnsupportedFormat

MIN_PYRAMID_DIM = 16


@dataclass(frozen=True)
class Pyramid:
    """Coarse-to-fine image stack; levels[0] is the full-resolution frame."""

    levels: list
    scale: float

    def __len__(self):
        return len(self.levels)


def load_pgm(path):
    """Read a binary 8-bit PGM (magic P5, maxval 255) into a float frame.

    Raises UnsupportedFormat for the wrong magic or maxval, Malformed for a
    truncated header or payload, FileNotFoundError for a missing file.
    """
    path = os.fspath(path)
    with open(path, "rb") as fh:
        raw = fh.read()

    if raw[:2] != b"P5":
        raise UnsupportedFormat(f"{path}: expected binary PGM magic 'P5', got {raw[:2]!r}")

    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and raw[pos : pos + 1].isdigit():
            pos += 1
        if pos == start:
            raise Malformed(f"{path}: truncated or non-numeric PGM header")
        fields.append(int(raw[start:pos]))
    if pos >= len(raw) or not raw[pos : pos + 1].isspace():
        raise Malformed(f"{path}: PGM header not terminated by whitespace")
    pos += 1

    width, height, maxval = fields
    if maxval != 255:
        raise UnsupportedFormat(f"{path}: only maxval 255 is supported, got {maxval}")
    if width < 1 or height < 1:
        raise Malformed(f"{path}: invalid dimensions {width}x{height}")

    payload = raw[pos : pos + width * height]
    if len(payload) < width * height:
        raise Malformed(
            f"{path}: payload holds {len(payload)} bytes, header promises {width * height}"
        )
    frame = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return frame.astype(np.float64)


def save_pgm(frame, path):
    """Write a frame as binary PGM; intensities are rounded and clipped to [0, 255]."""
    frame = np.asarray(frame)
    data = np.clip(np.rint(frame), 0, 255).astype(np.uint8)
    height, width = data.shape
    with open(os.fspath(path), "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def gaussian_kernel(sigma):
    """Normalized 1D Gaussian with half-width ceil(3*sigma)."""
    radius = int(math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_smooth(frame, sigma):
    """Separable Gaussian smoothing with replicated (clamped) borders.

    sigma = 0 returns the input unchanged.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    frame = np.asarray(frame, dtype=np.float64)
    if sigma == 0:
        return frame
    k = gaussian_kernel(sigma)
    out = ndimage.correlate1d(frame, k, axis=0, mode="nearest")
    return ndimage.correlate1d(out, k, axis=1, mode="nearest")


def central_gradient(frame):
    """(gx, gy) via central differences, one-sided at the borders."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.shape[0] < 3 or frame.shape[1] < 3:
        raise TooSmall(f"gradient needs at least 3x3 pixels, got {frame.shape}")
    gy, gx = np.gradient(frame)
    return gx, gy


def resize_bilinear(frame, width, height):
    """Resample to width x height; source coords follow (i + 0.5)/zoom - 0.5."""
    frame = np.asarray(frame, dtype=np.float64)
    src_h, src_w = frame.shape
    rows = (np.arange(height) + 0.5) * (src_h / height) - 0.5
    cols = (np.arange(width) + 0.5) * (src_w / width) - 0.5
    grid_r, grid_c = np.meshgrid(rows, cols, indexing="ij")
    return ndimage.map_coordinates(frame, [grid_r, grid_c], order=1, mode="nearest")


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def build_pyramid(frame, levels, scale):
    """Smooth-then-subsample pyramid, clipped so the smallest dimension stays >= 16.

    Level L has dimensions round(level-0 dimensions * scale**L); the
    anti-aliasing pre-smooth uses sigma = 0.8*sqrt(1/scale**2 - 1).
    """
    if not 0.0 < scale < 1.0:
        raise InvalidScale(f"scale must lie in (0, 1), got {scale}")
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    frame = np.asarray(frame, dtype=np.float64)
    height, width = frame.shape

    sigma = 0.8 * math.sqrt(1.0 / (scale * scale) - 1.0)
    stack = [frame]
    for lev in range(1, levels):
        w = _round_half_up(width * scale**lev)
        h = _round_half_up(height * scale**lev)
        if min(w, h) < MIN_PYRAMID_DIM:
            break
        smoothed = gaussian_smooth(stack[-1], sigma)
        stack.append(resize_bilinear(smoothed, w, h))
    return Pyramid(levels=stack, scale=scale)


def _flow_components(flow):
    if hasattr(flow, "u"):
        return np.asarray(flow.u, dtype=np.float64), np.asarray(flow.v, dtype=np.float64)
    u, v = flow
    return np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64)


def warp_bilinear(frame, flow):
    """output(x, y) = frame sampled at (x + u, y + v), bilinear, clamped at borders.

    `flow` is anything with `u`/`v` attributes or a (u, v) pair of arrays.
    """
    frame = np.asarray(frame, dtype=np.float64)
    u, v = _flow_components(flow)
    if u.shape != frame.shape or v.shape != frame.shape:
        raise DimensionMismatch(f"flow {u.shape} does not match frame {frame.shape}")
    rows, cols = np.meshgrid(
        np.arange(frame.shape[0], dtype=np.float64),
        np.arange(frame.shape[1], dtype=np.float64),
        indexing="ij",
    )
    return ndimage.map_coordinates(frame, [rows + v, cols + u], order=1, mode="nearest")
