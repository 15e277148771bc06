"""Flow-field visualization: direction maps to hue on the standard 55-entry
color wheel, magnitude to saturation; zero flow renders white.
"""

import os
import warnings

import numpy as np

from .errors import Malformed


def color_wheel():
    """(55, 3) base colors in [0, 1], hue order red->yellow->green->cyan->blue->magenta.

    Sector lengths: RY 15, YG 6, GC 4, CB 11, BM 13, MR 6.
    """
    ry, yg, gc, cb, bm, mr = 15, 6, 4, 11, 13, 6
    wheel = np.zeros((ry + yg + gc + cb + bm + mr, 3))
    col = 0
    wheel[col : col + ry, 0] = 1.0
    wheel[col : col + ry, 1] = np.arange(ry) / ry
    col += ry
    wheel[col : col + yg, 0] = 1.0 - np.arange(yg) / yg
    wheel[col : col + yg, 1] = 1.0
    col += yg
    wheel[col : col + gc, 1] = 1.0
    wheel[col : col + gc, 2] = np.arange(gc) / gc
    col += gc
    wheel[col : col + cb, 1] = 1.0 - np.arange(cb) / cb
    wheel[col : col + cb, 2] = 1.0
    col += cb
    wheel[col : col + bm, 2] = 1.0
    wheel[col : col + bm, 0] = np.arange(bm) / bm
    col += bm
    wheel[col : col + mr, 2] = 1.0 - np.arange(mr) / mr
    wheel[col : col + mr, 0] = 1.0
    return wheel


def flow_to_color(flow, max_magnitude=None):
    """Render a flow field as an RGB uint8 image.

    Saturation is magnitude / max_magnitude (the field's own maximum by
    default; a field with max < 1e-9 renders entirely as the zero color,
    white). Non-finite vectors render black and are reported in one warning.
    """
    u = np.asarray(flow.u, dtype=np.float64)
    v = np.asarray(flow.v, dtype=np.float64)
    finite = np.isfinite(u) & np.isfinite(v)
    n_bad = int((~finite).sum())
    if n_bad:
        warnings.warn(f"{n_bad} non-finite flow vectors rendered black", stacklevel=2)
    u = np.where(finite, u, 0.0)
    v = np.where(finite, v, 0.0)

    magnitude = np.hypot(u, v)
    if max_magnitude is None:
        max_magnitude = float(magnitude.max())
    if max_magnitude < 1e-9:
        radius = np.zeros_like(magnitude)
    else:
        radius = np.minimum(magnitude / max_magnitude, 1.0)

    wheel = color_wheel()
    n_cols = len(wheel)
    angle = np.arctan2(-v, -u) / np.pi  # in [-1, 1]
    fk = (angle + 1.0) / 2.0 * (n_cols - 1)
    k0 = np.floor(fk).astype(int) % n_cols
    k1 = (k0 + 1) % n_cols
    frac = fk - np.floor(fk)

    base = (1.0 - frac[..., None]) * wheel[k0] + frac[..., None] * wheel[k1]
    rgb = 1.0 - radius[..., None] * (1.0 - base)
    rgb[~finite] = 0.0
    return (255.0 * rgb + 0.5).astype(np.uint8)


def save_ppm(image, path):
    """Write an RGB uint8 image as binary PPM (P6, maxval 255)."""
    image = np.ascontiguousarray(image, dtype=np.uint8)
    height, width = image.shape[:2]
    with open(os.fspath(path), "wb") as fh:
        fh.write(f"P6\n{width} {height}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


def load_ppm(path):
    path = os.fspath(path)
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:2] != b"P6":
        raise Malformed(f"{path}: expected binary PPM magic 'P6'")
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            while raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and raw[pos : pos + 1].isdigit():
            pos += 1
        tokens.append(int(raw[start:pos]))
    pos += 1
    width, height, _ = tokens
    data = np.frombuffer(raw, dtype=np.uint8, count=3 * width * height, offset=pos)
    return data.reshape(height, width, 3)


def save_image(image, path):
    """Write PPM or, via Pillow, any format the extension implies (e.g. PNG)."""
    path = os.fspath(path)
    if path.lower().endswith(".ppm"):
        save_ppm(image, path)
        return
    from PIL import Image

    Image.fromarray(np.ascontiguousarray(image, dtype=np.uint8), mode="RGB").save(path)
