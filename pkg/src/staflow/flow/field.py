"""Dense flow-field container and its on-disk formats.

Binary layout is the common ".flo" one: a float32 magic tag (202021.25, the
bytes 'PIEH'), int32 width, int32 height, then row-major interleaved (u, v)
float32 pairs. A plain-text dump is provided for tests and debugging.
"""

import os
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, Malformed, UnsupportedFormat

FLO_MAGIC = 202021.25


@dataclass(frozen=True)
class FlowField:
    """Per-pixel displacement between two frames; u = +x (right), v = +y (down)."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.float64)
        v = np.asarray(self.v, dtype=np.float64)
        if u.ndim != 2 or u.shape != v.shape:
            raise DimensionMismatch(f"u {np.shape(self.u)} and v {np.shape(self.v)} must be equal 2D shapes")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def width(self):
        return self.u.shape[1]

    @property
    def height(self):
        return self.u.shape[0]

    @property
    def shape(self):
        return self.u.shape

    def magnitude(self):
        return np.hypot(self.u, self.v)

    @classmethod
    def zeros(cls, height, width):
        return cls(np.zeros((height, width)), np.zeros((height, width)))


def write_flo(flow, path):
    """Write a FlowField in the binary layout above."""
    height, width = flow.shape
    data = np.empty((height, width, 2), dtype=np.float32)
    data[:, :, 0] = flow.u
    data[:, :, 1] = flow.v
    with open(os.fspath(path), "wb") as fh:
        fh.write(struct.pack("<fii", FLO_MAGIC, width, height))
        fh.write(data.tobytes())


def read_flo(path):
    """Read a FlowField written by write_flo (or any standard .flo file)."""
    path = os.fspath(path)
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 12:
        raise Malformed(f"{path}: shorter than a flow header")
    magic, width, height = struct.unpack_from("<fii", raw, 0)
    if abs(magic - FLO_MAGIC) > 1e-3:
        raise UnsupportedFormat(f"{path}: bad magic {magic!r}, not a flow file")
    if width < 1 or height < 1:
        raise Malformed(f"{path}: invalid dimensions {width}x{height}")
    expected = 12 + 8 * width * height
    if len(raw) < expected:
        raise Malformed(f"{path}: payload holds {len(raw) - 12} bytes, header promises {8 * width * height}")
    data = np.frombuffer(raw, dtype="<f4", count=2 * width * height, offset=12)
    data = data.reshape(height, width, 2).astype(np.float64)
    return FlowField(u=data[:, :, 0], v=data[:, :, 1])


def flow_to_text(flow):
    """Dump a flow field as text: "width height", then all u rows, then all v rows.

    One raster row per line, values formatted with %.9g.
    """
    lines = [f"{flow.width} {flow.height}"]
    for plane in (flow.u, flow.v):
        for row in plane:
            lines.append(" ".join(f"{val:.9g}" for val in row))
    return "\n".join(lines) + "\n"


def flow_from_text(text):
    """Inverse of flow_to_text."""
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    try:
        width, height = (int(tok) for tok in lines[0].split())
        rows = [[float(tok) for tok in ln.split()] for ln in lines[1:]]
    except (ValueError, IndexError) as exc:
        raise Malformed(f"bad flow text dump: {exc}") from exc
    if len(rows) != 2 * height or any(len(r) != width for r in rows):
        raise Malformed("flow text dump does not match its declared dimensions")
    u = np.asarray(rows[:height], dtype=np.float64)
    v = np.asarray(rows[height:], dtype=np.float64)
    return FlowField(u=u, v=v)
