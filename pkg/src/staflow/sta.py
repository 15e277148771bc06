"""Spatio-temporal appearance descriptors over flow-orientation grid histograms.

A bounding box is split into an m x n grid of patches; each patch gets a
k1-bin histogram of flow orientations (optionally magnitude-weighted),
normalized to sum 1. Concatenating the patch histograms of one frame pair
gives the grid vector. The first-order descriptor averages grid vectors over
time; the second-order descriptor histograms every grid-vector component's
value distribution over time into k2 bins, which the accumulator maintains
online so a partial action can be described at any moment.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BoxTooSmall,
    Empty,
    LengthMismatch,
    OutOfRange,
    WeightMismatch,
    ZeroVector,
)

# flow vectors shorter than this cast no orientation vote
MAGNITUDE_EPS = 1e-6


@dataclass(frozen=True)
class StaParams:
    """Descriptor geometry: m grid columns, n grid rows, k1 orientation bins,
    k2 temporal bins, magnitude weighting on/off."""

    m: int = 8
    n: int = 6
    k1: int = 8
    k2: int = 5
    weighted: bool = True

    def __post_init__(self):
        for name in ("m", "n", "k1", "k2"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")

    @property
    def grid_length(self):
        return self.m * self.n * self.k1

    @property
    def descriptor_length(self):
        return self.m * self.n * self.k1 * self.k2


@dataclass(frozen=True)
class BoundingBox:
    x: int
    y: int
    w: int
    h: int

    def clamp(self, frame_width, frame_height):
        """Intersect with the frame; annotations routinely overshoot it."""
        x0 = min(max(self.x, 0), frame_width)
        y0 = min(max(self.y, 0), frame_height)
        x1 = min(max(self.x + self.w, 0), frame_width)
        y1 = min(max(self.y + self.h, 0), frame_height)
        return BoundingBox(x=x0, y=y0, w=max(x1 - x0, 0), h=max(y1 - y0, 0))


@dataclass(frozen=True)
class Descriptor:
    values: np.ndarray
    kind: str  # "sta1" or "sta2"

    def __len__(self):
        return len(self.values)


def orientation_bin(u, v, k1):
    """Bin index of the vector's orientation among k1 uniform sectors of 360 deg.

    Raises ZeroVector below the magnitude threshold; the caller must not count
    a vote for such a pixel.
    """
    if math.hypot(u, v) < MAGNITUDE_EPS:
        raise ZeroVector(f"({u}, {v}) is too short to have an orientation")
    angle = math.degrees(math.atan2(v, u)) % 360.0
    return int(angle * k1 / 360.0) % k1


def _patch_edges(extent, count):
    return [int(math.floor(i * extent / count + 0.5)) for i in range(count + 1)]


def grid_vector(flow, box, params):
    """Concatenated patch orientation histograms for one frame pair.

    Patches are ordered row-major (row by row, left to right), k1 bins
    contiguous per patch; each patch histogram is normalized to sum 1, and a
    patch with no votes stays all-zero.
    """
    height, width = flow.shape
    clamped = box.clamp(width, height)
    if clamped.w < params.m or clamped.h < params.n:
        raise BoxTooSmall(
            f"clamped box {clamped.w}x{clamped.h} cannot hold a {params.m}x{params.n} grid"
        )

    u = flow.u[clamped.y : clamped.y + clamped.h, clamped.x : clamped.x + clamped.w]
    v = flow.v[clamped.y : clamped.y + clamped.h, clamped.x : clamped.x + clamped.w]
    magnitude = np.hypot(u, v)
    votes = magnitude >= MAGNITUDE_EPS
    # same arithmetic as orientation_bin, vectorized
    angle = np.degrees(np.arctan2(v, u)) % 360.0
    bins = (angle * params.k1 / 360.0).astype(np.int64) % params.k1
    weights = magnitude if params.weighted else np.ones_like(magnitude)

    x_edges = _patch_edges(clamped.w, params.m)
    y_edges = _patch_edges(clamped.h, params.n)
    out = np.zeros((params.n, params.m, params.k1))
    for row in range(params.n):
        for col in range(params.m):
            sel = (slice(y_edges[row], y_edges[row + 1]), slice(x_edges[col], x_edges[col + 1]))
            mask = votes[sel]
            hist = np.bincount(
                bins[sel][mask], weights=weights[sel][mask], minlength=params.k1
            )
            total = hist.sum()
            if total > 0:
                out[row, col] = hist / total
    return out.ravel()


def sta1(grid_vectors, weights=None):
    """First-order descriptor: weighted average of grid vectors (uniform by default)."""
    grid_vectors = [np.asarray(g, dtype=np.float64) for g in grid_vectors]
    if not grid_vectors:
        raise Empty("sta1 needs at least one grid vector")
    t = len(grid_vectors)
    if weights is None:
        weights = np.full(t, 1.0 / t)
    else:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (t,):
            raise WeightMismatch(f"{len(weights)} weights for {t} grid vectors")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
            raise WeightMismatch("weights must be non-negative and sum to 1")
    stacked = np.stack(grid_vectors)
    return Descriptor(values=weights @ stacked, kind="sta1")


def _bin_components(values, k2):
    # uniform bins over [0, 1], half-open except the last, which is right-closed
    return np.minimum((values * k2).astype(np.int64), k2 - 1)


class Sta2Accumulator:
    """Online store of per-component temporal bin counts, refinable per frame pair.

    Single-writer: push frame pairs as they arrive, extract at any time.
    """

    def __init__(self, params):
        self.params = params
        self.t = 0
        self.counts = np.zeros((params.grid_length, params.k2), dtype=np.int64)

    def push(self, grid_vec):
        grid_vec = np.asarray(grid_vec, dtype=np.float64)
        if grid_vec.shape != (self.params.grid_length,):
            raise LengthMismatch(
                f"grid vector has {grid_vec.shape} values, expected {self.params.grid_length}"
            )
        if np.any(grid_vec < 0.0) or np.any(grid_vec > 1.0):
            raise OutOfRange("grid-vector components must lie in [0, 1]")
        bins = _bin_components(grid_vec, self.params.k2)
        self.counts[np.arange(self.params.grid_length), bins] += 1
        self.t += 1

    def extract(self):
        """Second-order descriptor: concatenated per-component bin frequencies."""
        if self.t == 0:
            raise Empty("no grid vectors pushed yet")
        return Descriptor(values=self.counts.ravel() / self.t, kind="sta2")


def sta2_push(acc, grid_vec):
    """Functional wrapper over Sta2Accumulator.push; returns the accumulator."""
    acc.push(grid_vec)
    return acc


def sta2_extract(acc):
    return acc.extract()
