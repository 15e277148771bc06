"""Dense optical flow from quadratic polynomial expansion of local neighborhoods.

Each pixel's neighborhood is modeled as f(x) ~ x'Ax + b'x + c (weighted
least-squares fit with a Gaussian applicability); displacement follows from
how that quadratic surface moves between the two frames, averaged over a
uniform window so the estimate is neighborhood-level rather than pixel-level.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..errors import DimensionMismatch, TooSmall
from ..raster import build_pyramid, resize_bilinear
from .field import FlowField

# soft floor for the 2x2 normal-matrix determinant; flat regions fall back to zero flow
DET_REGULARIZER = 1e-6


@dataclass
class FarnebackParams:
    """Solver knobs; w, s, sigma are the swept parameters, the rest structural.

    w       averaging half-width (window = 2w+1 pixels)
    s       polynomial-expansion neighborhood size, odd
    sigma   std of the Gaussian applicability of the expansion
    """

    w: int = 2
    s: int = 5
    sigma: float = 1.1
    levels: int = 3
    scale: float = 0.5
    iterations: int = 3

    def validate(self):
        if self.w < 1:
            raise ValueError(f"w must be >= 1, got {self.w}")
        if self.s < 3 or self.s % 2 == 0:
            raise ValueError(f"s must be odd and >= 3, got {self.s}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        if not 0.0 < self.scale < 1.0:
            raise ValueError(f"scale must lie in (0, 1), got {self.scale}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")


@dataclass(frozen=True)
class PolyCoeffs:
    """Per-pixel quadratic model f ~ x'Ax + b'x + c.

    A = [[axx, axy], [axy, ayy]] (symmetric by construction), b = (bx, by).
    """

    c: np.ndarray
    bx: np.ndarray
    by: np.ndarray
    axx: np.ndarray
    axy: np.ndarray
    ayy: np.ndarray


def polynomial_expansion(frame, s, sigma):
    """Fit the quadratic model at every pixel via separable correlations.

    The weighted normal equations share one 6x6 metric G (basis
    {1, x, y, x^2, y^2, xy} under the Gaussian applicability), so the fit
    reduces to six moment images multiplied by inv(G).
    """
    frame = np.asarray(frame, dtype=np.float64)
    if s > min(frame.shape):
        raise TooSmall(f"neighborhood {s} exceeds frame {frame.shape}")
    if s < 3 or s % 2 == 0:
        raise ValueError(f"s must be odd and >= 3, got {s}")

    radius = s // 2
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    g /= g.sum()
    kernels = (g, x * g, x * x * g)

    # moment images: correlate f with a(x)*x^i horizontally, a(y)*y^j vertically
    def corr(kx, ky):
        out = ndimage.correlate1d(frame, kernels[kx], axis=1, mode="nearest")
        return ndimage.correlate1d(out, kernels[ky], axis=0, mode="nearest")

    moments = np.stack(
        [corr(0, 0), corr(1, 0), corr(0, 1), corr(2, 0), corr(0, 2), corr(1, 1)]
    )

    xx, yy = np.meshgrid(x, x, indexing="xy")
    applicability = np.outer(g, g)
    basis = np.stack(
        [np.ones_like(xx), xx, yy, xx * xx, yy * yy, xx * yy]
    ).reshape(6, -1)
    metric = (basis * applicability.ravel()) @ basis.T
    coeffs = np.tensordot(np.linalg.inv(metric), moments, axes=1)

    return PolyCoeffs(
        c=coeffs[0],
        bx=coeffs[1],
        by=coeffs[2],
        axx=coeffs[3],
        ayy=coeffs[4],
        axy=coeffs[5] / 2.0,
    )


def _sample(plane, rows, cols):
    return ndimage.map_coordinates(plane, [rows, cols], order=1, mode="nearest")


def _displacement_step(p1, p2, u, v, w):
    """One neighborhood-averaged displacement update at a fixed pyramid level."""
    height, width = u.shape
    rows, cols = np.meshgrid(
        np.arange(height, dtype=np.float64),
        np.arange(width, dtype=np.float64),
        indexing="ij",
    )
    sr, sc = rows + v, cols + u

    a11 = 0.5 * (p1.axx + _sample(p2.axx, sr, sc))
    a12 = 0.5 * (p1.axy + _sample(p2.axy, sr, sc))
    a22 = 0.5 * (p1.ayy + _sample(p2.ayy, sr, sc))
    db1 = -0.5 * (_sample(p2.bx, sr, sc) - p1.bx) + a11 * u + a12 * v
    db2 = -0.5 * (_sample(p2.by, sr, sc) - p1.by) + a12 * u + a22 * v

    g11 = a11 * a11 + a12 * a12
    g12 = a12 * (a11 + a22)
    g22 = a22 * a22 + a12 * a12
    h1 = a11 * db1 + a12 * db2
    h2 = a12 * db1 + a22 * db2

    size = 2 * w + 1
    box = lambda img: ndimage.uniform_filter(img, size=size, mode="nearest")
    g11, g12, g22, h1, h2 = box(g11), box(g12), box(g22), box(h1), box(h2)

    idet = 1.0 / (g11 * g22 - g12 * g12 + DET_REGULARIZER)
    return (g22 * h1 - g12 * h2) * idet, (g11 * h2 - g12 * h1) * idet


def farneback_flow(prev, next_frame, params=None):
    """Coarse-to-fine polynomial-expansion flow from `prev` to `next_frame`."""
    params = params if params is not None else FarnebackParams()
    params.validate()
    prev = np.asarray(prev, dtype=np.float64)
    next_frame = np.asarray(next_frame, dtype=np.float64)
    if prev.shape != next_frame.shape:
        raise DimensionMismatch(f"frames differ: {prev.shape} vs {next_frame.shape}")

    pyr0 = build_pyramid(prev, params.levels, params.scale)
    pyr1 = build_pyramid(next_frame, params.levels, params.scale)

    u = v = None
    for lev in range(len(pyr0) - 1, -1, -1):
        f0, f1 = pyr0.levels[lev], pyr1.levels[lev]
        if u is None:
            u = np.zeros_like(f0)
            v = np.zeros_like(f0)
        else:
            h, w = f0.shape
            u = resize_bilinear(u, w, h) / params.scale
            v = resize_bilinear(v, w, h) / params.scale
        p1 = polynomial_expansion(f0, params.s, params.sigma)
        p2 = polynomial_expansion(f1, params.s, params.sigma)
        for _ in range(params.iterations):
            u, v = _displacement_step(p1, p2, u, v, params.w)
    return FlowField(u=u, v=v)
