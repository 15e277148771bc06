"""Duality-based TV-L1 optical flow and its energy functional.

Minimizes an L1 data term plus total-variation regularization with the usual
primal-dual scheme: per warp, the residual is linearized around the warping
flow, then the inner loop alternates a pointwise thresholding step on the
residual with a fixed-point update of the dual variables of the TV term.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..errors import DimensionMismatch
from ..raster import build_pyramid, central_gradient, resize_bilinear, warp_bilinear
from .field import FlowField

# |grad I1|^2 below this gets no data-term step (orientation undefined there)
GRAD_FLOOR = 1e-9


@dataclass
class TvL1Params:
    """Solver knobs; lam, theta, tau are the swept parameters, the rest structural.

    lam     data-term weight (lambda); intensities are used on their native
            [0, 255] range, matching the implementations these values are for
    theta   tightness coupling the data and regularization solutions
    tau     dual-ascent time step
    epsilon stopping threshold on the per-iteration flow change (px): the
            inner loop ends once the mean squared change drops below epsilon^2
    """

    lam: float = 0.05
    theta: float = 0.1
    tau: float = 0.15
    warps: int = 5
    levels: int = 5
    scale: float = 0.5
    epsilon: float = 0.01
    max_inner_iterations: int = 300
    median_filter: bool = True

    def validate(self):
        for name in ("lam", "theta", "tau", "epsilon"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("warps", "levels", "max_inner_iterations"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not 0.0 < self.scale < 1.0:
            raise ValueError(f"scale must lie in (0, 1), got {self.scale}")
        if self.tau > 0.25:
            warnings.warn(f"tau = {self.tau} exceeds the recommended bound 0.25", stacklevel=2)


def forward_gradient(field):
    """Forward differences with a zero (Neumann) last row/column."""
    gx = np.zeros_like(field)
    gy = np.zeros_like(field)
    gx[:, :-1] = field[:, 1:] - field[:, :-1]
    gy[:-1, :] = field[1:, :] - field[:-1, :]
    return gx, gy


def divergence(px, py):
    """Negative adjoint of forward_gradient (backward differences)."""
    div = np.zeros_like(px)
    div[:, 0] += px[:, 0]
    div[:, 1:] += px[:, 1:] - px[:, :-1]
    div[0, :] += py[0, :]
    div[1:, :] += py[1:, :] - py[:-1, :]
    return div


def _tvl1_level(f0, f1, u, v, params):
    lt = params.lam * params.theta
    taut = params.tau / params.theta
    stop = params.epsilon * params.epsilon
    g1x, g1y = central_gradient(f1)

    p11 = np.zeros_like(f0)
    p12 = np.zeros_like(f0)
    p21 = np.zeros_like(f0)
    p22 = np.zeros_like(f0)

    for _ in range(params.warps):
        f1w = warp_bilinear(f1, (u, v))
        f1wx = warp_bilinear(g1x, (u, v))
        f1wy = warp_bilinear(g1y, (u, v))
        grad = f1wx * f1wx + f1wy * f1wy
        textured = grad >= GRAD_FLOOR
        grad_safe = np.where(textured, grad, 1.0)
        rho_const = f1w - f1wx * u - f1wy * v - f0

        for _ in range(params.max_inner_iterations):
            rho = rho_const + f1wx * u + f1wy * v
            thresh = lt * grad
            step = np.where(
                rho < -thresh, lt, np.where(rho > thresh, -lt, -rho / grad_safe)
            )
            step = np.where(textured, step, 0.0)
            v1 = u + step * f1wx
            v2 = v + step * f1wy

            u_new = v1 + params.theta * divergence(p11, p12)
            v_new = v2 + params.theta * divergence(p21, p22)
            err = np.mean((u_new - u) ** 2 + (v_new - v) ** 2)
            u, v = u_new, v_new

            ux, uy = forward_gradient(u)
            vx, vy = forward_gradient(v)
            norm_u = 1.0 + taut * np.sqrt(ux * ux + uy * uy)
            norm_v = 1.0 + taut * np.sqrt(vx * vx + vy * vy)
            p11 = (p11 + taut * ux) / norm_u
            p12 = (p12 + taut * uy) / norm_u
            p21 = (p21 + taut * vx) / norm_v
            p22 = (p22 + taut * vy) / norm_v

            if err < stop:
                break

        if params.median_filter:
            u = ndimage.median_filter(u, size=5, mode="nearest")
            v = ndimage.median_filter(v, size=5, mode="nearest")
    return u, v


def tvl1_flow(prev, next_frame, params=None):
    """Coarse-to-fine TV-L1 flow from `prev` to `next_frame`."""
    params = params if params is not None else TvL1Params()
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
        u, v = _tvl1_level(f0, f1, u, v, params)
    return FlowField(u=u, v=v)


def tvl1_energy(prev, next_frame, flow, lam):
    """TV + lambda*L1 objective: sum(|grad u| + |grad v|) + lam*sum(|warp(next) - prev|).

    Evaluated on the given intensities as-is, with forward-difference gradients;
    a diagnostic for convergence checks, not part of the solver loop.
    """
    prev = np.asarray(prev, dtype=np.float64)
    next_frame = np.asarray(next_frame, dtype=np.float64)
    if prev.shape != next_frame.shape:
        raise DimensionMismatch(f"frames differ: {prev.shape} vs {next_frame.shape}")
    if flow.shape != prev.shape:
        raise DimensionMismatch(f"flow {flow.shape} does not match frames {prev.shape}")

    ux, uy = forward_gradient(flow.u)
    vx, vy = forward_gradient(flow.v)
    tv = np.sqrt(ux * ux + uy * uy).sum() + np.sqrt(vx * vx + vy * vy).sum()
    data = np.abs(warp_bilinear(next_frame, flow) - prev).sum()
    return float(tv + lam * data)
