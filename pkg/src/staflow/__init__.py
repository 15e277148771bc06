"""Optical-flow based spatio-temporal appearance descriptors for action recognition."""

from .flow import (
    FarnebackParams,
    FlowField,
    TvL1Params,
    farneback_flow,
    tvl1_energy,
    tvl1_flow,
)
from .raster import build_pyramid, gaussian_smooth, load_pgm, save_pgm, warp_bilinear
from .sta import BoundingBox, Descriptor, Sta2Accumulator, StaParams, grid_vector, sta1

__version__ = "0.1.0"
