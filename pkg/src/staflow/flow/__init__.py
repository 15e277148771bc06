"""Dense optical-flow solvers and the flow-field container."""

from .farneback import FarnebackParams, PolyCoeffs, farneback_flow, polynomial_expansion
from .field import FlowField, flow_from_text, flow_to_text, read_flo, write_flo
from .tvl1 import TvL1Params, tvl1_energy, tvl1_flow

__all__ = [
    "FarnebackParams",
    "FlowField",
    "PolyCoeffs",
    "TvL1Params",
    "farneback_flow",
    "flow_from_text",
    "flow_to_text",
    "polynomial_expansion",
    "read_flo",
    "tvl1_energy",
    "tvl1_flow",
    "write_flo",
]
