"""Domains, fields, metric construction and the curvature stack."""

from .curvature import CurvaturePack, curvature
from .domains import ChartSpec, TorusGrid
from .fields import Field, ein, inverse
from .integrate import l2_pair, pointwise_inner, volume_density, volume_integral
from .spaces import Mode, SpaceSpec, build_space, check_metric, coordinate_function, parse_space

__all__ = [
    "ChartSpec",
    "CurvaturePack",
    "Field",
    "Mode",
    "SpaceSpec",
    "TorusGrid",
    "build_space",
    "check_metric",
    "coordinate_function",
    "curvature",
    "ein",
    "inverse",
    "l2_pair",
    "parse_space",
    "pointwise_inner",
    "volume_density",
    "volume_integral",
]
