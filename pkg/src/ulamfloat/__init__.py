"""Floating-body constructions and experiments for concrete convex bodies."""

__version__ = "0.1.0"

from .geometry import BodyHandle, direction_grid, antipodal_grid, unit_ball_volume
from .weights import WeightFunction, total_mass

__all__ = [
    "BodyHandle",
    "WeightFunction",
    "total_mass",
    "direction_grid",
    "antipodal_grid",
    "unit_ball_volume",
    "__version__",
]
