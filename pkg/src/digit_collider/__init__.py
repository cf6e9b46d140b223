"""Collisions of binary and ternary digit sums."""

from .collider import (
    Certificate,
    CollisionKind,
    CollisionRecord,
    count_collisions,
    enumerate_collisions,
    find_patterns,
    forge_collision,
)
from .config import OutputFormat, Params, ParamsMode, RunConfig, make_params
from .constructor import ProgressionSpec, ShiftFamily, build_family, make_progression
from .digits import DigitString, digit_sum, digit_sum_trunc, f_value
from .distribution import DistTable, moments, omega, phi_table
from .errors import ColliderError

__all__ = [
    "Certificate",
    "ColliderError",
    "CollisionKind",
    "CollisionRecord",
    "DigitString",
    "DistTable",
    "OutputFormat",
    "Params",
    "ParamsMode",
    "ProgressionSpec",
    "RunConfig",
    "ShiftFamily",
    "build_family",
    "count_collisions",
    "digit_sum",
    "digit_sum_trunc",
    "enumerate_collisions",
    "f_value",
    "find_patterns",
    "forge_collision",
    "make_params",
    "make_progression",
    "moments",
    "omega",
    "phi_table",
]
