"""Numerical classification of Colombeau generalized functions."""
__version__ = "0.1.0"

from .dsl import DSLError, parse, to_text
from .family import DSLFamily, Family, family_from_expr, load_family_file
from .points import GenPoint, sharp_distance
from .report import ClassificationReport, PreconditionError, Verdict
from .scale import (
    EpsGrid,
    ExactScalar,
    Idempotent,
    SampledScalar,
    default_grid,
    fit_exponent,
    geometric_grid,
    interleave,
    sharp_norm,
    union_grid,
    valuation,
)

__all__ = [
    "ClassificationReport", "DSLError", "DSLFamily", "EpsGrid", "ExactScalar", "Family", "GenPoint",
    "Idempotent", "PreconditionError", "SampledScalar", "Verdict", "default_grid", "family_from_expr",
    "fit_exponent", "geometric_grid", "interleave", "load_family_file", "parse", "sharp_distance",
    "sharp_norm", "to_text", "union_grid", "valuation",
]
