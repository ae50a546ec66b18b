"""Hausdorff-dimension upper bounds for self-similar sets of weak contractions."""

__version__ = "0.1.0"

from .coeff import CoefficientFunction, EnvelopeFunction, envelope, eval_alpha, global_infimum
from .moran import DimensionCurve, MoranProblem, solve_moran, x_curve
from .ifs import (
    AffineMap,
    ExpressionMap,
    IFSystem,
    MetricDomain,
    SimilarityMap,
    WeakContraction,
    apply_map,
    distance,
    fixed_point,
    validate_weak_contraction,
)
from .scene import SceneConfig, format_scene, load_scene, parse_scene

__all__ = [
    "AffineMap",
    "CoefficientFunction",
    "DimensionCurve",
    "EnvelopeFunction",
    "ExpressionMap",
    "IFSystem",
    "MetricDomain",
    "MoranProblem",
    "SceneConfig",
    "SimilarityMap",
    "WeakContraction",
    "apply_map",
    "distance",
    "envelope",
    "eval_alpha",
    "fixed_point",
    "format_scene",
    "global_infimum",
    "load_scene",
    "parse_scene",
    "solve_moran",
    "validate_weak_contraction",
    "x_curve",
]
