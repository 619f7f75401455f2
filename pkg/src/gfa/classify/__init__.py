"""Membership and regularity tests over families and eps-grids."""
from .constructions import cutoff_glue, default_degree, taylor_companion
from .growth import (
    test_invertible,
    test_moderate,
    test_negligible,
    test_schwartz,
    test_slowscale_support,
    test_tau,
)
from .regions import (
    Annulus,
    Ball,
    ClassicalBall,
    Exterior,
    PointNet,
    SharpBall,
    log_sup_on_region,
    order_sweep,
    recording,
    region_extreme,
    sup_on_region,
    sweep,
)
from .regularity import (
    AkSequence,
    ak_sequence,
    test_check_regular,
    test_classical_regular,
    test_convexity,
    test_pointstar_regular,
    test_regularity_on_compact,
    test_sharp_regular,
    test_tilde_regular,
)

__all__ = [
    "AkSequence", "Annulus", "Ball", "ClassicalBall", "Exterior", "PointNet", "SharpBall",
    "ak_sequence", "cutoff_glue", "default_degree", "log_sup_on_region", "order_sweep",
    "recording", "region_extreme",
    "sup_on_region", "sweep", "taylor_companion", "test_check_regular", "test_classical_regular",
    "test_convexity", "test_invertible", "test_moderate", "test_negligible",
    "test_pointstar_regular", "test_regularity_on_compact", "test_schwartz", "test_sharp_regular",
    "test_slowscale_support", "test_tau", "test_tilde_regular",
]
