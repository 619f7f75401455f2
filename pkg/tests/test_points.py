import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gfa.points import (
    GenPoint,
    ScaleClass,
    classify_scale,
    infinitely_close,
    is_compactly_supported,
    sharp_distance,
)
from gfa.scale import SampledScalar, default_grid, normalize


def mono(c, a, b=0):
    return normalize([(c, Fraction(a), b)])


@pytest.mark.parametrize("coord,want", [
    (mono(3, 0), ScaleClass.SLOW),
    (mono(1, 0, 2), ScaleClass.SLOW),
    (mono(1, 1), ScaleClass.SLOW),
    (mono(1, -1), ScaleClass.FAST),
    (mono(2, Fraction(-1, 3)), ScaleClass.FAST),
])
def test_exact_scale_classes(coord, want):
    assert classify_scale(GenPoint.of(coord)) == want


def test_sampled_scale_classes():
    grid = default_grid()
    e = grid.eps
    log = np.log(1 / e)
    for b in (1, 1.5, 3):
        assert classify_scale(GenPoint.of(SampledScalar(grid, log**b))) == ScaleClass.SLOW
    assert classify_scale(GenPoint.of(SampledScalar(grid, e**-0.15 * log**3))) == ScaleClass.FAST
    assert classify_scale(GenPoint.of(SampledScalar(grid, e**-0.5))) == ScaleClass.FAST
    # jumps from 1 to eps^-1 inside the tail: no single scale
    mixed = np.where(np.arange(len(grid)) < len(grid) - 6, 1.0, 1 / e)
    assert classify_scale(GenPoint.of(SampledScalar(grid, mixed))) == ScaleClass.NEITHER


@given(st.fractions(min_value=Fraction(1, 4), max_value=6, max_denominator=4))
def test_sharp_distance_of_exact_points(a):
    x = GenPoint.of(mono(1, 0))
    y = GenPoint.of(mono(1, 0) + mono(2, a))
    assert sharp_distance(x, y) == pytest.approx(math.exp(-float(a)))
    assert infinitely_close(x, y)


def test_sharp_distance_of_sampled_points_matches_exact():
    grid = default_grid()
    x = GenPoint.of(mono(1, 0) + mono(1, 2)).sample(grid)
    y = GenPoint.of(mono(1, 0)).sample(grid)
    assert sharp_distance(x, y) == pytest.approx(math.exp(-2), rel=1e-6)
    assert sharp_distance(x, x) == 0.0


def test_compact_support():
    assert is_compactly_supported(GenPoint.of(mono(1, 0) + mono(1, 1)), [(0, 2)])
    assert not is_compactly_supported(GenPoint.of(mono(1, -1)), [(0, 2)])
    # limit on the boundary, approached from outside
    assert not is_compactly_supported(GenPoint.of(mono(1, 0) + mono(1, 1)), [(0, 1)])


def test_mixed_coordinates_are_rejected():
    grid = default_grid()
    with pytest.raises(ValueError):
        GenPoint.of(mono(1, 0), mono(1, 0).sample(grid))
