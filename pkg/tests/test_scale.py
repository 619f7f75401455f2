import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfa.scale import (
    INF,
    EpsGrid,
    ExactScalar,
    Idempotent,
    SampledScalar,
    default_grid,
    fit_exponent,
    fit_log_magnitudes,
    geometric_grid,
    interleave,
    normalize,
    sharp_norm,
    union_grid,
    valuation,
)

coeffs = st.fractions(min_value=-9, max_value=9, max_denominator=4).filter(lambda c: c != 0)
exponents = st.fractions(min_value=-6, max_value=6, max_denominator=4)
terms = st.tuples(coeffs, exponents, st.integers(0, 2))
scalars = st.lists(terms, max_size=3).map(normalize)
masks = st.lists(st.booleans(), min_size=21, max_size=21).map(Idempotent.from_mask)


@given(scalars, scalars)
def test_sharp_norm_is_ultrametric(x, y):
    assert sharp_norm(x + y) <= max(sharp_norm(x), sharp_norm(y))


@given(scalars, scalars)
def test_valuation_is_additive(x, y):
    vx, vy = valuation(x), valuation(y)
    want = INF if INF in (vx, vy) else vx + vy
    assert valuation(x * y) == want


@given(scalars)
def test_sharp_norm_is_exp_of_minus_valuation(x):
    v = valuation(x)
    assert sharp_norm(x) == (0.0 if v == INF else pytest.approx(math.exp(-v)))


@given(scalars)
def test_normalize_cancels_to_zero(x):
    assert (x - x).is_zero()
    assert valuation(x - x) == INF


def test_normalize_merges_and_orders_terms():
    x = normalize([(1, Fraction(2), 0), (2, Fraction(-1), 1), (3, Fraction(2), 0)])
    assert x.terms == ((2, Fraction(-1), 1), (4, Fraction(2), 0))


def test_sample_matches_closed_form():
    grid = default_grid()
    x = normalize([(3, Fraction(1, 2), 1)])
    got = x.sample(grid).total().real
    want = 3 * np.sqrt(grid.eps) * np.log(1 / grid.eps)
    np.testing.assert_allclose(got, want, rtol=1e-14)


@given(st.fractions(min_value=-12, max_value=12, max_denominator=8), st.integers(1, 5))
@settings(max_examples=50)
def test_fit_exponent_recovers_pure_power(a, c):
    x = normalize([(c, a, 0)])
    fit = fit_exponent(x.sample(default_grid()))
    assert abs(fit.slope - float(a)) <= 1e-9


def test_fit_ignores_exact_zeros_and_flags_saturation():
    grid = default_grid()
    logmag = np.full(len(grid), -np.inf)
    fit = fit_log_magnitudes(grid, logmag)
    assert fit.saturated_zero and fit.slope == INF


def test_grids():
    g = geometric_grid(4, 24, tail=12)
    assert len(g) == 21 and g.eps[0] == 2.0**-4 and g.eps[-1] == 2.0**-24
    assert len(g.tail_indices) == 12
    assert g.describe()["count"] == 21
    u = union_grid([[2.0**-k for k in range(4, 14)], [3.0**-k for k in range(3, 10)]], 5)
    assert len(u) == 17 and len(u.branches) == 2


def test_sampled_values_must_be_finite():
    grid = default_grid()
    with pytest.raises(ValueError):
        SampledScalar(grid, np.full(len(grid), np.nan))


@given(masks, masks, masks)
def test_idempotent_laws(e, f, g):
    n = 21
    assert e * e == e
    assert not (e * e.complement()).as_array(n).any()
    assert e.complement().complement() == e
    assert e * f == f * e
    assert (e * f) * g == e * (f * g)
    assert (e.as_array(n) | e.complement().as_array(n)).all()


@given(scalars, scalars, masks)
@settings(max_examples=40)
def test_interleave_takes_each_net_on_its_set(x, y, e):
    grid = default_grid()
    xs, ys = x.sample(grid), y.sample(grid)
    got = interleave(xs, ys, e).total()
    np.testing.assert_array_equal(got, np.where(e.as_array(len(grid)), ys.total(), xs.total()))
    np.testing.assert_array_equal(interleave(xs, ys, e.complement()).total(),
                                  np.where(e.as_array(len(grid)), xs.total(), ys.total()))


def test_exact_interleave_only_with_trivial_idempotents():
    x, y = ExactScalar.const(1), ExactScalar.monomial(1, 2)
    assert interleave(x, y, Idempotent.all()) == y
    assert interleave(x, y, Idempotent.none()) == x
    with pytest.raises(ValueError):
        interleave(x, y, Idempotent.from_mask([True] * 21))


def test_epsgrid_rejects_bad_tail():
    with pytest.raises(ValueError):
        EpsGrid(np.array([0.5, 0.25]), (0, 5))
