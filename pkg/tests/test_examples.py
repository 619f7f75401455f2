import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from gfa import kernels
from gfa.examples import (
    BUILTIN_NAMES,
    Example510Config,
    builtin,
    canonical_families,
    make_example_510,
    make_x0_net,
    truncated_moment_log,
)
from gfa.points import ScaleClass, classify_scale, is_compactly_supported

CFG = Example510Config()
FAM, ORACLE = make_example_510(CFG)


@pytest.mark.parametrize("j", [0, 1, 3, 6])
@pytest.mark.parametrize("delta", [-0.9, -0.1, 0.5, 0.99, 1.0, 3.0, 40.0])
def test_truncated_moment_against_quadrature(j, delta):
    upper = min(delta, 1.0)
    ref, _ = quad(lambda s: (delta - s) ** j * float(kernels.bump(s)), -1, upper,
                  epsabs=0, epsrel=1e-13, limit=200)
    lg, sign = truncated_moment_log(j, np.array([delta]))
    assert sign[0] * math.exp(lg[0]) == pytest.approx(ref, rel=1e-10)


@given(st.integers(1, 3), st.integers(1, 8), st.integers(0, 6), st.floats(-1.4, 3.0))
@settings(max_examples=60, deadline=None)
def test_family_agrees_with_oracle(m, n, k, delta):
    eps = CFG.eps(m, n)
    s = eps ** (m + 1)
    got = FAM.deriv(k, eps, np.array([delta * s]), anchor=CFG.a(m))[0].real
    ref = ORACLE.derivative(m, n, k, delta * s)
    # natural size of D^k u near the spike, for an absolute floor at zeros of odd orders
    scale = s ** (-(k - m + 1)) if k >= m else s ** (m - k)
    assert got == pytest.approx(ref, rel=1e-8, abs=1e-12 * scale)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_family_vanishes_left_of_each_spike(m):
    eps = CFG.eps(m, 5)
    s = eps ** (m + 1)
    x = CFG.a(m) - s * np.array([1.0, 1.5, 10.0]) - np.array([0.0, 0.0, 0.1])
    for k in range(6):
        assert np.all(FAM.deriv(k, eps, x) == 0)


def test_peak_values():
    for m in (1, 2, 3):
        eps = CFG.eps(m, 4)
        for k in range(m, m + 5, 2):
            got = FAM.deriv(k, eps, np.array([CFG.a(m)]))[0].real
            assert got == pytest.approx(ORACLE.at_peak(m, 4, k), rel=1e-9)


def test_branch_table_and_grid():
    assert CFG.exponent(2, 5) == Fraction(16, 3)
    table = CFG.table()
    assert len(table) == CFG.m_cap * CFG.n_cap
    grid = CFG.grid()
    assert len(grid.branches) == CFG.m_cap
    assert all(float(e) in table for e in grid.eps)
    with pytest.raises(ValueError):
        Example510Config(m_cap=7)


def test_x0_net_is_slow_and_bounded():
    x0 = make_x0_net(CFG)
    assert classify_scale(x0) == ScaleClass.SLOW
    assert is_compactly_supported(x0, [(0, 1)])


def test_canonical_set_and_builtins():
    names = [c.name for c in canonical_families()]
    assert set(names) <= set(BUILTIN_NAMES)
    assert {"bump", "mollifier", "modulated_bump", "prop34", "example510"} <= set(names)
    for c in canonical_families(include_example510=False):
        assert set(c.expected) <= {"moderate", "tau", "schwartz", "slowscale_support",
                                   "slowscale_spectrum", "gs_infinity"}
    with pytest.raises(KeyError):
        builtin("no_such_family")
