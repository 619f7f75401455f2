import math

import numpy as np
import pytest
from scipy.integrate import trapezoid
from hypothesis import given, settings
from hypothesis import strategies as st

from gfa.examples import builtin
from gfa.family import family_from_expr
from gfa.fourier import (
    BudgetError,
    choose_window,
    dft_family,
    fourier_at,
    inverse_dft,
    pairing,
    parseval_check,
    spectrum_peaks,
    test_function as panel_function,
    test_function_panel as panel,
    test_slowscale_spectrum as slowscale_spectrum,
)
from gfa.report import Verdict
from gfa.scale import geometric_grid


def gauss_hat(xi):
    return math.sqrt(math.pi) * np.exp(-np.asarray(xi) ** 2 / 4)


def test_gauss_dft_matches_closed_form():
    sp = dft_family(builtin("gauss"), 0.1)
    np.testing.assert_allclose(sp.values, gauss_hat(sp.xi_grid), atol=1e-12)


@given(st.floats(0.2, 3.0), st.floats(-2.0, 2.0))
@settings(max_examples=15, deadline=None)
def test_scaled_shifted_gaussian(scale, shift):
    # u(x) = e^{-((x - c)/s)^2} has transform s sqrt(pi) e^{-(s xi)^2/4} e^{-i c xi}
    text = f"gauss((x1 - ({shift!r}))/{scale!r})"
    fam = family_from_expr(text, 1)
    xis = np.linspace(-4, 4, 9)
    got, acc = fourier_at(fam, 0.5, xis)
    want = scale * gauss_hat(scale * xis) * np.exp(-1j * shift * xis)
    assert np.max(np.abs(got - want)) <= 1e-9


def test_modulation_shifts_the_spectrum():
    eps = 2.0**-6
    mod = dft_family(builtin("modulated_bump"), eps)
    xi = np.linspace(-5, 5, 11)
    a = fourier_at(builtin("bump"), eps, xi)[0]
    b = fourier_at(builtin("modulated_bump"), eps, xi + 1 / eps)[0]
    assert np.max(np.abs(a - b)) <= 1e-9
    assert abs(mod.xi_grid[np.argmax(np.abs(mod.values))] * eps - 1) <= 0.05


def test_inverse_round_trip():
    fam = builtin("mollifier")
    sp = dft_family(fam, 2.0**-6)
    x, u = inverse_dft(sp)
    inner = np.abs(x) <= 0.8 * sp.L
    assert np.max(np.abs(u[inner] - fam.value(2.0**-6, x[inner]))) <= 1e-9


@pytest.mark.parametrize("phi", [p.name for p in panel()])
def test_panel_transforms_and_parseval(phi):
    v = panel_function(phi)
    # the panel's own transforms against direct quadrature
    x = np.linspace(-v.support, v.support, 20001)
    for xi in (0.0, 0.7, 2.5):
        direct = trapezoid(v(x) * np.exp(-1j * x * xi), x)
        assert abs(direct - v.fourier(np.array([xi]))[0]) <= 1e-7
    assert parseval_check(builtin("oscillatory_bump"), v, 2.0**-5) <= 1e-8


def test_window_respects_budget():
    fam = family_from_expr("eps^-1*bump(x1/eps)", 1, support_radius=lambda e: e)
    L, n = choose_window(fam, 2.0**-8)
    assert L >= 4 and n >= 256 and n & (n - 1) == 0
    with pytest.raises(BudgetError):
        choose_window(fam, 2.0**-40)


def test_spectrum_classes():
    grid = geometric_grid(4, 12, tail=8)
    assert slowscale_spectrum(builtin("gauss"), grid=grid).verdict == Verdict.PASS
    assert slowscale_spectrum(builtin("modulated_bump"), grid=grid).verdict == Verdict.FAIL


def test_peak_trajectory():
    peaks = spectrum_peaks(builtin("modulated_bump"), geometric_grid(6, 13, tail=8))
    assert all(0.9 <= abs(xi) * e <= 1.1 for e, xi in peaks.items())


def test_pairing_of_fixed_bump_is_constant():
    grid = geometric_grid(4, 11, tail=8)
    p = pairing(builtin("bump"), panel_function("gauss"), grid)
    x = np.linspace(-1, 1, 200001)
    ref = trapezoid(builtin("bump").value(0.5, x).real * np.exp(-x**2), x)
    np.testing.assert_allclose(p.values.real, ref, rtol=1e-8)
