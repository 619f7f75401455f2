import math

import numpy as np
import pytest

from gfa.classify import (
    Annulus,
    Ball,
    ClassicalBall,
    Exterior,
    ak_sequence,
    cutoff_glue,
    recording,
    sweep,
    taylor_companion,
    test_convexity as convexity,
    test_invertible as invertible,
    test_moderate as moderate,
    test_negligible as negligible,
    test_pointstar_regular as pointstar,
    test_schwartz as schwartz,
    test_slowscale_support as slowscale_support,
    test_tau as tau,
)
from gfa.examples import builtin, make_prop34_family
from gfa.family import family_from_expr
from gfa.points import GenPoint
from gfa.report import Verdict
from gfa.scale import normalize


@pytest.mark.parametrize("text,region,want", [
    ("x1^2", Ball(1), -2.0),
    ("x1^2", Ball(3), -6.0),
    ("eps^-1*bump(x1/eps)", Ball(1), -1.0),
    ("gauss(x1 - 1/eps)", Exterior(2), 0.0),
    ("1/(1 + x1^2)", Annulus(1), 2.0),
])
def test_sweep_exponents_match_closed_forms(text, region, want):
    fit = sweep(family_from_expr(text, 1), 0, region).fit
    assert fit.slope == pytest.approx(want, abs=0.02)


def test_recording_collects_sweep_rows():
    with recording() as rows:
        sweep(builtin("bump"), 0, Ball(1))
    assert len(rows) == 12
    assert {"eps", "region", "alpha", "m_or_k", "sup_logmag", "fit_slope", "residual"} <= set(rows[0])


def test_moderate_mollifier_bound():
    r = moderate(builtin("mollifier"), m_max=2, k_max=2)
    # sup |u^(k)| = eps^-(k+1) sup |bump^(k)|
    assert r.verdict == Verdict.PASS and r.witnesses["N"] == 3


def test_negligible():
    assert negligible(family_from_expr("eps^10*bump(x1)", 1), m_max=2, k_max=1).verdict == Verdict.PASS
    r = negligible(builtin("bump"), m_max=2, k_max=1)
    assert r.verdict == Verdict.FAIL


def test_tau_and_schwartz_separate_polynomial_growth():
    x2 = builtin("x_squared")
    assert tau(x2, m_max=3, k_max=2).verdict == Verdict.PASS
    assert schwartz(x2, m_max=3, k_max=2).verdict == Verdict.FAIL
    assert schwartz(builtin("gauss"), m_max=2, k_max=2, decay_max=2).verdict == Verdict.PASS


def test_tau_fails_for_log_power_family():
    r = tau(make_prop34_family(), m_max=4, k_max=0)
    assert r.verdict == Verdict.FAIL
    ratios = r.witnesses["ratio_table"]
    for m, v in ratios.items():
        assert v == pytest.approx(4 * m, rel=0.01)


def test_slowscale_support():
    assert slowscale_support(builtin("bump"), m_max=3).verdict == Verdict.PASS
    r = slowscale_support(builtin("shifted_gauss"), m_max=3)
    assert r.verdict == Verdict.FAIL


def test_gluing_at_slow_radius_gives_slowscale_support():
    log_radius = normalize([(1, 0, 1)])
    glued = cutoff_glue(make_prop34_family(), log_radius)
    assert slowscale_support(glued, m_max=3, k_max=1).verdict == Verdict.PASS


def test_invertible():
    assert invertible(family_from_expr("1 + x1^2", 1), m_max=2).verdict == Verdict.PASS
    assert invertible(builtin("bump"), m_max=2).verdict == Verdict.FAIL
    assert invertible(builtin("gauss"), m_max=2).verdict == Verdict.FAIL


def test_taylor_companion_matches_low_derivatives():
    fam = family_from_expr("sin(x1/eps)*gauss(x1)", 1)
    x0 = GenPoint.of(0.3)
    v = taylor_companion(fam, x0, degree_rule=lambda e: 4)
    eps = 0.25
    for k in range(5):
        a = fam.deriv(k, eps, np.array([0.3]))[0]
        b = v.deriv(k, eps, np.array([0.3]))[0]
        assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


def test_mollifier_ak_and_convexity():
    ak = ak_sequence(builtin("mollifier"), (0.0,), k_max=5)
    assert ak.a_k == pytest.approx([-(k + 1) for k in range(6)], abs=0.02)
    assert pointstar(ak).verdict == Verdict.FAIL
    assert convexity(ak).verdict == Verdict.PASS


def test_smooth_family_is_pointstar_regular():
    ak = ak_sequence(builtin("bump"), (0.2,), k_max=4)
    assert all(abs(a) <= 0.02 for a in ak.a_k)
    assert pointstar(ak).verdict == Verdict.PASS


def test_classical_ball_sup_is_local():
    fam = builtin("mollifier")
    far = sweep(fam, 0, ClassicalBall((0.5,), 0.1)).fit
    assert fam.support_radius(2.0**-4) == pytest.approx(2.0**-4)
    assert far.saturated_zero and math.isinf(far.slope)
