"""Growth-condition tests: moderateness, negligibility, the tau and Schwartz
conditions, slow-scale support and invertibility.

All universally quantified conditions are checked over finite ranges of
``m``, ``alpha`` and decay order; the ranges are recorded in each report.
A finite range always admits *some* bound, so a Fail means the required
bound keeps growing across the upper half of the tested range.
"""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..family import Family, multi_indices
from ..report import ClassificationReport, PreconditionError, Verdict
from ..scale import EpsGrid, ExponentFit, default_grid
from .regions import Annulus, Ball, Exterior, sweep

TOL = 0.1
RESIDUAL_TOL = 0.5
GROWTH_TOL = 0.5
M_MAX = 4
K_MAX = 8
N_MAX = 8
DECAY_MAX = 4


def _alphas(family: Family, k_max: int):
    for k in range(k_max + 1):
        yield from multi_indices(family.dim, k)


def _slope(fit: ExponentFit) -> float:
    return math.inf if fit.saturated_zero else fit.slope


def _pessimistic(fit: ExponentFit) -> float:
    """Smallest local slope: the exponent the tail is heading towards."""
    if fit.saturated_zero:
        return math.inf
    return min((fit.slope,) + tuple(fit.window_slopes))


def _accelerating(fit: ExponentFit) -> bool:
    """Growth faster than any power: the small-eps window is steeper."""
    if fit.saturated_zero or len(fit.window_slopes) != 2:
        return False
    early, late = fit.window_slopes
    return late < early - GROWTH_TOL


def _unreliable(fit: ExponentFit) -> bool:
    """A poor straight-line fit matters only if the tail may be growing;
    super-polynomial decay bends the log-log curve harmlessly."""
    return fit.max_residual > RESIDUAL_TOL and _pessimistic(fit) < -TOL


def _params(grid: EpsGrid, **kw) -> dict:
    return dict(kw, tolerance=TOL, residual_tolerance=RESIDUAL_TOL)


def _top_half(ms: list) -> list:
    return ms[(len(ms) - 1) // 2:]


def _grows(values: dict, ms: list) -> Optional[tuple]:
    """``(m_lo, m_hi, increase)`` if the required bound ``values`` rises by more
    than GROWTH_TOL across the upper half of ``ms`` and ends above zero."""
    top = _top_half(ms)
    if len(top) < 2:
        return None
    lo, hi = top[0], top[-1]
    a, b = values[lo], values[hi]
    if not math.isfinite(b) or b <= TOL:
        return None
    if b - a > GROWTH_TOL:
        return lo, hi, b - a
    return None


def test_moderate(family: Family, m_max: int = M_MAX, k_max: int = K_MAX,
                  grid: Optional[EpsGrid] = None) -> ClassificationReport:
    """Polynomial bounds ``sup_{|x| <= eps^-m} |d^alpha u_eps| <= eps^-N``."""
    if m_max < 1 or k_max < 0:
        raise ValueError("m_max >= 1 and k_max >= 0 required")
    grid = grid or default_grid()
    params = _params(grid, m_max=m_max, k_max=k_max)
    slopes = {}
    worst = None
    inconclusive = None
    for alpha in _alphas(family, k_max):
        for m in range(1, m_max + 1):
            fit = sweep(family, alpha, Ball(m), grid).fit
            slopes[(alpha, m)] = fit.as_dict()
            if _accelerating(fit):
                return ClassificationReport(
                    "moderate", Verdict.FAIL,
                    witnesses={"alpha": alpha, "m": m, "window_slopes": fit.window_slopes},
                    diagnostics={"reason": "growth faster than every power of 1/eps",
                                 "decided_by": {"alpha": alpha, "m": m}, "fits": slopes},
                    grid=grid.describe(), params=params)
            s = _slope(fit)
            if _unreliable(fit) and inconclusive is None:
                inconclusive = (alpha, m, fit.max_residual)
            if worst is None or s < worst[0]:
                worst = (s, alpha, m)
    if inconclusive is not None:
        alpha, m, res = inconclusive
        return ClassificationReport(
            "moderate", Verdict.INCONCLUSIVE,
            witnesses={"alpha": alpha, "m": m},
            diagnostics={"residual": res, "fits": slopes},
            grid=grid.describe(), params=params)
    s, alpha, m = worst
    n = 0 if not math.isfinite(s) else max(0, math.ceil(-s - TOL))
    return ClassificationReport(
        "moderate", Verdict.PASS,
        witnesses={"N": n, "decided_by": {"alpha": alpha, "m": m}, "min_exponent": s},
        diagnostics={"fits": slopes},
        grid=grid.describe(), params=params)


def test_negligible(family: Family, m_max: int = M_MAX, grid: Optional[EpsGrid] = None,
                    moderate_witness: Optional[ClassificationReport] = None,
                    n_max: float = N_MAX, k_max: int = K_MAX) -> ClassificationReport:
    """Order-0 sups beat every ``eps^n``, ``n <= n_max``; needs a moderate family."""
    grid = grid or default_grid()
    if moderate_witness is None:
        moderate_witness = test_moderate(family, m_max, k_max, grid)
    if not moderate_witness.passed:
        raise PreconditionError("negligibility via order-0 bounds needs a moderate family")
    params = _params(grid, m_max=m_max, n_max=n_max)
    exps = {}
    for m in range(1, m_max + 1):
        fit = sweep(family, (0,) * family.dim, Ball(m), grid).fit
        s = _slope(fit)
        exps[m] = s
        if s < n_max - TOL:
            failing_n = max(1, math.ceil(s + TOL)) if math.isfinite(s) else 1
            if failing_n <= s:
                failing_n += 1
            return ClassificationReport(
                "negligible", Verdict.FAIL,
                witnesses={"m": m, "n": failing_n, "exponent": s},
                diagnostics={"exponents": exps, "decided_by": {"m": m}},
                grid=grid.describe(), params=params)
    return ClassificationReport(
        "negligible", Verdict.PASS,
        witnesses={"n_max": n_max, "exponents": exps},
        diagnostics={}, grid=grid.describe(), params=params)


def test_tau(family: Family, m_max: int = M_MAX, k_max: int = K_MAX,
             grid: Optional[EpsGrid] = None) -> ClassificationReport:
    """``sup_{|x| <= eps^-m} |d^alpha u_eps| <= eps^(-mN)`` with one N per alpha."""
    grid = grid or default_grid()
    params = _params(grid, m_max=m_max, k_max=k_max)
    ms = list(range(1, m_max + 1))
    per_alpha = {}
    ratios_all = {}
    inconclusive = None
    for alpha in _alphas(family, k_max):
        ratios = {}
        for m in ms:
            fit = sweep(family, alpha, Ball(m), grid).fit
            s = _slope(fit)
            ratios[m] = -s / m
            if _unreliable(fit) and inconclusive is None:
                inconclusive = (alpha, m, fit.max_residual)
        ratios_all[alpha] = ratios
        growth = _grows(ratios, ms)
        if growth is not None:
            lo, hi, inc = growth
            return ClassificationReport(
                "tau", Verdict.FAIL,
                witnesses={"alpha": alpha, "ratio_table": ratios, "m_range": [lo, hi]},
                diagnostics={"reason": "-e(m)/m keeps growing with m", "increase": inc,
                             "decided_by": {"alpha": alpha, "m": hi}, "ratios": ratios_all},
                grid=grid.describe(), params=params)
        finite = [ratios[m] - TOL / m for m in ms if math.isfinite(ratios[m])]
        per_alpha[alpha] = max(0, math.ceil(max(finite))) if finite else 0
    if inconclusive is not None:
        alpha, m, res = inconclusive
        return ClassificationReport(
            "tau", Verdict.INCONCLUSIVE, witnesses={"alpha": alpha, "m": m},
            diagnostics={"residual": res, "ratios": ratios_all},
            grid=grid.describe(), params=params)
    decided = max(per_alpha, key=lambda a: per_alpha[a])
    return ClassificationReport(
        "tau", Verdict.PASS,
        witnesses={"N": per_alpha[decided], "N_per_alpha": per_alpha, "decided_by": {"alpha": decided}},
        diagnostics={"ratios": ratios_all}, grid=grid.describe(), params=params)


def test_schwartz(family: Family, m_max: int = M_MAX, k_max: int = K_MAX,
                  decay_max: int = DECAY_MAX, grid: Optional[EpsGrid] = None) -> ClassificationReport:
    """Annulus bounds ``sup_{eps^-m <= |x| <= eps^-m-1} |d^alpha u_eps| <= eps^(mk - N)``."""
    grid = grid or default_grid()
    params = _params(grid, m_max=m_max, k_max=k_max, decay_max=decay_max)
    ms = list(range(1, m_max + 1))
    exps = {}
    witnesses = {}
    violations = []
    inconclusive = None
    for alpha in _alphas(family, k_max):
        f = {}
        for m in ms:
            fit = sweep(family, alpha, Annulus(m), grid).fit
            f[m] = _slope(fit)
            if fit.max_residual > RESIDUAL_TOL and not fit.saturated_zero:
                # super-polynomial decay has curvature but is harmless
                if _pessimistic(fit) < m * decay_max + 1 and inconclusive is None:
                    inconclusive = (alpha, m, fit.max_residual)
        exps[alpha] = f
        for k in range(decay_max + 1):
            need = {m: m * k - f[m] for m in ms}
            growth = _grows(need, ms)
            if growth is not None:
                violations.append({"alpha": alpha, "k": k, "m": growth[1], "N_needed": need})
            else:
                finite = [v for v in need.values() if math.isfinite(v)]
                witnesses[(alpha, k)] = max(0, math.ceil(max(finite) - TOL)) if finite else 0
    if violations:
        v = violations[0]
        return ClassificationReport(
            "schwartz", Verdict.FAIL,
            witnesses={"alpha": v["alpha"], "k": v["k"], "m": v["m"]},
            diagnostics={"violations": violations, "exponents": exps,
                         "decided_by": {"alpha": v["alpha"], "k": v["k"], "m": v["m"]}},
            grid=grid.describe(), params=params)
    if inconclusive is not None:
        alpha, m, res = inconclusive
        return ClassificationReport(
            "schwartz", Verdict.INCONCLUSIVE, witnesses={"alpha": alpha, "m": m},
            diagnostics={"residual": res, "exponents": exps}, grid=grid.describe(), params=params)
    n = max(witnesses.values()) if witnesses else 0
    return ClassificationReport(
        "schwartz", Verdict.PASS, witnesses={"N": n, "N_per_alpha_k": witnesses},
        diagnostics={"exponents": exps}, grid=grid.describe(), params=params)


def _exterior_condition(family, grid, m_max, k_max, cap):
    exps = {}
    for alpha in _alphas(family, k_max):
        for m in range(1, m_max + 1):
            fit = sweep(family, alpha, Exterior(m, cap), grid).fit
            s = min(_slope(fit), _pessimistic(fit)) if fit.max_residual > RESIDUAL_TOL else _slope(fit)
            exps[(alpha, m)] = s
            if s < m - TOL:
                return False, {"alpha": alpha, "m": m, "exponent": s}, exps
    return True, None, exps


def _moment_condition(family, grid, k_max, beta_max, cap):
    """One N for ``sup |x^beta d^alpha u_eps|`` over all beta (d = 1 weights ``|x|^beta``)."""
    table = {}
    region = Ball(cap)
    betas = list(range(beta_max + 1))
    for alpha in _alphas(family, k_max):
        need = {}
        for beta in betas:
            fit = sweep(family, alpha, region, grid, weight=float(beta)).fit
            need[beta] = -_slope(fit)
        table[alpha] = need
        growth = _grows(need, betas)
        if growth is not None:
            return False, {"alpha": alpha, "beta": growth[1], "N_needed": need}, table
    finite = [v for t in table.values() for v in t.values() if math.isfinite(v)]
    return True, {"N": max(0, math.ceil(max(finite) - TOL)) if finite else 0}, table


def test_slowscale_support(family: Family, m_max: int = M_MAX, grid: Optional[EpsGrid] = None,
                           k_max: int = 2, beta_max: int = 4) -> ClassificationReport:
    """Exterior bounds ``sup_{|x| >= eps^(-1/m)} |u_eps| <= eps^m``.

    Sub-reports check the same bound for derivatives up to ``k_max`` and the
    single-N moment bound ``sup |x^beta d^alpha u_eps| <= eps^-N``.
    """
    grid = grid or default_grid()
    cap = float(m_max)
    params = _params(grid, m_max=m_max, k_max=k_max, beta_max=beta_max, exterior_cap=cap)
    ok, bad, exps = _exterior_condition(family, grid, m_max, 0, cap)
    subs = {}
    ok6, bad6, exps6 = _exterior_condition(family, grid, m_max, k_max, cap)
    subs["derivatives"] = ClassificationReport(
        "slowscale_support_derivatives", Verdict.PASS if ok6 else Verdict.FAIL,
        witnesses=bad6 or {"k_max": k_max}, diagnostics={"exponents": exps6},
        grid=grid.describe(), params=params)
    if family.dim == 1:
        ok8, w8, table = _moment_condition(family, grid, k_max, beta_max, cap)
        subs["moments"] = ClassificationReport(
            "slowscale_support_moments", Verdict.PASS if ok8 else Verdict.FAIL,
            witnesses=w8, diagnostics={"N_needed": table}, grid=grid.describe(), params=params)
    verdict = Verdict.PASS if ok else Verdict.FAIL
    witnesses = {"m_max": m_max} if ok else dict(bad, decided_by={"m": bad["m"]})
    return ClassificationReport("slowscale_support", verdict, witnesses=witnesses,
                                diagnostics={"exponents": exps}, grid=grid.describe(),
                                params=params, sub_reports=subs)


def test_invertible(family: Family, m_max: int = M_MAX, grid: Optional[EpsGrid] = None) -> ClassificationReport:
    """``inf_{|x| <= eps^-m} |u_eps| >= eps^n`` for some n per m."""
    grid = grid or default_grid()
    params = _params(grid, m_max=m_max)
    witness = {}
    for m in range(1, m_max + 1):
        sw = sweep(family, (0,) * family.dim, Ball(m), grid, mode="inf")
        tail = sw.logmag[grid.tail_indices]
        if np.any(np.isneginf(tail)):
            eps0 = float(grid.eps[grid.tail_indices][np.argmax(np.isneginf(tail))])
            return ClassificationReport(
                "invertible", Verdict.FAIL, witnesses={"m": m, "zero_at_eps": eps0},
                diagnostics={"reason": "u_eps vanishes at a sampled point", "decided_by": {"m": m}},
                grid=grid.describe(), params=params)
        fit = sw.fit
        if len(fit.window_slopes) == 2 and fit.window_slopes[1] > fit.window_slopes[0] + GROWTH_TOL:
            return ClassificationReport(
                "invertible", Verdict.FAIL, witnesses={"m": m, "window_slopes": fit.window_slopes},
                diagnostics={"reason": "infimum decays faster than every power of eps",
                             "decided_by": {"m": m}},
                grid=grid.describe(), params=params)
        witness[m] = max(0, math.ceil(fit.slope - TOL))
    return ClassificationReport("invertible", Verdict.PASS, witnesses={"n": witness},
                                grid=grid.describe(), params=params)
