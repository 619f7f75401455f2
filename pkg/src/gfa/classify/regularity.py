"""Pointwise regularity: the a_k sequence and the four regularity notions.

``a_k`` is the exponent of ``max_{|beta| = k} sup_{|x - x0| <= r} |d^beta u_eps|``
in the limit of small balls.  Per-ball exponents only grow as the ball
shrinks, so the smallest-radius fit is taken as the limit and flagged as
converged when halving the radius no longer moves it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..family import Family
from ..points import GenPoint, is_compactly_supported
from ..report import ClassificationReport, Verdict
from ..scale import EpsGrid, default_grid
from .regions import ClassicalBall, PointNet, SharpBall, order_sweep

TOL = 0.1
MONOTONE_TOL = 0.05
CONVEX_TOL = 0.15
CONVERGE_TOL = 0.1
K_MAX = 8
N_MAX = 6
BOUNDED = 1e12
DEFAULT_RADII = tuple(2.0**-j for j in range(2, 11))


@dataclass
class AkSequence:
    x0: tuple
    k_values: list
    a_k: list
    table: dict
    converged: list
    radii: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "x0": list(self.x0), "k": self.k_values, "a_k": self.a_k,
            "converged": self.converged,
            "per_radius": {f"{r:g}": v for r, v in self.table.items()},
        }


def _x0(x0, dim: int) -> tuple:
    if isinstance(x0, (int, float)):
        x0 = (float(x0),)
    x0 = tuple(float(v) for v in x0)
    if len(x0) != dim:
        raise ValueError("point dimension mismatch")
    return x0


def _exponent(sw) -> float:
    return math.inf if sw.fit.saturated_zero else sw.fit.slope


def ak_sequence(family: Family, x0, k_max: int = K_MAX, radius_schedule: Optional[Sequence[float]] = None,
                grid: Optional[EpsGrid] = None) -> AkSequence:
    """Exponents ``a_k`` near a classical point ``x0`` for ``k = 0..k_max``."""
    grid = grid or default_grid()
    radii = sorted(radius_schedule or DEFAULT_RADII, reverse=True)
    if len(radii) < 2:
        raise ValueError("need at least two radii")
    if k_max > family.max_order:
        from ..family import DerivativeOrderError
        raise DerivativeOrderError(f"k_max = {k_max} exceeds the family's order {family.max_order}")
    x0 = _x0(x0, family.dim)
    ks = list(range(k_max + 1))
    table = {}
    for r in radii:
        region = ClassicalBall(x0, r)
        table[r] = [_exponent(order_sweep(family, k, region, grid)) for k in ks]
    rmin, rnext = radii[-1], radii[-2]
    a = table[rmin]
    conv = []
    for k in ks:
        x, y = table[rmin][k], table[rnext][k]
        if math.isinf(x) and math.isinf(y):
            conv.append(x == y)
        else:
            conv.append(abs(x - y) <= CONVERGE_TOL)
    return AkSequence(x0, ks, a, table, conv, radii)


def _finite_pairs(seq):
    return [(k, v) for k, v in seq if math.isfinite(v)]


def test_convexity(ak: AkSequence) -> ClassificationReport:
    """After the first drop, ``-a_k`` has non-decreasing increments."""
    a = list(zip(ak.k_values, ak.a_k))
    drop = None
    for (k0, v0), (k1, v1) in zip(a, a[1:]):
        if math.isfinite(v1) and v1 < v0 - TOL:
            drop = k0
            break
    if drop is None:
        return ClassificationReport("convexity", Verdict.PASS, witnesses={"drop": None},
                                    diagnostics={"note": "no drop in a_k; nothing to test",
                                                 "a_k": ak.a_k})
    post = _finite_pairs([(k, v) for k, v in a if k >= drop])
    if not all(ak.converged[k] for k, _ in post):
        return ClassificationReport("convexity", Verdict.INCONCLUSIVE,
                                    witnesses={"drop": drop},
                                    diagnostics={"reason": "a_k not converged", "converged": ak.converged,
                                                 "a_k": ak.a_k})
    neg = [-v for _, v in post]
    inc = [b - c for c, b in zip(neg, neg[1:])]
    second = [y - x for x, y in zip(inc, inc[1:])]
    for i, s in enumerate(second):
        if s < -CONVEX_TOL:
            return ClassificationReport(
                "convexity", Verdict.FAIL,
                witnesses={"k": post[i + 1][0], "second_difference": s},
                diagnostics={"increments": inc, "a_k": ak.a_k, "decided_by": {"k": post[i + 1][0]}})
    return ClassificationReport("convexity", Verdict.PASS,
                                witnesses={"drop": drop, "increments": inc,
                                           "min_second_difference": min(second) if second else None},
                                diagnostics={"a_k": ak.a_k})


def test_pointstar_regular(ak: AkSequence) -> ClassificationReport:
    """``a_k`` non-decreasing in ``k``."""
    if not all(ak.converged):
        bad = [k for k, c in zip(ak.k_values, ak.converged) if not c]
        return ClassificationReport("pointstar_regular", Verdict.INCONCLUSIVE,
                                    witnesses={"unconverged_k": bad},
                                    diagnostics={"a_k": ak.a_k, "x0": list(ak.x0)})
    for k in range(1, len(ak.a_k)):
        prev = max(ak.a_k[:k])
        if ak.a_k[k] < prev - TOL:
            return ClassificationReport(
                "pointstar_regular", Verdict.FAIL,
                witnesses={"k": ak.k_values[k], "a_k": ak.a_k[k], "previous_max": prev},
                diagnostics={"a_k": ak.a_k, "x0": list(ak.x0), "decided_by": {"k": ak.k_values[k]},
                             "consequence": "a drop forces a_j -> -inf as j -> inf"})
    return ClassificationReport("pointstar_regular", Verdict.PASS,
                                witnesses={"a_k": ak.a_k}, diagnostics={"x0": list(ak.x0)})


def uniform_bound(exps: Sequence[float]) -> tuple:
    """Whether one ``N`` bounds ``-e_k`` over all tested orders.

    ``N`` is read off the lower half of the orders; the upper half must not
    fall below ``-N``.  Returns ``(ok, N, failing_k)``.
    """
    ks = list(range(len(exps)))
    lower = ks[: (len(ks) + 1) // 2]
    upper = ks[(len(ks) + 1) // 2:]
    low = [exps[k] for k in lower if math.isfinite(exps[k])]
    n = max(0, math.ceil(-min(low) - TOL)) if low else 0
    for k in upper:
        if exps[k] < -n - TOL:
            return False, n, k
    return True, n, None


def test_classical_regular(family: Family, x0, k_max: int = K_MAX, grid: Optional[EpsGrid] = None,
                           radius_schedule: Optional[Sequence[float]] = None,
                           half_width: float = 0.0) -> ClassificationReport:
    """A neighbourhood and one N bounding all derivatives of order <= k_max.

    With ``half_width > 0`` the neighbourhood is taken around the whole
    interval ``x0 +- half_width`` (regularity on a compact box).
    """
    grid = grid or default_grid()
    x0 = _x0(x0, family.dim)
    radii = sorted(radius_schedule or DEFAULT_RADII)
    tried = {}
    for r in radii:
        region = ClassicalBall(x0, half_width + r)
        exps = [_exponent(order_sweep(family, k, region, grid)) for k in range(k_max + 1)]
        ok, n, bad = uniform_bound(exps)
        tried[r] = {"exponents": exps, "N": n, "failing_k": bad}
        if ok:
            return ClassificationReport(
                "classical_regular", Verdict.PASS,
                witnesses={"N": n, "r": r}, diagnostics={"tried": tried, "x0": list(x0)},
                grid=grid.describe(), params={"k_max": k_max, "half_width": half_width})
    worst = tried[radii[0]]
    return ClassificationReport(
        "classical_regular", Verdict.FAIL,
        witnesses={"k": worst["failing_k"], "r": radii[0]},
        diagnostics={"tried": tried, "x0": list(x0), "reason": "no radius admits a single N",
                     "decided_by": {"k": worst["failing_k"]}},
        grid=grid.describe(), params={"k_max": k_max, "half_width": half_width})


def test_check_regular(family: Family, x0: GenPoint, k_max: int = K_MAX,
                       grid: Optional[EpsGrid] = None) -> ClassificationReport:
    """Derivatives along the net ``x_eps`` bounded by one power ``eps^-N``."""
    grid = grid or x0.grid or default_grid()
    region = PointNet(x0)
    exps = [_exponent(order_sweep(family, k, region, grid)) for k in range(k_max + 1)]
    ok, n, bad = uniform_bound(exps)
    if ok:
        return ClassificationReport("check_regular", Verdict.PASS, witnesses={"N": n},
                                    diagnostics={"b_k": exps}, grid=grid.describe(),
                                    params={"k_max": k_max})
    return ClassificationReport("check_regular", Verdict.FAIL,
                                witnesses={"k": bad, "b_k": exps[bad], "N_from_low_orders": n},
                                diagnostics={"b_k": exps, "decided_by": {"k": bad}},
                                grid=grid.describe(), params={"k_max": k_max})


def test_tilde_regular(family: Family, x0: GenPoint, k_max: int = K_MAX, grid: Optional[EpsGrid] = None,
                       n_max: int = N_MAX, n: Optional[int] = None) -> ClassificationReport:
    """Some sharp ball ``|x - x_eps| <= eps^n`` with one N for all orders."""
    grid = grid or x0.grid or default_grid()
    ns = [n] if n is not None else list(range(1, n_max + 1))
    tried = {}
    for nn in ns:
        region = SharpBall(x0, nn)
        exps = [_exponent(order_sweep(family, k, region, grid)) for k in range(k_max + 1)]
        ok, bound, bad = uniform_bound(exps)
        tried[nn] = {"exponents": exps, "N": bound, "failing_k": bad}
        if ok:
            return ClassificationReport("tilde_regular", Verdict.PASS, witnesses={"N": bound, "n": nn},
                                        diagnostics={"tried": tried}, grid=grid.describe(),
                                        params={"k_max": k_max, "n_max": n_max})
    return ClassificationReport("tilde_regular", Verdict.FAIL,
                                witnesses={"n_searched": ns, "k": tried[ns[-1]]["failing_k"]},
                                diagnostics={"tried": tried, "reason": "every sharp ball fails",
                                             "decided_by": {"n": ns[-1]}},
                                grid=grid.describe(), params={"k_max": k_max, "n_max": n_max})


def test_sharp_regular(family: Family, x0: GenPoint, n: Optional[int] = None, k_max: int = K_MAX,
                       grid: Optional[EpsGrid] = None, n_max: int = N_MAX) -> ClassificationReport:
    """Both sharp notions at a generalized point; Pass iff both pass."""
    if not is_compactly_supported(x0, [(-BOUNDED, BOUNDED)] * x0.dim):
        raise ValueError("the generalized point must be compactly supported")
    check = test_check_regular(family, x0, k_max, grid)
    tilde = test_tilde_regular(family, x0, k_max, grid, n_max, n)
    verdict = Verdict.PASS if check.passed and tilde.passed else Verdict.FAIL
    return ClassificationReport("sharp_regular", verdict,
                                witnesses={"check": check.verdict, "tilde": tilde.verdict},
                                sub_reports={"check": check, "tilde": tilde},
                                params={"k_max": k_max, "n_max": n_max})


def compact_probes(family: Family, box: tuple, grid: Optional[EpsGrid] = None, count: int = 9) -> list:
    """Evenly spaced points of ``[lo, hi]`` plus the family's feature centres inside it."""
    grid = grid or default_grid()
    lo, hi = box
    pts = set(np.round(np.linspace(lo, hi, count), 15).tolist())
    for i in grid.tail_indices:
        for c, _ in family.hints(float(grid.eps[i])):
            if lo <= c <= hi:
                pts.add(float(c))
    return sorted(pts)


def test_regularity_on_compact(family: Family, box: tuple, k_max: int = K_MAX,
                               grid: Optional[EpsGrid] = None,
                               radius_schedule: Optional[Sequence[float]] = None) -> ClassificationReport:
    """Compare pointstar regularity at probe points with classical regularity on ``[lo, hi]``.

    Pass means the two verdicts agree; the two verdicts are in the witnesses.
    """
    if family.dim != 1:
        raise ValueError("compact probing is implemented for d = 1")
    grid = grid or default_grid()
    lo, hi = box
    if not lo <= hi:
        raise ValueError("empty interval")
    probes = compact_probes(family, box, grid)
    subs = {}
    point_ok = True
    for p in probes:
        ak = ak_sequence(family, (p,), k_max, radius_schedule, grid)
        rep = test_pointstar_regular(ak)
        subs[f"pointstar@{p:.6g}"] = rep
        if not rep.passed:
            point_ok = False
    classical = test_classical_regular(family, ((lo + hi) / 2,), k_max, grid, radius_schedule,
                                       half_width=(hi - lo) / 2)
    subs["classical"] = classical
    agree = point_ok == classical.passed
    return ClassificationReport(
        "regularity_on_compact", Verdict.PASS if agree else Verdict.FAIL,
        witnesses={"pointstar_everywhere": point_ok, "classical": classical.passed, "agree": agree},
        diagnostics={"probes": probes, "box": list(box)}, sub_reports=subs,
        grid=grid.describe(), params={"k_max": k_max})
