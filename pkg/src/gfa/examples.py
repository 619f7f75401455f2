"""Explicit families: the interleaved counterexample at accumulating points
``a_m``, the non-tempered family ``(1+|x|^2)^(log(1+|x|^2)/log(1/eps))``,
and the canonical corpus with expected verdicts.

The counterexample, for ``eps = eps_{m,n}`` and ``s = eps^(m+1)``::

    u_eps(x) = (1/s) int_0^x (x-t)^(m-1)/(m-1)! phi((t - a_m)/s) dt

and ``u_eps = 0`` for eps off the double sequence.  With ``delta = (x - a_m)/s``:

* ``k >= m``: ``D^k u = s^-(k-m+1) phi^(k-m)(delta)``;
* ``k < m``, ``j = m-1-k``: ``D^k u = s^j / j! int_{-1}^{min(delta,1)} (delta-sigma)^j phi(sigma) dsigma``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Optional

import numpy as np

from . import kernels
from .family import DSLFamily, Family, PiecewiseFamily, family_from_expr
from .points import GenPoint
from .scale import EpsGrid, SampledScalar, union_grid

GL_NODES = 96


# ---------------------------------------------------------------- the counterexample


@dataclass(frozen=True)
class Example510Config:
    m_cap: int = 6
    n_cap: int = 24
    n_min: int = 6
    tail_per_branch: int = 8
    max_order: int = 16

    def __post_init__(self):
        if not 1 <= self.m_cap <= 6:
            raise ValueError("m_cap must lie in 1..6")
        if not 1 <= self.n_min < self.n_cap:
            raise ValueError("need 1 <= n_min < n_cap")
        if self.tail_per_branch > self.n_cap - self.n_min + 1:
            raise ValueError("tail longer than the branches")

    @staticmethod
    def a(m: int) -> float:
        """``a_m = 2^-m``."""
        return 2.0 ** (-m)

    @staticmethod
    def eps(m: int, n: int) -> float:
        """``eps_{m,n} = 2^-(n + 1/(m+1))``."""
        return 2.0 ** (-(n + 1.0 / (m + 1)))

    @staticmethod
    def exponent(m: int, n: int) -> Fraction:
        """``-log2 eps_{m,n}`` as an exact rational."""
        return n + Fraction(1, m + 1)

    def branch(self, m: int) -> list:
        return [self.eps(m, n) for n in range(self.n_min, self.n_cap + 1)]

    def grid(self, ms=None) -> EpsGrid:
        ms = list(ms or range(1, self.m_cap + 1))
        return union_grid([self.branch(m) for m in ms], self.tail_per_branch)

    def table(self) -> dict:
        return {self.eps(m, n): (m, n)
                for m in range(1, self.m_cap + 1) for n in range(1, self.n_cap + 1)}


def _gl(n: int = GL_NODES):
    return np.polynomial.legendre.leggauss(n)


def truncated_moment_log(j: int, delta: np.ndarray) -> tuple:
    """``log|I_j(delta)|`` and its sign, ``I_j(delta) = int_{-1}^{min(delta,1)} (delta-s)^j phi(s) ds``."""
    delta = np.asarray(delta, dtype=float)
    logmag = np.full(delta.shape, -np.inf)
    sign = np.zeros(delta.shape)
    inner = (delta > -1) & (delta < 1)
    if np.any(inner):
        d = delta[inner]
        x, w = _gl()
        half = (d + 1.0) / 2.0
        s = -1.0 + half[:, None] * (x[None, :] + 1.0)
        vals = half * (((d[:, None] - s) ** j * kernels.bump(s)) @ w)
        with np.errstate(divide="ignore"):
            logmag[inner] = np.log(np.abs(vals))
        sign[inner] = np.sign(vals)
    outer = delta >= 1
    if np.any(outer):
        d = delta[outer]
        # expand (delta - s)^j; factor delta^j out so huge delta cannot overflow
        total = np.zeros(len(d))
        for i in range(0, j + 1, 2):
            total += comb(j, i) * kernels.bump_moment(i) * d ** (-float(i))
        with np.errstate(divide="ignore"):
            logmag[outer] = j * np.log(d) + np.log(np.abs(total))
        sign[outer] = np.sign(total)
    return logmag, sign


def _branch_log(m: int, eps: float, k: int, x: np.ndarray, anchor: float) -> tuple:
    s = eps ** (m + 1)
    delta = ((anchor - Example510Config.a(m)) + x) / s
    if k >= m:
        lk, sign = kernels.bump_log(delta, k - m)
        return lk - (k - m + 1) * math.log(s), sign
    j = m - 1 - k
    li, sign = truncated_moment_log(j, delta)
    return li + j * math.log(s) - math.lgamma(j + 1), sign


def make_example_510(config: Optional[Example510Config] = None):
    """The interleaved family and an oracle of independently computed values."""
    cfg = config or Example510Config()
    table = cfg.table()

    def dispatch(eps):
        return table.get(float(eps))

    def log_rule(branch):
        m, _ = branch

        def fn(alpha, eps, x, anchor):
            lg, _ = _branch_log(m, eps, alpha[0], x[:, 0], float(anchor[0]))
            return lg

        return fn

    def rule(branch):
        m, _ = branch

        def fn(alpha, eps, x, anchor):
            lg, sign = _branch_log(m, eps, alpha[0], x[:, 0], float(anchor[0]))
            with np.errstate(over="ignore"):
                return (sign * np.exp(lg)).astype(complex)

        return fn

    def hints(eps):
        b = dispatch(eps)
        if b is None:
            return []
        m, _ = b
        return [(cfg.a(m), eps ** (m + 1))]

    fam = PiecewiseFamily(1, dispatch, rule, log_rule, name="example510",
                          max_order=cfg.max_order, hints=hints)
    return fam, Example510Oracle(cfg)


@dataclass
class Example510Oracle:
    """Values computed without the closed forms used by the family.

    Orders ``k < m`` integrate the defining integral with adaptive
    quadrature; orders ``k >= m`` take kernel derivatives from a Cauchy
    contour integral instead of the polynomial recurrence.
    """

    config: Example510Config
    contour_points: int = 512

    def kernel_derivative(self, j: int, t: float) -> float:
        """``phi^(j)(t)`` by the Cauchy integral over a circle inside the unit disc."""
        if abs(t) >= 1:
            return 0.0
        r = 0.5 * (1.0 - abs(t))
        theta = 2 * np.pi * np.arange(self.contour_points) / self.contour_points
        z = t + r * np.exp(1j * theta)
        f = np.exp(-1.0 / (1.0 - z * z))
        val = math.factorial(j) / (r**j) * np.mean(f * np.exp(-1j * j * theta))
        return float(val.real)

    def derivative(self, m: int, n: int, k: int, x_offset: float) -> float:
        """``D^k u_{eps_{m,n}}(a_m + x_offset)``."""
        from scipy.integrate import quad

        eps = self.config.eps(m, n)
        s = eps ** (m + 1)
        delta = x_offset / s
        if k >= m:
            return s ** (-(k - m + 1)) * self.kernel_derivative(k - m, delta)
        j = m - 1 - k
        upper = min(delta, 1.0)
        if upper <= -1:
            return 0.0
        # integrate in t - a_m = s*sigma, keeping (x - t) unscaled
        f = lambda sig: (x_offset - s * sig) ** j / factorial(j) * float(kernels.bump(sig))
        val, _ = quad(f, -1.0, upper, epsabs=0.0, epsrel=1e-13, limit=200)
        return val

    def at_peak(self, m: int, n: int, k: int) -> float:
        """The stated point value ``D^k u(a_m) = eps^-(m+1)(k-m+1) phi^(k-m)(0)``, ``k >= m``."""
        eps = self.config.eps(m, n)
        return eps ** (-(m + 1) * (k - m + 1)) * self.kernel_derivative(k - m, 0.0)

    def integral_bound(self, radius: float) -> float:
        """``e^R int |phi|``: bound for low orders on ``|x| <= R``."""
        return math.exp(radius) * kernels.bump_integral()


def make_x0_net(config: Optional[Example510Config] = None, grid: Optional[EpsGrid] = None) -> GenPoint:
    """``x_eps = a_m + eps^(m+1)`` on the m-th sequence, 0 elsewhere."""
    cfg = config or Example510Config()
    grid = grid or cfg.grid()
    table = cfg.table()
    anchor = np.zeros(len(grid))
    offset = np.zeros(len(grid))
    for i, e in enumerate(grid.eps):
        b = table.get(float(e))
        if b is not None:
            m, _ = b
            anchor[i] = cfg.a(m)
            offset[i] = e ** (m + 1)
    return GenPoint.of(SampledScalar(grid, offset, anchor))


def make_perturbed_net(m0: int, config: Optional[Example510Config] = None,
                       grid: Optional[EpsGrid] = None) -> GenPoint:
    """``y_eps = a_{m0}`` on the m0-th sequence and ``x_eps`` elsewhere."""
    cfg = config or Example510Config()
    grid = grid or cfg.grid()
    x0 = make_x0_net(cfg, grid)
    c = x0.coords[0]
    table = cfg.table()
    offset = c.values.real.copy()
    anchor = c.anchor.copy()
    for i, e in enumerate(grid.eps):
        b = table.get(float(e))
        if b is not None and b[0] == m0:
            offset[i] = 0.0
    return GenPoint.of(SampledScalar(grid, offset, anchor))


def verify_example_510(config: Optional[Example510Config] = None, k_max: int = 8,
                       grid: Optional[EpsGrid] = None, m_check: int = 3, n_max: int = 6):
    """The five regularity claims about the counterexample, each measured.

    Returns a report whose sub-reports are the individual tests and whose
    witnesses say whether each matched the claim.
    """
    from .classify import regularity as reg
    from .report import ClassificationReport, Verdict
    from .points import sharp_distance

    cfg = config or Example510Config()
    grid = grid or cfg.grid()
    fam, _ = make_example_510(cfg)
    subs = {}
    expected = {}

    ak0 = reg.ak_sequence(fam, (0.0,), k_max, grid=grid)
    subs["pointstar_at_0"] = reg.test_pointstar_regular(ak0)
    expected["pointstar_at_0"] = Verdict.PASS
    # the truncated family vanishes below a_{m_cap}, so the neighbourhoods
    # must reach that far to see the accumulating spikes
    radii = [2.0**-j for j in range(1, cfg.m_cap + 1)]
    subs["classical_at_0"] = reg.test_classical_regular(fam, (0.0,), k_max, grid, radii)
    expected["classical_at_0"] = Verdict.FAIL

    x0 = make_x0_net(cfg, grid)
    subs["check_at_x0"] = reg.test_check_regular(fam, x0, k_max, grid)
    expected["check_at_x0"] = Verdict.PASS
    subs["tilde_at_x0"] = reg.test_tilde_regular(fam, x0, k_max, grid, n_max)
    expected["tilde_at_x0"] = Verdict.FAIL

    m0 = 1
    y = make_perturbed_net(m0, cfg, grid)
    subs["check_at_perturbed"] = reg.test_check_regular(fam, y, k_max, grid)
    expected["check_at_perturbed"] = Verdict.FAIL
    distance = sharp_distance(y, x0)

    for m in range(1, m_check + 1):
        am = GenPoint.of(cfg.a(m))
        subs[f"check_at_a{m}"] = reg.test_check_regular(fam, am.sample(grid), k_max, grid)
        expected[f"check_at_a{m}"] = Verdict.FAIL

    matches = {k: subs[k].verdict == v for k, v in expected.items()}
    ok = all(matches.values())
    return ClassificationReport(
        "example510", Verdict.PASS if ok else Verdict.FAIL,
        witnesses={"matches": matches,
                   "perturbation_sharp_distance": distance,
                   "perturbation_bound": math.exp(-(m0 + 1))},
        diagnostics={"expected": {k: v.value for k, v in expected.items()}},
        grid=grid.describe(), params={"k_max": k_max, "m_cap": cfg.m_cap, "n_max": n_max},
        sub_reports=subs)


def drop_slope(m: int, k_range, config: Optional[Example510Config] = None) -> dict:
    """Fitted exponents of ``sup |D^k u|`` near ``a_m`` on the m-th sequence alone,
    and their per-order slope over ``k_range``."""
    from .classify.regions import ClassicalBall, order_sweep

    cfg = config or Example510Config()
    grid = union_grid([cfg.branch(m)])
    fam, _ = make_example_510(cfg)
    region = ClassicalBall((cfg.a(m),), 2.0**-10)
    exps = {k: order_sweep(fam, k, region, grid).fit.slope for k in k_range}
    ks = np.array(list(k_range), dtype=float)
    slope = float(np.polyfit(ks, [exps[k] for k in k_range], 1)[0])
    return {"exponents": exps, "slope": slope, "expected": -(m + 1)}


# ---------------------------------------------------------------- other families

PROP34_TEXT = "(1+x1^2)^(log(1+x1^2)/log(1/eps))"


def make_prop34_family() -> DSLFamily:
    """``(1+|x|^2)^(log(1+|x|^2)/log(1/eps))``: moderate but not in the tau class."""
    return family_from_expr(PROP34_TEXT, 1, name="prop34")


TESTS = ("moderate", "tau", "schwartz", "slowscale_support", "slowscale_spectrum", "gs_infinity")


@dataclass
class CanonicalFamily:
    name: str
    family: Family
    expected: dict
    source: str = ""
    params: dict = field(default_factory=dict)
    grid: Optional[EpsGrid] = None


def _expect(*flags) -> dict:
    return {t: f for t, f in zip(TESTS, flags) if f is not None}


CANONICAL_SOURCES = {
    "bump": ("bump(x1)", _expect(True, True, True, True, True, True)),
    "gauss": ("gauss(x1)", _expect(True, True, True, True, True, True)),
    "mollifier": ("eps^-1*bump(x1/eps)", _expect(True, True, True, True, False, False)),
    "modulated_bump": ("bump(x1)*exp(i*x1/eps)", _expect(True, True, True, True, False, False)),
    "oscillatory_bump": ("bump(x1)*sin(x1/eps)", _expect(True, True, True, True, False, False)),
    "shifted_gauss": ("gauss(x1-1/eps)", _expect(True, True, True, False, True, False)),
    "x_squared": ("x1^2", _expect(True, True, False, False, None, None)),
    "prop34": (PROP34_TEXT, _expect(True, False, False, False, None, None)),
}


def canonical_families(include_example510: bool = True) -> list:
    """The shipped corpus with expected verdicts (True = Pass)."""
    out = []
    for name, (text, expected) in CANONICAL_SOURCES.items():
        fam = family_from_expr(text, 1, name=name)
        if name == "bump":
            fam._support = lambda eps: 1.0
        elif name == "mollifier":
            fam._support = lambda eps: eps
        elif name in ("modulated_bump", "oscillatory_bump"):
            fam._support = lambda eps: 1.0
        params = {"k_max": 4} if name == "prop34" else {}
        out.append(CanonicalFamily(name, fam, expected, text, params))
    if include_example510:
        cfg = Example510Config()
        fam, _ = make_example_510(cfg)
        # off the double sequence the family vanishes, so it needs its own grid
        out.append(CanonicalFamily("example510", fam, _expect(True, True, False, False, None, None),
                                   "programmatic", {"k_max": 2}, cfg.grid()))
    return out


def builtin(name: str) -> Family:
    """Look up a canonical family by name."""
    if name == "example510":
        return make_example_510()[0]
    for c in canonical_families(include_example510=False):
        if c.name == name:
            return c.family
    raise KeyError(name)


BUILTIN_NAMES = tuple(CANONICAL_SOURCES) + ("example510",)
