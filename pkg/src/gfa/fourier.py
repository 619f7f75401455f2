"""Numerical Fourier analysis of one-dimensional families.

Convention: ``u^(xi) = int u(x) e^{-i x xi} dx``.  A window ``[-L, L)`` with
``N`` points is sampled with the trapezoid rule; for smooth functions that
vanish at the window edges this converges faster than any power of the step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .classify.growth import M_MAX, N_MAX, TOL, test_slowscale_support
from .classify.regions import parallel_map
from .family import Family
from .report import ClassificationReport, Verdict
from .scale import EpsGrid, SampledScalar, fit_log_magnitudes, geometric_grid

NPTS_CAP = 2**22
MIN_NPTS = 256
ALIAS_TOL = 1e-6
DFT_TOL = 1e-11
SPECTRUM_TOL = 1e-8
EDGE_DROP = 40.0
NOISE = 64 * np.finfo(float).eps
SPECTRUM_M_MAX = 2


class FourierError(ValueError):
    """The requested transform cannot be computed within budget."""


class BudgetError(FourierError):
    pass


class AliasingError(FourierError):
    pass


def fourier_grid() -> EpsGrid:
    """``eps = 2^-4 .. 2^-14`` with an 8-point tail: the Fourier path keeps ``N <= 2^22``."""
    return geometric_grid(4, 14, tail=8)


@dataclass
class SpectrumSample:
    eps: float
    xi_grid: np.ndarray
    values: np.ndarray
    L: float
    npts: int
    accuracy: float

    @property
    def nyquist(self) -> float:
        return math.pi * self.npts / (2 * self.L)

    @property
    def step(self) -> float:
        return 2 * self.L / self.npts

    def noise_floor(self) -> float:
        """Magnitudes below this are indistinguishable from zero."""
        return 4 * self.accuracy + NOISE * float(np.max(np.abs(self.values)))

    def log_abs(self) -> np.ndarray:
        mag = np.abs(self.values)
        out = np.full(mag.shape, -np.inf)
        keep = mag > self.noise_floor()
        out[keep] = np.log(mag[keep])
        return out

    def as_dict(self) -> dict:
        return {"eps": self.eps, "L": self.L, "npts": self.npts, "accuracy": self.accuracy,
                "nyquist": self.nyquist}


# ---------------------------------------------------------------- windows


def _feature_scale(family: Family, eps: float) -> Optional[float]:
    scales = [s for _, s in family.hints(eps) if s > 0]
    osc = getattr(family, "oscillation_scale", None)
    if osc is not None:
        s = osc(eps)
        if s:
            scales.append(s)
    return min(scales) if scales else None


def choose_window(family: Family, eps: float) -> tuple:
    """``(L, N0)``: a window outside which ``u_eps`` is negligible and a first
    point count resolving its narrowest feature with eight points."""
    if family.dim != 1:
        raise FourierError("the Fourier path is one-dimensional")
    L = 4.0
    r = family.support_radius(eps)
    if r is not None:
        L = max(L, 1.05 * r)
    for c, s in family.hints(eps):
        L = max(L, abs(c) + 12 * s)
    if r is None:
        # grow until the edges sit EDGE_DROP below the peak in log scale
        for _ in range(30):
            x = np.linspace(-L, L, 4097)
            lg = family.log_abs(0, eps, x)
            top = np.max(lg)
            if not np.isfinite(top):
                break
            edge = np.concatenate([lg[:64], lg[-64:]])
            if np.max(edge) < top - EDGE_DROP:
                break
            L *= 2
        else:
            raise BudgetError("no window found on which the family decays")
    h = 1.0 / 8
    s = _feature_scale(family, eps)
    if s is not None:
        h = min(h, s / 8)
    n = max(MIN_NPTS, 1 << math.ceil(math.log2(2 * L / h)))
    if n > NPTS_CAP:
        raise BudgetError(f"resolving eps = {eps:g} needs {n} points, cap is {NPTS_CAP}")
    return L, n


def _xgrid(L: float, n: int) -> np.ndarray:
    return -L + (2 * L / n) * np.arange(n)


def _xi(L: float, n: int) -> np.ndarray:
    """Symmetric frequency grid ``k pi / L``, ``|k| <= n/2``."""
    return (math.pi / L) * np.arange(-n // 2, n // 2 + 1)


def _dft_samples(u: np.ndarray, L: float) -> np.ndarray:
    n = len(u)
    h = 2 * L / n
    F = np.fft.fftshift(np.fft.fft(u))
    k = np.arange(-n // 2, n // 2)
    # x_j = -L + j h contributes the phase e^{i L xi_k} = (-1)^k
    vals = h * F * np.where(k % 2 == 0, 1.0, -1.0)
    # the +Nyquist frequency repeats -Nyquist (n is a multiple of 4)
    return np.concatenate([vals, vals[:1]])


def dft_family(family: Family, eps: float, L: Optional[float] = None, npts: Optional[int] = None,
               tol: float = DFT_TOL, refine: bool = True) -> SpectrumSample:
    """Trapezoid approximation of ``u_eps^`` on a symmetric frequency grid.

    The point count doubles until consecutive results agree within
    ``tol * max|u^|`` or the cap is hit; the reported accuracy is the last
    such difference.  Raises AliasingError when the outer quarter of the
    spectrum still carries more than ``1e-6`` of the energy.
    """
    if family.dim != 1:
        raise FourierError("the Fourier path is one-dimensional")
    L0, n0 = choose_window(family, eps) if (L is None or npts is None) else (L, npts)
    L = float(L if L is not None else L0)
    n = int(npts if npts is not None else max(n0, 1 << math.ceil(math.log2(2 * L / (2 * L0 / n0)))))
    if n & (n - 1) or n < 8:
        raise FourierError("npts must be a power of two")
    if n > NPTS_CAP:
        raise BudgetError(f"npts {n} exceeds the cap {NPTS_CAP}")
    if n == NPTS_CAP:
        n //= 2

    def compute(m):
        return _dft_samples(family.value(eps, _xgrid(L, m)), L)

    coarse = compute(n)
    while True:
        fine = compute(2 * n)
        half = n // 2
        common = fine[n - half: n + half + 1]
        acc = float(np.max(np.abs(common - coarse)))
        scale = float(np.max(np.abs(fine))) or 1.0
        n *= 2
        if not refine or acc <= tol * scale or 2 * n > NPTS_CAP:
            break
        coarse = fine
    energy = np.abs(fine) ** 2
    total = float(np.sum(energy))
    k = np.arange(-n // 2, n // 2 + 1)
    outer = float(np.sum(energy[np.abs(k) > 3 * n // 8]))
    if total > 0 and outer > ALIAS_TOL * total:
        raise AliasingError(f"eps = {eps:g}: {outer / total:.2e} of the energy sits near Nyquist")
    return SpectrumSample(float(eps), _xi(L, n), fine, L, n, acc)


def inverse_dft(sample: SpectrumSample) -> tuple:
    """``(x, u)`` recovered from a spectrum sample on its spatial grid."""
    n, L = sample.npts, sample.L
    vals = sample.values[:-1]
    k = np.arange(-n // 2, n // 2)
    F = vals * np.where(k % 2 == 0, 1.0, -1.0) / sample.step
    u = np.fft.ifft(np.fft.ifftshift(F))
    return _xgrid(L, n), u


def _fourier_sums(family: Family, eps: float, xis: np.ndarray, tol: float) -> tuple:
    L, n = choose_window(family, eps)

    def total(m):
        x = _xgrid(L, m)
        u = family.value(eps, x)
        live = u != 0
        x, u = x[live], u[live]
        h = 2 * L / m
        out = np.empty(len(xis), dtype=complex)
        for lo in range(0, len(xis), 64):
            out[lo:lo + 64] = h * (np.exp(-1j * np.outer(xis[lo:lo + 64], x)) @ u)
        return out, h * float(np.sum(np.abs(u)))

    prev, _ = total(n)
    while True:
        cur, mass = total(2 * n)
        acc = float(np.max(np.abs(cur - prev)))
        n *= 2
        if acc <= tol * mass + NOISE * mass or 2 * n > NPTS_CAP:
            return cur, acc + NOISE * mass, L, n
        prev = cur


def fourier_at(family: Family, eps: float, xis, tol: float = SPECTRUM_TOL) -> tuple:
    """``(u^(xi), accuracy)`` at arbitrary frequencies by direct trapezoid sums,
    doubling the resolution until consecutive sums agree."""
    xis = np.atleast_1d(np.asarray(xis, dtype=float))
    vals, acc, _, _ = _fourier_sums(family, eps, xis, tol)
    return vals, acc


# ---------------------------------------------------------------- test functions


@dataclass(frozen=True)
class TestFunction:
    """A Schwartz test function with its Fourier transform."""

    name: str
    fn: Callable
    fourier: Callable
    support: float
    xi_step: float = 0.25

    __test__ = False

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))


def _hermite_gauss(j: int) -> TestFunction:
    coeffs = np.array(kernels.hermite_poly(j)[::-1], dtype=float)
    # H_j e^{-x^2} = (-1)^j D^j e^{-x^2}, so its transform is (-i xi)^j sqrt(pi) e^{-xi^2/4}
    return TestFunction(
        f"hermite{j}",
        lambda x: np.polyval(coeffs, x) * np.exp(-x * x),
        lambda xi: (-1j * np.asarray(xi)) ** j * math.sqrt(math.pi) * np.exp(-np.asarray(xi) ** 2 / 4),
        8.0)


_BUMP_NODES = 4096


def _bump_fourier(xi):
    """``int bump(x) e^{-i x xi} dx``; the trapezoid rule converges super-algebraically
    because every derivative of the bump vanishes at ``+-1``."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    x = np.linspace(-1, 1, _BUMP_NODES + 1)[1:-1]
    w = kernels.bump(x) * (2.0 / _BUMP_NODES)
    out = np.empty(xi.shape)
    for lo in range(0, len(xi), 256):
        out[lo:lo + 256] = np.cos(np.outer(xi[lo:lo + 256], x)) @ w
    return out


def test_function_panel() -> list:
    """Gauss, Hermite-modulated Gauss for ``j = 1..4``, and the bump."""
    gauss = TestFunction("gauss", lambda x: np.exp(-x * x),
                         lambda xi: math.sqrt(math.pi) * np.exp(-np.asarray(xi) ** 2 / 4), 8.0)
    panel = [gauss] + [_hermite_gauss(j) for j in range(1, 5)]
    panel.append(TestFunction("bump", lambda x: kernels.bump(x), _bump_fourier, 1.0, 1.0 / 128))
    return panel


def test_function(name: str) -> TestFunction:
    for t in test_function_panel():
        if t.name == name:
            return t
    raise KeyError(name)


# ---------------------------------------------------------------- Parseval and pairing


def parseval_check(u: Family, v, eps: float, L: Optional[float] = None,
                   npts: Optional[int] = None) -> float:
    """``|int u^ v dxi - int u v^ dx| / (1 + |int u v^ dx|)``.

    ``v`` is a TestFunction or a family; for a family its transform comes
    from the DFT path.  The frequency integral uses a DFT padded until its
    step resolves ``v``; when that exceeds the point cap it falls back to
    trapezoid sums of ``u^`` at nodes spaced for ``v``.
    """
    if isinstance(v, Family):
        v_eval = lambda x: v.value(eps, x)
        vs = dft_family(v, eps)
        v_hat = lambda x: _interp_spectrum(vs, x)
        v_extent, v_step = max(vs.L, 8.0), 0.25
    else:
        v_eval, v_hat, v_extent, v_step = v, v.fourier, v.support, v.xi_step
    Lu, nu = choose_window(u, eps)
    Lw = max(L or 0.0, Lu, 2 * v_extent + Lu, math.pi / v_step)
    h = 2 * Lu / nu
    n = npts or max(nu, 1 << math.ceil(math.log2(2 * Lw / h)))
    if n < NPTS_CAP:
        spec = dft_family(u, eps, L=Lw, npts=n)
        lhs = (math.pi / spec.L) * _trap_sym(spec.values * v_eval(spec.xi_grid))
        L_x, n_x = spec.L, spec.npts
    else:
        m = int(math.ceil(v_extent / v_step))
        xi = v_step * np.arange(-m, m + 1)
        got, _, L_x, n_x = _fourier_sums(u, eps, xi, DFT_TOL)
        lhs = v_step * complex(np.sum(got * v_eval(xi)))
    x = _xgrid(L_x, n_x)
    ux = u.value(eps, x)
    live = ux != 0
    rhs = (2 * L_x / n_x) * np.sum(ux[live] * v_hat(x[live]))
    return float(abs(lhs - rhs) / (1 + abs(rhs)))


def _trap_sym(vals: np.ndarray) -> complex:
    # endpoints at +-Nyquist are the same sample of a periodic sequence
    return complex(np.sum(vals[1:-1]) + 0.5 * (vals[0] + vals[-1]))


def _interp_spectrum(sample: SpectrumSample, xi):
    xi = np.asarray(xi, dtype=float)
    return np.interp(xi, sample.xi_grid, sample.values.real) + 1j * np.interp(xi, sample.xi_grid, sample.values.imag)


PAIR_NODES = 16
PAIR_TOL = 1e-10
PAIR_MAX_PANELS = 1 << 18


def _pair_one(u: Family, phi: TestFunction, eps: float) -> tuple:
    """``(int u_eps phi, converged)`` by composite Gauss-Legendre with panel doubling."""
    r = u.support_radius(eps)
    W = phi.support if r is None else min(phi.support, r)
    s = _feature_scale(u, eps) or 1.0
    panels = max(8, 1 << math.ceil(math.log2(2 * W / min(s, 1.0))))
    x0, w0 = np.polynomial.legendre.leggauss(PAIR_NODES)

    def rule(p):
        edges = np.linspace(-W, W, p + 1)
        half = (edges[1] - edges[0]) / 2
        x = (edges[:-1, None] + half + half * x0[None, :]).ravel()
        f = u.value(eps, x) * phi(x)
        wts = np.tile(w0 * half, p)
        return complex(np.sum(f * wts)), float(np.sum(np.abs(f) * wts))

    prev, _ = rule(panels)
    while True:
        panels *= 2
        cur, mass = rule(panels)
        if abs(cur - prev) <= PAIR_TOL * abs(cur) + NOISE * mass:
            return (0.0 if abs(cur) <= NOISE * mass else cur), True
        if panels >= PAIR_MAX_PANELS:
            return cur, False
        prev = cur


def pairing_with_status(u: Family, phi: TestFunction, grid: Optional[EpsGrid] = None) -> tuple:
    """``(pairing, unconverged)``: the scalar and the eps values at which the
    quadrature budget ran out before convergence."""
    grid = grid or fourier_grid()
    res = parallel_map(lambda e: _pair_one(u, phi, float(e)), list(grid.eps))
    vals = np.array([v for v, _ in res], dtype=complex)
    bad = [float(e) for e, (_, ok) in zip(grid.eps, res) if not ok]
    return SampledScalar(grid, vals), bad


def pairing(u: Family, phi: TestFunction, grid: Optional[EpsGrid] = None) -> SampledScalar:
    """``eps -> int u_eps phi`` over the grid.  Values below the roundoff level
    of ``int |u_eps phi|`` are exact zeros."""
    return pairing_with_status(u, phi, grid)[0]


def _log_abs_values(values: np.ndarray) -> np.ndarray:
    mag = np.abs(values)
    with np.errstate(divide="ignore"):
        return np.log(mag)


# ---------------------------------------------------------------- tests


def _spectra(family: Family, grid: EpsGrid, tol: float = SPECTRUM_TOL) -> dict:
    eps = [float(grid.eps[i]) for i in grid.tail_indices]
    return dict(zip(eps, parallel_map(lambda e: dft_family(family, e, tol=tol), eps)))


def test_slowscale_spectrum(family: Family, m_max: int = SPECTRUM_M_MAX,
                            grid: Optional[EpsGrid] = None, _spectra_cache: Optional[dict] = None
                            ) -> ClassificationReport:
    """``sup_{|xi| >= eps^(-1/m)} |u_eps^(xi)| <= eps^m`` on the tail of the grid.

    Frequencies beyond the resolved band count as zero: the refinement
    stopped only once they were below the quoted accuracy.
    """
    grid = grid or fourier_grid()
    params = {"m_max": m_max, "tolerance": TOL, "spectrum_tol": SPECTRUM_TOL}
    spectra = _spectra_cache if _spectra_cache is not None else _spectra(family, grid)
    tail = grid.tail_indices
    exps = {}
    for m in range(1, m_max + 1):
        logmag = np.full(len(grid), -np.inf)
        for i in tail:
            e = float(grid.eps[i])
            sp = spectra[e]
            lg = sp.log_abs()
            ext = np.abs(sp.xi_grid) >= e ** (-1.0 / m)
            if np.any(ext):
                logmag[i] = float(np.max(lg[ext]))
        fit = fit_log_magnitudes(grid, logmag)
        s = math.inf if fit.saturated_zero else fit.slope
        exps[m] = s
        if s < m - TOL:
            return ClassificationReport(
                "slowscale_spectrum", Verdict.FAIL,
                witnesses={"m": m, "exponent": s, "decided_by": {"m": m}},
                diagnostics={"exponents": exps, "spectra": [sp.as_dict() for sp in spectra.values()]},
                grid=grid.describe(), params=params)
    return ClassificationReport(
        "slowscale_spectrum", Verdict.PASS, witnesses={"m_max": m_max},
        diagnostics={"exponents": exps, "spectra": [sp.as_dict() for sp in spectra.values()]},
        grid=grid.describe(), params=params)


def spectrum_peaks(family: Family, grid: Optional[EpsGrid] = None) -> dict:
    """``eps -> xi`` at which ``|u_eps^|`` is largest."""
    grid = grid or fourier_grid()
    out = {}
    for e in grid.eps:
        sp = dft_family(family, float(e), tol=SPECTRUM_TOL)
        out[float(e)] = float(sp.xi_grid[int(np.argmax(np.abs(sp.values)))])
    return out


FAST_EXPONENTS = (0.5, 1.0, 2.0)


def _fast_point_checks(family: Family, grid: EpsGrid, spectra: dict, n_max: float) -> dict:
    tail = grid.tail_indices
    out = {}
    for a in FAST_EXPONENTS:
        lu = np.full(len(grid), -np.inf)
        lf = np.full(len(grid), -np.inf)
        for i in tail:
            e = float(grid.eps[i])
            x = e ** (-a)
            lu[i] = float(np.max(family.log_abs(0, e, np.array([-x, x]))))
            sp = spectra[e]
            if x <= sp.nyquist:
                lf[i] = float(np.max(np.interp([-x, x], sp.xi_grid, sp.log_abs())))
        for side, lg in (("u", lu), ("u_hat", lf)):
            fit = fit_log_magnitudes(grid, lg)
            s = math.inf if fit.saturated_zero else fit.slope
            out[f"{side}@eps^-{a:g}"] = {"exponent": s, "negligible": s >= n_max - TOL}
    return out


def test_gs_infinity(family: Family, grid: Optional[EpsGrid] = None, m_max: int = M_MAX,
                     spectrum_m_max: int = SPECTRUM_M_MAX, n_max: float = N_MAX,
                     support_grid: Optional[EpsGrid] = None) -> ClassificationReport:
    """Slow-scale support and slow-scale spectrum together.

    The pointwise checks at ``eps^-1/2``, ``eps^-1`` and ``eps^-2`` are
    diagnostics: a spectrum decaying like ``exp(-sqrt|xi|)`` is negligible
    there only asymptotically, beyond any grid the cap allows.
    """
    if family.dim != 1:
        raise FourierError("the Fourier path is one-dimensional")
    grid = grid or fourier_grid()
    support = test_slowscale_support(family, m_max=m_max, grid=support_grid, k_max=0)
    spectra = _spectra(family, grid)
    spectrum = test_slowscale_spectrum(family, spectrum_m_max, grid, spectra)
    checks = _fast_point_checks(family, grid, spectra, n_max)
    failing = [name for name, r in (("support", support), ("spectrum", spectrum)) if not r.passed]
    verdict = Verdict.PASS if not failing else Verdict.FAIL
    return ClassificationReport(
        "gs_infinity", verdict, witnesses={"failing_sides": failing},
        diagnostics={"fast_scale_points": checks}, grid=grid.describe(),
        params={"m_max": m_max, "spectrum_m_max": spectrum_m_max, "n_max": n_max},
        sub_reports={"support": support, "spectrum": spectrum})


def slow_frequency_panel() -> dict:
    """Slow-scale frequency nets ``xi_eps`` with ``l = log(1/eps)``."""
    return {
        "0": lambda e: 0.0,
        "1": lambda e: 1.0,
        "log": lambda e: math.log(1 / e),
        "log^2": lambda e: math.log(1 / e) ** 2,
        "sqrt_log": lambda e: math.sqrt(math.log(1 / e)),
    }


def _negligible(values: SampledScalar, n_max: float) -> tuple:
    fit = fit_log_magnitudes(values.grid, _log_abs_values(values.values))
    s = math.inf if fit.saturated_zero else fit.slope
    return s >= n_max - TOL, s


def test_tempered_equality(u: Family, grid: Optional[EpsGrid] = None, n_max: float = N_MAX,
                           panel: Optional[Sequence[TestFunction]] = None) -> ClassificationReport:
    """Pairing-negligibility against the test-function panel versus vanishing
    of the spectrum at the slow frequency panel; Pass iff the two agree."""
    grid = grid or fourier_grid()
    panel = list(panel or test_function_panel())
    pair_slopes, pair_ok = {}, []
    inconclusive = []
    for phi in panel:
        values, bad = pairing_with_status(u, phi, grid)
        ok, s = _negligible(values, n_max)
        pair_slopes[phi.name] = s
        tail_eps = set(float(grid.eps[i]) for i in grid.tail_indices)
        if tail_eps.intersection(bad):
            inconclusive.append(phi.name)
        else:
            pair_ok.append(ok)
    freqs = slow_frequency_panel()
    tail = grid.tail_indices
    spec_slopes, spec_ok = {}, []
    vals = {name: np.zeros(len(grid), dtype=complex) for name in freqs}
    for i in tail:
        e = float(grid.eps[i])
        xis = [f(e) for f in freqs.values()]
        got, acc = fourier_at(u, e, xis)
        for name, g in zip(freqs, got):
            vals[name][i] = 0.0 if abs(g) <= 4 * acc else g
    for name in freqs:
        ok, s = _negligible(SampledScalar(grid, vals[name]), n_max)
        spec_slopes[name] = s
        spec_ok.append(ok)
    pairing_negligible = None if inconclusive else all(pair_ok)
    spectrum_vanishes = all(spec_ok)
    params = {"n_max": n_max, "test_functions": [p.name for p in panel],
              "frequency_panel": list(freqs)}
    diagnostics = {"pairing_exponents": pair_slopes, "spectrum_exponents": spec_slopes}
    if pairing_negligible is None:
        return ClassificationReport(
            "tempered_equality", Verdict.INCONCLUSIVE,
            witnesses={"unconverged_pairings": inconclusive, "spectrum_vanishes": spectrum_vanishes},
            diagnostics=diagnostics, grid=grid.describe(), params=params)
    agree = pairing_negligible == spectrum_vanishes
    return ClassificationReport(
        "tempered_equality", Verdict.PASS if agree else Verdict.FAIL,
        witnesses={"pairing_negligible": pairing_negligible, "spectrum_vanishes": spectrum_vanishes},
        diagnostics=diagnostics, grid=grid.describe(), params=params)
