"""The acceptance battery behind ``gfa verify``.

Each criterion measures quantities, compares them with an independent
oracle or a stated value at a fixed tolerance, and returns a Row.
Everything is deterministic: random inputs come from seeded generators.
"""
from __future__ import annotations

import json
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import __version__, dsl
from .report import Verdict, sanitize

RUNTIME_BUDGET = 600.0


@dataclass
class Row:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def as_dict(self, timing: bool = True) -> dict:
        d = {"criterion": self.name, "passed": self.passed, "detail": sanitize(self.detail)}
        if timing:
            d["seconds"] = round(self.seconds, 2)
        return d


# ---------------------------------------------------------------- exact layer


def _random_exact(rng: random.Random):
    from .scale import normalize

    terms = []
    for _ in range(rng.randint(0, 3)):
        c = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 4))
        a = Fraction(rng.randint(-12, 12), rng.randint(1, 4))
        terms.append((c, a, rng.randint(0, 2)))
    return normalize(terms)


def check_exact_laws(n: int = 10_000, seed: int = 0) -> dict:
    """Ultrametric sharp norm, valuation additivity, idempotent algebra; exact."""
    from .scale import INF, Idempotent, interleave, sharp_norm, valuation

    rng = random.Random(seed)
    bad = {"ultrametric": 0, "valuation": 0, "idempotent": 0}
    width = 21
    for t in range(n):
        x, y, z = (_random_exact(rng) for _ in range(3))
        for a, b in ((x, y), (y, z), (x, z)):
            if sharp_norm(a + b) > max(sharp_norm(a), sharp_norm(b)):
                bad["ultrametric"] += 1
        xy = x * y
        for a, b, ab in ((x, y, xy), (xy, z, xy * z)):
            va, vb = valuation(a), valuation(b)
            want = INF if INF in (va, vb) else va + vb
            if valuation(ab) != want:
                bad["valuation"] += 1
        e = Idempotent.from_mask([rng.random() < 0.5 for _ in range(width)])
        f = Idempotent.from_mask([rng.random() < 0.5 for _ in range(width)])
        g = Idempotent.from_mask([rng.random() < 0.5 for _ in range(width)])
        ok = (
            e * e == e
            and not (e * e.complement()).as_array(width).any()
            and e.complement().complement() == e
            and e * f == f * e
            and (e * f) * g == e * (f * g)
            and e * Idempotent.all() == e
            and (e * Idempotent.none()).tag == "none"
            and (e.as_array(width) | e.complement().as_array(width)).all()
            and interleave(x, y, Idempotent.all()) == y
            and interleave(x, y, Idempotent.none()) == x
        )
        if ok and t % 100 == 0:
            from .scale import default_grid

            grid = default_grid()
            xs, ys, zs = x.sample(grid), y.sample(grid), z.sample(grid)
            one = interleave(xs, ys, e).total()
            ok = (np.array_equal(interleave(xs, xs, e).total(), xs.total())
                  and np.array_equal(interleave(interleave(xs, ys, e), zs, e).total(),
                                     interleave(xs, zs, e).total())
                  and np.array_equal(one, np.where(e.as_array(width), ys.total(), xs.total())))
        if not ok:
            bad["idempotent"] += 1
    return {"triples": n, "violations": bad, "passed": not any(bad.values())}


def check_valuation_estimator(count: int = 50, seed: int = 1) -> dict:
    """Fitted slope versus exact valuation on the default grid."""
    from .scale import default_grid, fit_exponent, normalize, valuation

    rng = random.Random(seed)
    grid = default_grid()
    worst_plain = worst_log = 0.0
    for _ in range(count):
        a0 = Fraction(rng.randint(-16, 16), rng.randint(1, 4))
        terms = [(Fraction(rng.randint(1, 3)) * rng.choice([-1, 1]), a0, 0)]
        for _ in range(rng.randint(0, 2)):
            gap = Fraction(rng.randint(1, 4), 2)
            terms.append((Fraction(rng.randint(1, 3)), a0 + gap, 0))
        x = normalize(terms)
        worst_plain = max(worst_plain, abs(fit_exponent(x.sample(grid)).slope - float(valuation(x))))
        xl = normalize([(c, a, 1 if a == a0 else 0) for c, a, _ in terms])
        worst_log = max(worst_log, abs(fit_exponent(xl.sample(grid)).slope - float(valuation(xl))))
    return {"worst_plain": worst_plain, "worst_log": worst_log,
            "passed": worst_plain <= 0.05 and worst_log <= 0.1}


# ---------------------------------------------------------------- DSL


def check_dsl(probes: int = 100) -> dict:
    """Round trip on the grammar corpus; symbolic first and second derivatives
    versus high-precision numerical differentiation."""
    from .corpus import DERIVATIVE_FAMILIES, GRAMMAR_CORPUS
    from .family import family_from_expr
    from .oracles import mp_partial

    roundtrip = 0
    for text in GRAMMAR_CORPUS:
        e = dsl.parse(text)
        printed = dsl.to_text(e)
        if dsl.parse(printed) is e and dsl.to_text(dsl.parse(printed)) == printed:
            roundtrip += 1
    worst = {}
    for text, dim, (lo, hi), eps_list in DERIVATIVE_FAMILIES:
        fam = family_from_expr(text, dim)
        side = probes if dim == 1 else int(math.ceil(math.sqrt(probes)))
        pts = np.linspace(lo, hi, side)
        P = pts.reshape(-1, 1) if dim == 1 else np.array([(a, b) for a in pts for b in pts])
        w = 0.0
        for eps in eps_list:
            for j in range(dim):
                for order in ((1, 2) if dim == 1 else (1,)):
                    alpha = tuple(order if i == j else 0 for i in range(dim))
                    sym = fam.deriv(alpha, eps, P)
                    ref = np.array([
                        mp_partial(fam.expr, f"x{j + 1}",
                                   dict({f"x{i + 1}": float(p[i]) for i in range(dim)}, eps=eps), order)
                        for p in P])
                    floor = 1e-10 * float(np.max(np.abs(ref)))
                    rel = np.abs(sym - ref) / np.maximum(np.abs(ref), floor)
                    w = max(w, float(np.max(rel)))
        worst[text] = w
    worst_all = max(worst.values())
    return {"corpus": len(GRAMMAR_CORPUS), "roundtrip_ok": roundtrip, "derivative_rel_error": worst,
            "worst": worst_all,
            "passed": roundtrip == len(GRAMMAR_CORPUS) == 40 and worst_all <= 1e-6}


# ---------------------------------------------------------------- growth classes


def check_prop34(k_max: int = 4) -> dict:
    """Ball exponents at least ``m^2`` in size, moderate, not tau."""
    from .classify import Ball, sweep, test_moderate, test_tau
    from .examples import make_prop34_family

    fam = make_prop34_family()
    exps = {m: sweep(fam, 0, Ball(m)).fit.slope for m in (1, 2, 3)}
    mod = test_moderate(fam, k_max=k_max)
    tau = test_tau(fam, k_max=k_max)
    ratios = tau.witnesses.get("ratio_table", {})
    ms = sorted(ratios)
    rising = len(ms) >= 2 and all(ratios[b] > ratios[a] for a, b in zip(ms, ms[1:]))
    ok = (all(exps[m] <= -m * m for m in exps) and mod.verdict == Verdict.PASS
          and tau.verdict == Verdict.FAIL and rising)
    return {"ball_exponents": exps, "moderate": mod.verdict.value, "tau": tau.verdict.value,
            "minus_e_over_m": ratios, "passed": ok}


class Battery:
    """Shares expensive classification results between criteria."""

    def __init__(self):
        self._reports: dict = {}
        self._canon = None

    def canonical(self):
        if self._canon is None:
            from .examples import canonical_families

            self._canon = canonical_families()
        return self._canon

    def family(self, name: str):
        return next(c for c in self.canonical() if c.name == name)

    def report(self, name: str, test: str):
        key = (name, test)
        if key not in self._reports:
            from .suite import RunParams, run_test

            c = self.family(name)
            params = RunParams(k_max=c.params.get("k_max", 8), grid=c.grid)
            self._reports[key] = run_test(test, c.family, params)
        return self._reports[key]

    def check_hierarchy(self) -> dict:
        from .suite import expectation_key, hierarchy_violations, passed

        table, violations, mismatches = {}, {}, {}
        for c in self.canonical():
            tests = ["moderate", "tau", "schwartz", "slowscale-support"]
            if "slowscale_spectrum" in c.expected:
                tests += ["slowscale-spectrum", "gs-infinity"]
            got = {expectation_key(t): passed(self.report(c.name, t)) for t in tests}
            table[c.name] = got
            v = hierarchy_violations(got)
            if v:
                violations[c.name] = v
            wrong = {k: got[k] for k, want in c.expected.items() if k in got and got[k] != want}
            if wrong:
                mismatches[c.name] = wrong
        return {"verdicts": table, "violations": violations, "expectation_mismatches": mismatches,
                "passed": not violations and not mismatches}

    def check_gs_infinity(self) -> dict:
        from .examples import builtin
        from .fourier import spectrum_peaks
        from .scale import geometric_grid

        sides = {}
        for name in ("bump", "modulated_bump", "mollifier"):
            r = self.report(name, "gs-infinity")
            sides[name] = (r.verdict.value, r.witnesses.get("failing_sides"))
        peaks = spectrum_peaks(builtin("modulated_bump"), geometric_grid(6, 14, tail=8))
        products = {e: abs(xi) * e for e, xi in peaks.items()}
        ok = (sides["bump"] == ("Pass", [])
              and sides["modulated_bump"] == ("Fail", ["spectrum"])
              and sides["mollifier"] == ("Fail", ["spectrum"])
              and all(0.9 <= p <= 1.1 for p in products.values()))
        return {"verdicts": sides, "peak_xi_times_eps": products, "passed": ok}


# ---------------------------------------------------------------- the counterexample


EX510_PROBES = (-0.6, -0.2, 0.3, 0.7, 2.5)


def check_example_510(m_check: int = 3) -> dict:
    from .examples import Example510Config, drop_slope, make_example_510, verify_example_510

    cfg = Example510Config()
    fam, oracle = make_example_510(cfg)
    worst = 0.0
    count = 0
    for m in range(1, 4):
        for n in range(1, 9):
            eps = cfg.eps(m, n)
            s = eps ** (m + 1)
            for k in range(0, 7):
                for d in EX510_PROBES:
                    got = fam.deriv(k, eps, np.array([d * s]), anchor=cfg.a(m))[0].real
                    ref = oracle.derivative(m, n, k, d * s)
                    count += 1
                    if ref == 0.0:
                        worst = max(worst, 0.0 if got == 0.0 else math.inf)
                    else:
                        worst = max(worst, abs(got - ref) / abs(ref))
    # the stated point values at a_m and at x_eps = a_m + eps^(m+1)
    stated = 0.0
    vanish = True
    for m in range(1, 4):
        for n in (2, 5, 8):
            eps = cfg.eps(m, n)
            for k in range(m, 7):
                got = fam.deriv(k, eps, np.array([0.0]), anchor=cfg.a(m))[0].real
                ref = oracle.at_peak(m, n, k)
                if (k - m) % 2:
                    # odd derivatives of the even kernel vanish at its centre
                    scale = eps ** (-(m + 1) * (k - m + 1))
                    vanish &= got == 0 and abs(ref) <= 1e-9 * scale
                else:
                    stated = max(stated, abs(got - ref) / abs(ref))
                at_x = fam.deriv(k, eps, np.array([eps ** (m + 1)]), anchor=cfg.a(m))[0]
                vanish &= at_x == 0
    report = verify_example_510(cfg, m_check=m_check)
    drops = {m: drop_slope(m, range(m, 9), cfg) for m in (1, 2, 3)}
    drop_ok = all(abs(d["slope"] - d["expected"]) <= 0.05 * abs(d["expected"]) for d in drops.values())
    ok = bool(worst <= 1e-6 and stated <= 1e-6 and vanish and report.passed and drop_ok)
    return {"oracle_points": count, "worst_rel_error": float(worst), "stated_values_rel_error": float(stated),
            "vanishing_values_exact": bool(vanish), "sub_verdicts": report.witnesses["matches"],
            "drop_slopes": {m: d["slope"] for m, d in drops.items()}, "passed": ok}


def check_convexity() -> dict:
    from .classify import ak_sequence, test_convexity
    from .examples import Example510Config, builtin, make_example_510
    from .scale import union_grid

    results = {}
    ak = ak_sequence(builtin("mollifier"), (0.0,))
    results["mollifier@0"] = (test_convexity(ak), ak)
    cfg = Example510Config()
    fam, _ = make_example_510(cfg)
    for m in (1, 2, 3):
        ak = ak_sequence(fam, (cfg.a(m),), grid=union_grid([cfg.branch(m)]))
        results[f"example510@a{m}"] = (test_convexity(ak), ak)
    out = {}
    ok = True
    for name, (rep, ak) in results.items():
        finite = [a for a in ak.a_k if math.isfinite(a)]
        dropped = len(finite) >= 2 and min(finite) < finite[0] - 0.5
        ok &= dropped and rep.passed
        out[name] = {"a_k": ak.a_k, "drop": dropped, "verdict": rep.verdict.value}
    return {"sequences": out, "passed": ok}


def check_regularity_agreement() -> dict:
    from .classify import (ak_sequence, test_classical_regular, test_pointstar_regular,
                           test_regularity_on_compact)
    from .examples import Example510Config, builtin, make_example_510

    cfg = Example510Config()
    fam, _ = make_example_510(cfg)
    grid = cfg.grid()
    cases = {}
    r = test_regularity_on_compact(builtin("bump"), (-2.0, 2.0))
    cases["bump[-2,2]"] = (r.witnesses["pointstar_everywhere"], r.witnesses["classical"], True)
    moll = builtin("mollifier")
    p = test_pointstar_regular(ak_sequence(moll, (0.0,))).passed
    c = test_classical_regular(moll, (0.0,)).passed
    cases["mollifier@0"] = (p, c, False)
    r = test_regularity_on_compact(fam, (cfg.a(3) / 2, 1.0), grid=grid)
    cases["example510[a3/2,1]"] = (r.witnesses["pointstar_everywhere"], r.witnesses["classical"], False)
    r = test_regularity_on_compact(fam, (-1.0, -0.1), grid=grid)
    cases["example510[-1,-0.1]"] = (r.witnesses["pointstar_everywhere"], r.witnesses["classical"], True)
    disagreements = [k for k, (p, c, _) in cases.items() if p != c]
    wrong = [k for k, (p, c, want) in cases.items() if not (p == c == want)]
    return {"cases": {k: {"pointstar": p, "classical": c, "expected": w} for k, (p, c, w) in cases.items()},
            "disagreements": disagreements, "passed": not disagreements and not wrong}


# ---------------------------------------------------------------- Fourier


FOURIER_FAMILIES = ("bump", "gauss", "mollifier", "modulated_bump", "oscillatory_bump", "shifted_gauss")


def check_fourier_engine(eps_exponents=range(4, 11)) -> dict:
    from .examples import builtin
    from .fourier import dft_family, inverse_dft, parseval_check, test_function_panel

    panel = test_function_panel()
    worst_parseval = worst_inverse = 0.0
    for name in FOURIER_FAMILIES:
        fam = builtin(name)
        for k in eps_exponents:
            eps = 2.0 ** -k
            for phi in panel:
                worst_parseval = max(worst_parseval, parseval_check(fam, phi, eps))
            sp = dft_family(fam, eps)
            x, u = inverse_dft(sp)
            inner = np.abs(x) <= 0.8 * sp.L
            worst_inverse = max(worst_inverse, float(np.max(np.abs(u[inner] - fam.value(eps, x[inner])))))
    sp = dft_family(builtin("gauss"), 2.0 ** -6)
    analytic = math.sqrt(math.pi) * np.exp(-sp.xi_grid ** 2 / 4)
    gauss_err = float(np.max(np.abs(sp.values - analytic)))
    return {"parseval": worst_parseval, "inversion": worst_inverse, "gauss_analytic": gauss_err,
            "passed": worst_parseval <= 1e-8 and worst_inverse <= 1e-7 and gauss_err <= 1e-8}


def check_tempered_equality() -> dict:
    from .examples import builtin
    from .family import family_from_expr
    from .fourier import test_tempered_equality

    eps_bump = family_from_expr("eps*bump(x1)", 1, name="eps_bump", support_radius=lambda e: 1.0)
    fams = {"oscillatory_bump": builtin("oscillatory_bump"), "bump": builtin("bump"), "eps_bump": eps_bump}
    out = {}
    agree = 0
    for name, fam in fams.items():
        r = test_tempered_equality(fam)
        out[name] = {"verdict": r.verdict.value, **r.witnesses}
        agree += r.verdict == Verdict.PASS
        if name == "oscillatory_bump":
            slopes = r.diagnostics["pairing_exponents"]
    min_slope = min(slopes.values())
    return {"families": out, "agreements": agree, "oscillatory_pairing_min_exponent": min_slope,
            "passed": agree == 3 and min_slope >= 8}


# ---------------------------------------------------------------- battery


def _determinism() -> dict:
    """Two fresh computations of the same reports serialize to identical bytes."""
    from .examples import builtin
    from .suite import RunParams, run_test

    def once():
        fam = builtin("mollifier")
        reports = [run_test(t, fam, RunParams(k_max=2)).as_dict() for t in ("moderate", "tau")]
        return json.dumps(sanitize(reports), sort_keys=True)

    a, b = once(), once()
    return {"identical": a == b, "bytes": len(a), "passed": a == b}


def criteria(quick: bool = False) -> list:
    """``(name, callable, time limit in seconds or None)`` in run order."""
    if quick:
        return [
            ("exact-layer laws", lambda: check_exact_laws(2000), None),
            ("valuation estimator", check_valuation_estimator, None),
            ("DSL round trip and derivatives", lambda: check_dsl(probes=20), None),
            ("one family per class", _quick_classes, None),
            ("Gaussian transform", _quick_gauss, None),
            ("determinism", _determinism, None),
        ]
    battery = Battery()
    return [
        ("exact-layer laws", check_exact_laws, 5.0),
        ("valuation estimator", check_valuation_estimator, 5.0),
        ("log-power family", check_prop34, 30.0),
        ("class hierarchy", battery.check_hierarchy, None),
        ("spike counterexample", check_example_510, 180.0),
        ("convexity of -a_k", check_convexity, None),
        ("pointstar vs classical", check_regularity_agreement, None),
        ("Fourier engine", check_fourier_engine, None),
        ("G_S-infinity", battery.check_gs_infinity, None),
        ("tempered equality", check_tempered_equality, None),
        ("DSL round trip and derivatives", check_dsl, None),
        ("determinism", _determinism, None),
    ]


def _quick_classes() -> dict:
    from .examples import builtin, make_prop34_family
    from .suite import RunParams, run_test

    p = RunParams(k_max=2)
    got = {
        "bump schwartz": run_test("schwartz", builtin("bump"), p).verdict,
        "x_squared tau": run_test("tau", builtin("x_squared"), p).verdict,
        "x_squared schwartz": run_test("schwartz", builtin("x_squared"), p).verdict,
        "prop34 moderate": run_test("moderate", make_prop34_family(), p).verdict,
        "prop34 tau": run_test("tau", make_prop34_family(), p).verdict,
    }
    want = [Verdict.PASS, Verdict.PASS, Verdict.FAIL, Verdict.PASS, Verdict.FAIL]
    return {"verdicts": {k: v.value for k, v in got.items()},
            "passed": list(got.values()) == want}


def _quick_gauss() -> dict:
    from .examples import builtin
    from .fourier import dft_family

    sp = dft_family(builtin("gauss"), 2.0 ** -6)
    err = float(np.max(np.abs(sp.values - math.sqrt(math.pi) * np.exp(-sp.xi_grid ** 2 / 4))))
    return {"gauss_analytic": err, "passed": err <= 1e-8}


def run_criterion(name: str, fn: Callable, limit: Optional[float] = None) -> Row:
    t = time.perf_counter()
    detail = fn()
    seconds = time.perf_counter() - t
    passed = bool(detail.pop("passed"))
    if limit is not None:
        # wall time varies between runs; it is reported in the row, not in the detail
        passed = passed and seconds <= limit
        detail["time_limit"] = limit
    return Row(name, passed, detail, seconds)


def run_battery(quick: bool = False, stream=None) -> list:
    rows = []
    start = time.perf_counter()
    for name, fn, limit in criteria(quick):
        row = run_criterion(name, fn, limit)
        rows.append(row)
        if stream is not None:
            mark = "PASS" if row.passed else "FAIL"
            print(f"{mark}  {name:32s} {row.seconds:7.1f}s", file=stream, flush=True)
    total = time.perf_counter() - start
    if not quick:
        row = Row("runtime budget", total <= RUNTIME_BUDGET, {"budget": RUNTIME_BUDGET}, total)
        rows.append(row)
        if stream is not None:
            mark = "PASS" if row.passed else "FAIL"
            print(f"{mark}  {row.name:32s} {total:7.1f}s total", file=stream, flush=True)
    if stream is not None:
        print(f"gfa {__version__}: {sum(r.passed for r in rows)}/{len(rows)} criteria passed", file=stream)
    return rows
