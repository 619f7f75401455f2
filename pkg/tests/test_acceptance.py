"""The acceptance criteria, one test each, at their stated tolerances.

Each test runs the battery function behind ``gfa verify`` and then checks
the measured quantities against an independent oracle or the stated
value, so a bug in the battery's own pass flag cannot hide a failure.
Run with ``pytest -v`` to see one PASS/FAIL line per criterion in the
terminal summary.
"""
import json
import math
import subprocess
import sys
import time

import pytest

from gfa import verify

pytestmark = pytest.mark.slow

TIMINGS: dict = {}


def timed(key, fn, *args, **kwargs):
    t = time.perf_counter()
    out = fn(*args, **kwargs)
    TIMINGS[key] = time.perf_counter() - t
    return out


@pytest.fixture(scope="module")
def battery():
    return verify.Battery()


def test_exact_layer_laws(report_line):
    d = timed("exact", verify.check_exact_laws, 10_000)
    ok = d["triples"] == 10_000 and not any(d["violations"].values()) and TIMINGS["exact"] < 5.0
    report_line("exact-layer laws", ok,
                f"violations {d['violations']} in {TIMINGS['exact']:.1f}s (limit 5s)")
    assert ok


def test_valuation_estimator(report_line):
    d = timed("valuation", verify.check_valuation_estimator, 50)
    ok = d["worst_plain"] <= 0.05 and d["worst_log"] <= 0.1 and TIMINGS["valuation"] < 5.0
    report_line("valuation estimator", ok,
                f"worst |slope - v| {d['worst_plain']:.2e} plain, {d['worst_log']:.3f} with log factor")
    assert ok


def test_log_power_family(report_line):
    d = timed("logpower", verify.check_prop34)
    exps, ratios = d["ball_exponents"], d["minus_e_over_m"]
    # log-space closed form: sup over |x| <= eps^-m is exp(log(1+eps^-2m)^2/log(1/eps)) ~ eps^(-4m^2)
    closed_form = all(abs(exps[m] + 4 * m * m) <= 0.01 * 4 * m * m for m in exps)
    ms = sorted(ratios)
    superlinear = all(ratios[b] - ratios[a] >= 1.0 for a, b in zip(ms, ms[1:]))
    ok = (all(exps[m] <= -m * m for m in exps) and closed_form and d["moderate"] == "Pass"
          and d["tau"] == "Fail" and superlinear and TIMINGS["logpower"] < 30.0)
    report_line("log-power family", ok,
                f"ball exponents {[round(exps[m], 3) for m in (1, 2, 3)]}, moderate {d['moderate']}, "
                f"tau {d['tau']}, -e(m)/m {[round(ratios[m], 2) for m in ms]}")
    assert ok


def test_class_hierarchy(report_line, battery):
    from gfa.examples import canonical_families
    from gfa.suite import hierarchy_violations

    d = timed("hierarchy", battery.check_hierarchy)
    expected = {c.name: c.expected for c in canonical_families()}
    mismatched = [(n, k) for n, got in d["verdicts"].items() for k, v in got.items()
                  if k in expected[n] and v != expected[n][k]]
    violations = {n: hierarchy_violations(v) for n, v in d["verdicts"].items() if hierarchy_violations(v)}
    ok = not mismatched and not violations and d["passed"]
    report_line("class hierarchy", ok,
                f"{len(d['verdicts'])} families, {len(violations)} violations, "
                f"{len(mismatched)} verdicts off their annotation")
    assert ok


def test_spike_counterexample(report_line):
    d = timed("spike", verify.check_example_510)
    slopes_ok = all(abs(s + (m + 1)) <= 0.05 * (m + 1) for m, s in d["drop_slopes"].items())
    ok = (d["worst_rel_error"] <= 1e-6 and d["stated_values_rel_error"] <= 1e-6
          and d["vanishing_values_exact"] and all(d["sub_verdicts"].values())
          and slopes_ok and TIMINGS["spike"] < 180.0)
    report_line("spike counterexample", ok,
                f"oracle error {d['worst_rel_error']:.1e} over {d['oracle_points']} points, "
                f"sub-verdicts {sum(d['sub_verdicts'].values())}/{len(d['sub_verdicts'])}, "
                f"drop slopes {[round(s, 3) for s in d['drop_slopes'].values()]}, {TIMINGS['spike']:.0f}s")
    assert ok


def test_convexity_of_minus_ak(report_line):
    d = timed("convexity", verify.check_convexity)
    worst = math.inf
    for seq in d["sequences"].values():
        a = seq["a_k"]
        first_drop = next(k for k in range(len(a) - 1) if a[k + 1] < a[k] - 0.1)
        neg = [-v for v in a[first_drop:]]
        second = [neg[i + 2] - 2 * neg[i + 1] + neg[i] for i in range(len(neg) - 2)]
        worst = min([worst] + second)
    ok = worst >= -0.15 and len(d["sequences"]) == 4 and all(s["drop"] for s in d["sequences"].values())
    report_line("convexity of -a_k", ok,
                f"{len(d['sequences'])} sequences with a drop, min second difference {worst:.3f}")
    assert ok


def test_pointstar_classical_agreement(report_line):
    d = timed("agreement", verify.check_regularity_agreement)
    cases = d["cases"]
    ok = all(c["pointstar"] == c["classical"] == c["expected"] for c in cases.values())
    report_line("pointstar vs classical", ok,
                f"{len(cases)} probe sets, {len(d['disagreements'])} disagreements")
    assert ok


def test_fourier_engine(report_line):
    d = timed("fourier", verify.check_fourier_engine)
    ok = d["parseval"] <= 1e-8 and d["inversion"] <= 1e-7 and d["gauss_analytic"] <= 1e-8
    report_line("Fourier engine", ok,
                f"Parseval {d['parseval']:.1e}, inversion {d['inversion']:.1e}, "
                f"Gaussian {d['gauss_analytic']:.1e}")
    assert ok


def test_gs_infinity_sides(report_line, battery):
    d = timed("gs", battery.check_gs_infinity)
    sides = d["verdicts"]
    # shift theorem: the modulated spectrum is the bump spectrum centred at 1/eps
    products = d["peak_xi_times_eps"]
    ok = (sides["bump"] == ("Pass", []) and sides["modulated_bump"] == ("Fail", ["spectrum"])
          and sides["mollifier"] == ("Fail", ["spectrum"]) and len(products) == 9
          and all(0.9 <= p <= 1.1 for p in products.values()))
    report_line("G_S-infinity", ok,
                f"{ {k: v[0] for k, v in sides.items()} }, peak*eps in "
                f"[{min(products.values()):.4f}, {max(products.values()):.4f}]")
    assert ok


def test_tempered_equality_agreement(report_line):
    d = timed("tempered", verify.check_tempered_equality)
    fams = d["families"]
    agree = sum(f["pairing_negligible"] == f["spectrum_vanishes"] for f in fams.values())
    ok = agree == 3 and d["oscillatory_pairing_min_exponent"] >= 8
    report_line("tempered equality", ok,
                f"agreement {agree}/3, oscillatory pairing exponent >= "
                f"{d['oscillatory_pairing_min_exponent']}")
    assert ok


def test_dsl_round_trip_and_derivatives(report_line):
    d = timed("dsl", verify.check_dsl, 100)
    ok = d["corpus"] == 40 and d["roundtrip_ok"] == 40 and d["worst"] <= 1e-6
    report_line("DSL", ok, f"round trip {d['roundtrip_ok']}/40, worst derivative error {d['worst']:.1e}")
    assert ok


def test_determinism_and_runtime(report_line, tmp_path):
    runs = []
    for i in range(2):
        out = tmp_path / f"quick{i}.json"
        subprocess.run([sys.executable, "-m", "gfa", "verify", "--quick", "--json", str(out)],
                       check=True, capture_output=True)
        runs.append(out.read_bytes())
    fresh = verify._determinism()
    total = sum(TIMINGS.values())
    complete = len(TIMINGS) == 11
    ok = runs[0] == runs[1] and fresh["identical"] and complete and total <= verify.RUNTIME_BUDGET
    criteria = json.loads(runs[0])["criteria"]
    report_line("determinism and runtime", ok,
                f"quick JSON identical {runs[0] == runs[1]} ({len(criteria)} criteria), "
                f"fresh reports identical {fresh['identical']}, battery time {total:.0f}s "
                f"over {len(TIMINGS)} criteria (budget {verify.RUNTIME_BUDGET:.0f}s)")
    assert ok
