"""Registry of named tests and a runner shared by the command line and the
acceptance battery."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import fourier
from .classify import growth, regularity
from .family import Family
from .report import ClassificationReport, PreconditionError, Verdict
from .scale import EpsGrid, default_grid


@dataclass
class RunParams:
    m_max: int = growth.M_MAX
    k_max: int = growth.K_MAX
    n_max: float = growth.N_MAX
    grid: Optional[EpsGrid] = None
    fourier_grid: Optional[EpsGrid] = None
    x0: tuple = (0.0,)
    extra: dict = field(default_factory=dict)

    def space_grid(self) -> EpsGrid:
        return self.grid or default_grid()

    def freq_grid(self) -> EpsGrid:
        return self.fourier_grid or fourier.fourier_grid()

    def describe(self) -> dict:
        return {"m_max": self.m_max, "k_max": self.k_max, "n_max": self.n_max,
                "grid": self.space_grid().describe(), "fourier_grid": self.freq_grid().describe(),
                "x0": list(self.x0), "tolerance": growth.TOL,
                "residual_tolerance": growth.RESIDUAL_TOL, "growth_tolerance": growth.GROWTH_TOL,
                "fourier_npts_cap": fourier.NPTS_CAP, "fourier_alias_tol": fourier.ALIAS_TOL}


def _regularity_suite(family: Family, p: RunParams) -> ClassificationReport:
    if family.name == "example510":
        from .examples import verify_example_510

        return verify_example_510(k_max=p.k_max, grid=p.grid)
    ak = regularity.ak_sequence(family, p.x0, p.k_max, grid=p.grid)
    subs = {
        "pointstar": regularity.test_pointstar_regular(ak),
        "classical": regularity.test_classical_regular(family, p.x0, p.k_max, p.grid),
        "convexity": regularity.test_convexity(ak),
    }
    agree = subs["pointstar"].verdict == subs["classical"].verdict
    return ClassificationReport(
        "regularity_suite", Verdict.PASS if agree else Verdict.FAIL,
        witnesses={"pointstar_classical_agree": agree, "a_k": ak.a_k},
        grid=p.space_grid().describe(), params={"k_max": p.k_max, "x0": list(p.x0)},
        sub_reports=subs)


TESTS: dict = {
    "moderate": lambda f, p: growth.test_moderate(f, m_max=p.m_max, k_max=p.k_max, grid=p.grid),
    "negligible": lambda f, p: growth.test_negligible(f, m_max=p.m_max, grid=p.grid,
                                                      n_max=p.n_max, k_max=p.k_max),
    "tau": lambda f, p: growth.test_tau(f, m_max=p.m_max, k_max=p.k_max, grid=p.grid),
    "schwartz": lambda f, p: growth.test_schwartz(f, m_max=p.m_max, k_max=p.k_max, grid=p.grid),
    "slowscale-support": lambda f, p: growth.test_slowscale_support(
        f, m_max=p.m_max, grid=p.grid, k_max=min(p.k_max, 2)),
    "invertible": lambda f, p: growth.test_invertible(f, m_max=p.m_max, grid=p.grid),
    "slowscale-spectrum": lambda f, p: fourier.test_slowscale_spectrum(f, grid=p.freq_grid()),
    "gs-infinity": lambda f, p: fourier.test_gs_infinity(f, p.freq_grid(), m_max=p.m_max,
                                                         n_max=p.n_max, support_grid=p.grid),
    "tempered-equality": lambda f, p: fourier.test_tempered_equality(f, p.freq_grid(), p.n_max),
    "pointstar": lambda f, p: regularity.test_pointstar_regular(
        regularity.ak_sequence(f, p.x0, p.k_max, grid=p.grid)),
    "classical": lambda f, p: regularity.test_classical_regular(f, p.x0, p.k_max, p.grid),
    "regularity-suite": _regularity_suite,
}

SPECTRUM_TESTS = ("slowscale-spectrum", "gs-infinity", "tempered-equality")
DEFAULT_TESTS = ("moderate", "tau", "schwartz", "slowscale-support")


def expectation_key(test: str) -> str:
    return test.replace("-", "_")


def run_test(name: str, family: Family, params: RunParams) -> ClassificationReport:
    """Run one registered test; unmet preconditions and budget errors become
    Inconclusive reports."""
    if name not in TESTS:
        raise KeyError(name)
    try:
        return TESTS[name](family, params)
    except PreconditionError as exc:
        return ClassificationReport(expectation_key(name), Verdict.INCONCLUSIVE,
                                    diagnostics={"precondition": str(exc)})
    except fourier.FourierError as exc:
        return ClassificationReport(expectation_key(name), Verdict.INCONCLUSIVE,
                                    diagnostics={"fourier_budget": str(exc)})


def run_tests(family: Family, names, params: Optional[RunParams] = None) -> dict:
    params = params or RunParams()
    return {name: run_test(name, family, params) for name in names}


HIERARCHY = ("slowscale_support", "schwartz", "tau", "moderate")


def hierarchy_violations(verdicts: dict) -> list:
    """Pairs ``(stronger, weaker)`` where the stronger class passed but the weaker failed."""
    out = []
    for i, strong in enumerate(HIERARCHY):
        for weak in HIERARCHY[i + 1:]:
            if verdicts.get(strong) is True and verdicts.get(weak) is False:
                out.append((strong, weak))
    return out


def passed(report: ClassificationReport) -> Optional[bool]:
    if report.verdict == Verdict.INCONCLUSIVE:
        return None
    return report.verdict == Verdict.PASS
