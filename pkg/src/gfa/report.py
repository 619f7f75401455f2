"""Verdicts and classification reports."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np


class Verdict(str, enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


class PreconditionError(ValueError):
    """A test was called on a family that does not meet its hypothesis."""


def sanitize(obj):
    """Turn reports into plain JSON-able data; infinities become strings."""
    if isinstance(obj, ClassificationReport):
        return obj.as_dict()
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): sanitize(v)
                for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return float(obj) if obj.denominator != 1 else int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [sanitize(obj.real), sanitize(obj.imag)]
    return obj


@dataclass
class ClassificationReport:
    test_name: str
    verdict: Verdict
    witnesses: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    grid: Optional[dict] = None
    params: dict = field(default_factory=dict)
    sub_reports: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    @property
    def failed(self) -> bool:
        return self.verdict is Verdict.FAIL

    def as_dict(self) -> dict:
        out = {
            "test": self.test_name,
            "verdict": self.verdict.value,
            "witnesses": sanitize(self.witnesses),
            "diagnostics": sanitize(self.diagnostics),
            "params": sanitize(self.params),
        }
        if self.grid is not None:
            out["grid"] = sanitize(self.grid)
        if self.sub_reports:
            out["sub_reports"] = {k: v.as_dict() for k, v in self.sub_reports.items()}
        return out

    def summary(self) -> str:
        parts = [f"{self.test_name}: {self.verdict.value}"]
        for key in ("N", "n", "decided_by"):
            if key in self.witnesses:
                parts.append(f"{key}={sanitize(self.witnesses[key])}")
        return "  ".join(parts)
