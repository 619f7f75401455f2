"""Families ``(u_eps)_eps`` of smooth functions on R^d.

A family answers two questions at a batch of points: the complex value of
``d^alpha u_eps`` and ``log|d^alpha u_eps|``.  The second is what the
classification engine consumes; it stays finite where the value itself
would overflow or underflow a double.
"""
from __future__ import annotations

import enum
import itertools
import threading
from typing import Callable, Optional

import numpy as np

from . import dsl

DEFAULT_MAX_ORDER = 16
_TINY = 1e-290
_HUGE = 1e290


class FamilyKind(str, enum.Enum):
    DSL = "DSL"
    PIECEWISE = "Piecewise"
    PROGRAMMATIC = "Programmatic"


class DerivativeOrderError(ValueError):
    """Requested derivative order is beyond what the family provides."""


def normalize_alpha(alpha, dim: int) -> tuple:
    if isinstance(alpha, (int, np.integer)):
        if dim != 1:
            raise ValueError("integer derivative orders are only meaningful for d = 1")
        alpha = (int(alpha),)
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != dim or any(a < 0 for a in alpha):
        raise ValueError(f"bad multi-index {alpha} for d = {dim}")
    return alpha


def multi_indices(dim: int, order: int):
    """All multi-indices of length ``dim`` with ``|alpha| = order``."""
    out = []
    for combo in itertools.combinations_with_replacement(range(dim), order):
        a = [0] * dim
        for j in combo:
            a[j] += 1
        out.append(tuple(a))
    return sorted(set(out), reverse=True)


def _points(x, dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if dim == 1 and x.ndim <= 1:
        return x.reshape(-1, 1)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[-1] != dim:
        raise ValueError(f"points must have {dim} coordinates")
    return x


class Family:
    """Base class.  Subclasses implement ``_deriv`` and optionally ``_log_abs``."""

    kind = FamilyKind.PROGRAMMATIC

    def __init__(self, dim: int, name: str = "family", max_order: int = DEFAULT_MAX_ORDER,
                 support_radius: Optional[Callable[[float], float]] = None,
                 hints: Optional[Callable[[float], list]] = None):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = dim
        self.name = name
        self.max_order = max_order
        self._support = support_radius
        self._hints = hints
        # sup/inf results keyed by the sampler; see classify.regions
        self.cache: dict = {}
        self._lock = threading.Lock()

    def check_order(self, alpha: tuple):
        if sum(alpha) > self.max_order:
            raise DerivativeOrderError(
                f"derivative order {sum(alpha)} exceeds the maximum {self.max_order} of {self.name}"
            )

    def support_radius(self, eps: float) -> Optional[float]:
        """Radius outside which ``u_eps`` vanishes identically, if known."""
        return None if self._support is None else float(self._support(eps))

    def hints(self, eps: float) -> list:
        """``(center, scale)`` pairs where features of width ``scale`` sit (1-d)."""
        return [] if self._hints is None else list(self._hints(eps))

    def deriv(self, alpha, eps: float, x, anchor=None) -> np.ndarray:
        """Complex values of ``d^alpha u_eps`` at ``anchor + x``."""
        alpha = normalize_alpha(alpha, self.dim)
        self.check_order(alpha)
        return self._deriv(alpha, float(eps), _points(x, self.dim), _anchor(anchor, self.dim))

    def value(self, eps: float, x, anchor=None) -> np.ndarray:
        return self.deriv((0,) * self.dim, eps, x, anchor)

    def log_abs(self, alpha, eps: float, x, anchor=None) -> np.ndarray:
        """``log|d^alpha u_eps|`` at ``anchor + x``; ``-inf`` marks zeros."""
        alpha = normalize_alpha(alpha, self.dim)
        self.check_order(alpha)
        return self._log_abs(alpha, float(eps), _points(x, self.dim), _anchor(anchor, self.dim))

    def _deriv(self, alpha, eps, x, anchor):
        raise NotImplementedError

    def _log_abs(self, alpha, eps, x, anchor):
        v = self._deriv(alpha, eps, x, anchor)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(v))

    def describe(self) -> dict:
        return {"name": self.name, "dim": self.dim, "kind": self.kind.value}

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r}, dim={self.dim})"


def _anchor(anchor, dim: int) -> np.ndarray:
    if anchor is None:
        return np.zeros(dim)
    a = np.atleast_1d(np.asarray(anchor, dtype=float))
    if a.shape != (dim,):
        raise ValueError("anchor dimension mismatch")
    return a


class DSLFamily(Family):
    """Family given by an expression in ``eps, x1..xd``."""

    kind = FamilyKind.DSL

    def __init__(self, expr: dsl.Expr, dim: int, name: str = "dsl", max_order: int = DEFAULT_MAX_ORDER,
                 support_radius=None, hints=None):
        super().__init__(dim, name, max_order, support_radius, hints)
        used = dsl.max_coordinate(expr)
        if used > dim:
            raise ValueError(f"expression uses x{used} but the family has dimension {dim}")
        self.expr = expr
        self._table = {(0,) * dim: expr}

    def hints(self, eps: float) -> list:
        if self._hints is not None or self.dim != 1:
            return super().hints(eps)
        return [(c, s) for c, s, kind in dsl.affine_features(self.expr, eps) if kind == "kernel"]

    def oscillation_scale(self, eps: float) -> Optional[float]:
        """Shortest feature width among kernels and oscillatory factors (1-d)."""
        if self.dim != 1:
            return None
        scales = [s for _, s, _ in dsl.affine_features(self.expr, eps)]
        return min(scales) if scales else None

    def derivative_expr(self, alpha) -> dsl.Expr:
        """Symbolic ``d^alpha`` of the expression, memoized per multi-index."""
        alpha = normalize_alpha(alpha, self.dim)
        self.check_order(alpha)
        hit = self._table.get(alpha)
        if hit is not None:
            return hit
        j = max(i for i, a in enumerate(alpha) if a)
        lower = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]
        parent = self.derivative_expr(lower)
        with self._lock:
            hit = self._table.get(alpha)
            if hit is None:
                hit = dsl.differentiate(parent, f"x{j + 1}")
                self._table[alpha] = hit
        return hit

    def _deriv(self, alpha, eps, x, anchor):
        return dsl.Evaluator(eps, x + anchor).value(self.derivative_expr(alpha))

    def _log_abs(self, alpha, eps, x, anchor):
        e = self.derivative_expr(alpha)
        pts = x + anchor
        v = dsl.Evaluator(eps, pts).value(e)
        mag = np.abs(v)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(mag)
        bad = ~np.isfinite(mag) | (mag < _TINY) | (mag > _HUGE)
        if np.any(bad):
            out[bad] = dsl.Evaluator(eps, pts[bad]).log(e).real
        return out

    def describe(self) -> dict:
        d = super().describe()
        d["expr"] = dsl.to_text(self.expr)
        return d


class ProgrammaticFamily(Family):
    """Family given by Python callables.

    ``deriv_fn(alpha, eps, x)`` receives absolute points of shape ``(n, d)``
    unless ``anchored`` is true, in which case it is called as
    ``deriv_fn(alpha, eps, x, anchor)`` with offsets ``x`` relative to ``anchor``.
    """

    kind = FamilyKind.PROGRAMMATIC

    def __init__(self, dim: int, deriv_fn: Callable, log_abs_fn: Optional[Callable] = None,
                 name: str = "programmatic", max_order: int = DEFAULT_MAX_ORDER,
                 support_radius=None, hints=None, anchored: bool = False):
        super().__init__(dim, name, max_order, support_radius, hints)
        self._deriv_fn = deriv_fn
        self._log_abs_fn = log_abs_fn
        self._anchored = anchored

    def _call(self, fn, alpha, eps, x, anchor):
        if self._anchored:
            return fn(alpha, eps, x, anchor)
        return fn(alpha, eps, x + anchor)

    def _deriv(self, alpha, eps, x, anchor):
        return np.asarray(self._call(self._deriv_fn, alpha, eps, x, anchor), dtype=complex)

    def _log_abs(self, alpha, eps, x, anchor):
        if self._log_abs_fn is not None:
            return np.asarray(self._call(self._log_abs_fn, alpha, eps, x, anchor), dtype=float)
        return super()._log_abs(alpha, eps, x, anchor)


class PiecewiseFamily(ProgrammaticFamily):
    """Family defined by cases in ``eps``: ``dispatch(eps)`` picks a branch id,
    ``branch(id)`` returns the rule for that branch, and ``None`` means zero."""

    kind = FamilyKind.PIECEWISE

    def __init__(self, dim: int, dispatch: Callable, rules: Callable, log_rules: Optional[Callable] = None,
                 **kwargs):
        self.dispatch = dispatch
        self.rules = rules
        self.log_rules = log_rules

        def deriv_fn(alpha, eps, x, anchor):
            b = dispatch(eps)
            if b is None:
                return np.zeros(x.shape[0], dtype=complex)
            return rules(b)(alpha, eps, x, anchor)

        def log_fn(alpha, eps, x, anchor):
            b = dispatch(eps)
            if b is None:
                return np.full(x.shape[0], -np.inf)
            if log_rules is None:
                with np.errstate(divide="ignore"):
                    return np.log(np.abs(rules(b)(alpha, eps, x, anchor)))
            return log_rules(b)(alpha, eps, x, anchor)

        kwargs.setdefault("name", "piecewise")
        super().__init__(dim, deriv_fn, log_fn, anchored=True, **kwargs)


def family_from_expr(expr, dim: Optional[int] = None, name: str = "dsl",
                     max_order: int = DEFAULT_MAX_ORDER, **kwargs) -> DSLFamily:
    """Build a DSL family from an expression or its source text."""
    if isinstance(expr, str):
        expr = dsl.parse(expr, dim)
    if dim is None:
        dim = max(1, dsl.max_coordinate(expr))
    return DSLFamily(expr, dim, name=name, max_order=max_order, **kwargs)


def parse_family_file(text: str, source: str = "<family>") -> DSLFamily:
    """Read the text format: ``dim = <int>``, ``name = <string>``, ``u = <expr>``.

    ``#`` starts a comment.  The expression may continue on following lines.
    """
    dim = None
    name = None
    expr_lines: list = []
    expr_start = None
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            if expr_start is not None:
                expr_lines.append("")
            continue
        key, sep, rest = line.partition("=")
        key = key.strip()
        if sep and key in ("dim", "name", "u") and expr_start is None:
            if key == "dim":
                try:
                    dim = int(rest.strip())
                except ValueError:
                    raise dsl.ParseError("dim must be an integer", lineno, line.index("=") + 2) from None
                if dim < 1:
                    raise dsl.ParseError("dim must be positive", lineno, line.index("=") + 2)
            elif key == "name":
                name = rest.strip()
            else:
                expr_start = (lineno, line.index("=") + 1)
                expr_lines.append(" " * (line.index("=") + 1) + rest)
            continue
        if expr_start is None:
            raise dsl.ParseError(f"unexpected line in {source}", lineno, 1)
        expr_lines.append(line)
    if expr_start is None:
        raise dsl.ParseError(f"{source} has no 'u = ...' line", 1, 1)
    if dim is None:
        raise dsl.ParseError(f"{source} has no 'dim = ...' line", 1, 1)
    while expr_lines and not expr_lines[-1].strip():
        expr_lines.pop()
    expr = dsl.parse("\n".join(expr_lines), dim, line=expr_start[0])
    return DSLFamily(expr, dim, name=name or source)


def load_family_file(path) -> DSLFamily:
    with open(path, encoding="utf-8") as fh:
        return parse_family_file(fh.read(), str(path))
