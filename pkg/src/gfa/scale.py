"""Asymptotic scalars in the small parameter eps.

Two layers live here.  :class:`ExactScalar` is a finite formal sum
``sum c * eps**a * log(1/eps)**b`` with exact ring operations and an exact
valuation.  :class:`SampledScalar` holds a net sampled on an :class:`EpsGrid`
and is measured with :func:`fit_exponent`, the numerical counterpart of the
valuation.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

INF = math.inf
ZERO_FLOOR = 1e-300

Number = Union[int, float, complex, Fraction]
_EXACT_TYPES = (int, Fraction)


def _exponent(a) -> Union[Fraction, float]:
    if type(a) is Fraction:
        return a
    if isinstance(a, (int, Fraction)):
        return Fraction(a)
    if isinstance(a, float):
        if not math.isfinite(a):
            raise ValueError(f"non-finite eps exponent {a!r}")
        return Fraction(a)
    raise TypeError(f"unsupported eps exponent {a!r}")


def _coeff(c):
    if type(c) in _EXACT_TYPES:
        return c
    if not isinstance(c, numbers.Number):
        raise TypeError(f"coefficient must be a number, got {c!r}")
    if isinstance(c, complex):
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise ValueError(f"non-finite coefficient {c!r}")
        if c.imag == 0:
            return c.real
    elif isinstance(c, float) and not math.isfinite(c):
        raise ValueError(f"non-finite coefficient {c!r}")
    return c


@dataclass(frozen=True)
class ExactScalar:
    """Finite sum of terms ``c * eps**a * log(1/eps)**b``.

    ``terms`` is kept normalized: sorted by ``a`` ascending then ``b``
    descending, unique ``(a, b)`` pairs and no zero coefficients.  Use
    :func:`normalize` or the constructors rather than building it by hand.
    """

    terms: tuple = ()

    @classmethod
    def const(cls, c) -> "ExactScalar":
        return normalize([(c, 0, 0)])

    @classmethod
    def monomial(cls, c=1, a=0, b=0) -> "ExactScalar":
        return normalize([(c, a, b)])

    @classmethod
    def zero(cls) -> "ExactScalar":
        return cls(())

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        other = as_exact(other)
        return normalize(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar(tuple((-c, a, b) for c, a, b in self.terms))

    def __sub__(self, other):
        return self + (-as_exact(other))

    def __rsub__(self, other):
        return as_exact(other) - self

    def __mul__(self, other):
        other = as_exact(other)
        return normalize(
            [(c1 * c2, a1 + a2, b1 + b2) for c1, a1, b1 in self.terms for c2, a2, b2 in other.terms]
        )

    __rmul__ = __mul__

    def __call__(self, eps):
        """Evaluate the net at ``eps`` (scalar or array)."""
        eps = np.asarray(eps, dtype=float)
        L = np.log(1.0 / eps)
        total = np.zeros(eps.shape, dtype=complex)
        for c, a, b in self.terms:
            total = total + complex(c) * eps ** float(a) * L ** b
        return total

    def sample(self, grid: "EpsGrid") -> "SampledScalar":
        return SampledScalar(grid, self(grid.eps))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for c, a, b in self.terms:
            s = f"{c}"
            if a:
                s += f"*eps^{a}"
            if b:
                s += f"*log(1/eps)^{b}"
            parts.append(s)
        return " + ".join(parts)


def as_exact(x) -> ExactScalar:
    if isinstance(x, ExactScalar):
        return x
    if isinstance(x, numbers.Number):
        return ExactScalar.const(x)
    raise TypeError(f"cannot convert {x!r} to ExactScalar")


def normalize(terms: Iterable) -> ExactScalar:
    """Collect like terms, drop zeros and sort."""
    acc: dict = {}
    for c, a, b in terms:
        c = _coeff(c)
        key = (_exponent(a), b if type(b) is int else int(b))
        prev = acc.get(key)
        acc[key] = c if prev is None else prev + c
    out = [(c, a, b) for (a, b), c in acc.items() if c != 0]
    out.sort(key=lambda t: (t[1], -t[2]))
    return ExactScalar(tuple(out))


def valuation(x: ExactScalar) -> float:
    """Smallest eps-exponent; log factors are sub-polynomial and ignored."""
    if x.is_zero():
        return INF
    return x.terms[0][1]


def sharp_norm(x: ExactScalar) -> float:
    v = valuation(x)
    if v == INF:
        return 0.0
    return math.exp(-v)


def tends_to_zero(x: ExactScalar) -> bool:
    return all(a > 0 or (a == 0 and b < 0) for _, a, b in x.terms)


# --------------------------------------------------------------------------
# sampled layer


def _is_geometric(eps: np.ndarray, tol: float = 1e-12) -> bool:
    if len(eps) < 3:
        return True
    r = eps[1:] / eps[:-1]
    return bool(np.all(np.abs(r - r[0]) <= tol * abs(r[0])))


@dataclass(frozen=True, eq=False)
class EpsGrid:
    """Strictly decreasing eps values with a tail window used for fitting.

    ``branches`` partitions the indices into subsequences that are each
    geometric.  A net is measured per branch and the worst branch wins,
    which is how an interleaved net is valued.
    """

    eps: np.ndarray
    tail: tuple = (0, 0)
    branches: tuple = ()

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=float)
        eps.setflags(write=False)
        object.__setattr__(self, "eps", eps)
        if eps.ndim != 1 or len(eps) < 2:
            raise ValueError("grid needs at least two eps values")
        if np.any(eps <= 0) or np.any(eps >= 1):
            raise ValueError("eps values must lie in (0, 1)")
        if np.any(np.diff(eps) >= 0):
            raise ValueError("eps values must be strictly decreasing")
        lo, hi = self.tail
        if hi == 0:
            lo, hi = max(0, len(eps) - 12), len(eps)
        if not (0 <= lo < hi <= len(eps)):
            raise ValueError(f"bad tail window {self.tail}")
        object.__setattr__(self, "tail", (lo, hi))
        branches = self.branches or (tuple(range(len(eps))),)
        branches = tuple(tuple(int(i) for i in br) for br in branches)
        seen = sorted(i for br in branches for i in br)
        if seen != list(range(len(eps))):
            raise ValueError("branches must partition the grid indices")
        for br in branches:
            if not _is_geometric(eps[list(br)]):
                raise ValueError("each branch must be geometrically spaced")
        object.__setattr__(self, "branches", branches)

    def __len__(self):
        return len(self.eps)

    def __eq__(self, other):
        return (
            isinstance(other, EpsGrid)
            and np.array_equal(self.eps, other.eps)
            and self.tail == other.tail
            and self.branches == other.branches
        )

    def __hash__(self):
        return hash((self.eps.tobytes(), self.tail, self.branches))

    @property
    def tail_indices(self) -> np.ndarray:
        return np.arange(*self.tail)

    def branch_tails(self) -> list:
        lo, hi = self.tail
        return [np.array([i for i in br if lo <= i < hi], dtype=int) for br in self.branches]

    def index_of(self, eps: float) -> int:
        hits = np.nonzero(self.eps == eps)[0]
        if len(hits) == 0:
            raise KeyError(f"eps={eps!r} is not on the grid")
        return int(hits[0])

    def describe(self) -> dict:
        return {
            "eps_max": float(self.eps[0]),
            "eps_min": float(self.eps[-1]),
            "count": len(self.eps),
            "tail": list(self.tail),
            "branches": len(self.branches),
        }


def geometric_grid(start: int = 4, stop: int = 24, base: float = 2.0, tail: int = 12) -> EpsGrid:
    """``eps_i = base**-i`` for ``i = start..stop``; tail is the last ``tail`` points."""
    eps = base ** -np.arange(start, stop + 1, dtype=float)
    n = len(eps)
    if tail < 8 or tail > n:
        raise ValueError("tail window needs at least 8 points inside the grid")
    return EpsGrid(eps, (n - tail, n))


def default_grid() -> EpsGrid:
    return geometric_grid(4, 24, tail=12)


def union_grid(branches: Sequence[Sequence[float]], tail_per_branch: int | None = None) -> EpsGrid:
    """Merge several geometric eps sequences into one grid, one branch each.

    Every value of a branch is used for fitting unless ``tail_per_branch``
    restricts to the smallest ones.
    """
    tagged = sorted(((float(e), k) for k, br in enumerate(branches) for e in br), reverse=True)
    eps = np.array([e for e, _ in tagged])
    idx = [[] for _ in branches]
    for i, (_, k) in enumerate(tagged):
        idx[k].append(i)
    if tail_per_branch is not None:
        keep = sorted(i for br in idx for i in br[-tail_per_branch:])
        lo = keep[0]
    else:
        lo = 0
    return EpsGrid(eps, (lo, len(eps)), tuple(tuple(br) for br in idx))


@dataclass(frozen=True, eq=False)
class SampledScalar:
    """A net sampled on a grid.

    ``anchor`` (optional) makes the represented net ``anchor + values``
    without rounding the sum; point nets such as ``a + eps**4`` keep their
    small offsets exact this way.
    """

    grid: EpsGrid
    values: np.ndarray
    anchor: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (len(self.grid),):
            raise ValueError("one value per grid point required")
        if not np.all(np.isfinite(v)):
            raise ValueError("sampled values must be finite")
        object.__setattr__(self, "values", v)
        if self.anchor is not None:
            a = np.asarray(self.anchor, dtype=float)
            if a.shape != v.shape:
                raise ValueError("anchor must match values")
            object.__setattr__(self, "anchor", a)

    def total(self) -> np.ndarray:
        if self.anchor is None:
            return self.values
        return self.anchor + self.values

    def parts(self, i: int) -> tuple:
        """(anchor, offset) at grid index ``i``."""
        a = 0.0 if self.anchor is None else float(self.anchor[i])
        return a, self.values[i]

    def at(self, eps: float) -> complex:
        return complex(self.total()[self.grid.index_of(eps)])

    def _check(self, other) -> "SampledScalar":
        if isinstance(other, ExactScalar):
            return other.sample(self.grid)
        if isinstance(other, numbers.Number):
            return SampledScalar(self.grid, np.full(len(self.grid), other, dtype=complex))
        if not isinstance(other, SampledScalar):
            raise TypeError(f"cannot combine SampledScalar with {other!r}")
        if other.grid != self.grid:
            raise ValueError("sampled scalars live on different grids")
        return other

    def __add__(self, other):
        other = self._check(other)
        return SampledScalar(self.grid, self.total() + other.total())

    __radd__ = __add__

    def __neg__(self):
        anchor = None if self.anchor is None else -self.anchor
        return SampledScalar(self.grid, -self.values, anchor)

    def __sub__(self, other):
        other = self._check(other)
        if (
            self.anchor is not None
            and other.anchor is not None
            and np.array_equal(self.anchor, other.anchor)
        ):
            return SampledScalar(self.grid, self.values - other.values)
        return SampledScalar(self.grid, self.total() - other.total())

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        other = self._check(other)
        return SampledScalar(self.grid, self.total() * other.total())

    __rmul__ = __mul__

    def abs(self) -> "SampledScalar":
        return SampledScalar(self.grid, np.abs(self.total()))


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    max_residual: float
    saturated_zero: bool = False
    branch_slopes: tuple = ()
    window_slopes: tuple = ()

    @property
    def is_finite(self) -> bool:
        return not self.saturated_zero and math.isfinite(self.slope)

    def as_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "max_residual": self.max_residual,
            "saturated_zero": self.saturated_zero,
            "window_slopes": list(self.window_slopes),
        }


_SATURATED = ExponentFit(INF, 0.0, 0.0, True)


def _fit_branch(log_eps: np.ndarray, logmag: np.ndarray, trailing_zero: int = 3) -> ExponentFit:
    nonzero = np.isfinite(logmag)
    if len(logmag) == 0 or not np.any(nonzero):
        return _SATURATED
    # eventually zero: the smallest eps values all vanish
    k = min(trailing_zero, len(logmag))
    if len(logmag) >= 4 and not np.any(nonzero[-k:]):
        return _SATURATED
    x, y = log_eps[nonzero], logmag[nonzero]
    if len(x) < 2:
        return _SATURATED
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.max(np.abs(y - (slope * x + intercept))))
    windows = ()
    if len(x) >= 6:
        h = len(x) // 2
        s1 = np.polyfit(x[:h], y[:h], 1)[0]
        s2 = np.polyfit(x[h:], y[h:], 1)[0]
        windows = (float(s1), float(s2))
    return ExponentFit(float(slope), float(intercept), resid, False, (), windows)


def fit_log_magnitudes(grid: EpsGrid, logmag: np.ndarray) -> ExponentFit:
    """Fit ``log|value|`` against ``log eps`` over the tail, branch by branch.

    Entries equal to ``-inf`` are exact zeros (or below resolution) and carry
    no growth information.  With several branches the smallest branch slope
    is reported, because the valuation of an interleaved net is the minimum
    over its pieces.
    """
    logmag = np.asarray(logmag, dtype=float)
    log_eps = np.log(grid.eps)
    fits = []
    for idx in grid.branch_tails():
        if len(idx) == 0:
            continue
        fits.append(_fit_branch(log_eps[idx], logmag[idx]))
    if not fits:
        raise ValueError("empty tail window")
    live = [f for f in fits if not f.saturated_zero]
    slopes = tuple(f.slope for f in fits)
    if not live:
        return ExponentFit(INF, 0.0, 0.0, True, slopes)
    worst = min(live, key=lambda f: f.slope)
    resid = max(f.max_residual for f in live)
    return ExponentFit(worst.slope, worst.intercept, resid, False, slopes, worst.window_slopes)


def fit_exponent(x: SampledScalar) -> ExponentFit:
    """Estimated exponent ``a`` with ``|x_eps| ~ eps**a`` over the tail."""
    lo, hi = x.grid.tail
    if hi - lo <= 0:
        raise ValueError("zero-length tail window")
    mag = np.abs(x.total())
    tail = x.grid.tail_indices
    if np.all(mag[tail] < ZERO_FLOOR):
        return _SATURATED
    with np.errstate(divide="ignore"):
        logmag = np.where(mag < ZERO_FLOOR, -np.inf, np.log(np.maximum(mag, ZERO_FLOOR)))
    return fit_log_magnitudes(x.grid, logmag)


# --------------------------------------------------------------------------
# idempotents


@dataclass(frozen=True)
class Idempotent:
    """The characteristic net ``e_S`` of a set ``S`` of eps values.

    For sampled use ``mask`` marks grid indices in ``S``; for the exact layer
    only the tags ``"all"`` and ``"none"`` make sense.
    """

    mask: tuple | None = None
    tag: str | None = None

    @classmethod
    def all(cls):
        return cls(tag="all")

    @classmethod
    def none(cls):
        return cls(tag="none")

    @classmethod
    def from_mask(cls, mask) -> "Idempotent":
        return cls(mask=tuple(bool(m) for m in mask))

    def complement(self) -> "Idempotent":
        if self.tag is not None:
            return Idempotent(tag="none" if self.tag == "all" else "all")
        return Idempotent(mask=tuple(not m for m in self.mask))

    def __mul__(self, other: "Idempotent") -> "Idempotent":
        if self.tag == "none" or other.tag == "none":
            return Idempotent.none()
        if self.tag == "all":
            return other
        if other.tag == "all":
            return self
        return Idempotent(mask=tuple(a and b for a, b in zip(self.mask, other.mask)))

    def as_array(self, n: int) -> np.ndarray:
        if self.tag == "all":
            return np.ones(n, dtype=bool)
        if self.tag == "none":
            return np.zeros(n, dtype=bool)
        if len(self.mask) != n:
            raise ValueError("idempotent mask does not match the grid")
        return np.array(self.mask, dtype=bool)


Scalar = Union[ExactScalar, SampledScalar]


def interleave(a: Scalar, b: Scalar, e: Idempotent) -> Scalar:
    """``a * e_{S^c} + b * e_S``: take ``b`` on ``S`` and ``a`` elsewhere."""
    if isinstance(a, ExactScalar) and isinstance(b, ExactScalar):
        if e.tag == "all":
            return b
        if e.tag == "none":
            return a
        raise ValueError("exact scalars only interleave with the 'all'/'none' idempotents")
    grid = a.grid if isinstance(a, SampledScalar) else b.grid
    if isinstance(a, ExactScalar):
        a = a.sample(grid)
    if isinstance(b, ExactScalar):
        b = b.sample(grid)
    if a.grid != b.grid:
        raise ValueError("grid mismatch")
    mask = e.as_array(len(grid))
    values = np.where(mask, b.total(), a.total())
    if mask.all() or not mask.any():
        return SampledScalar(grid, values)
    s_idx = tuple(int(i) for i in np.nonzero(mask)[0])
    c_idx = tuple(int(i) for i in np.nonzero(~mask)[0])
    try:
        pieces = EpsGrid(grid.eps, grid.tail, _refine_branches(grid.branches, (s_idx, c_idx)))
    except ValueError:
        pieces = grid
    return SampledScalar(pieces, values)


def _refine_branches(branches, parts):
    out = []
    for br in branches:
        for part in parts:
            sub = tuple(i for i in br if i in set(part))
            if sub:
                out.append(sub)
    return tuple(out)
