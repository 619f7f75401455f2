"""Generalized points: tuples of exact or sampled scalars."""
from __future__ import annotations

import enum
import math
import numbers
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .scale import (
    INF,
    ExactScalar,
    SampledScalar,
    as_exact,
    fit_exponent,
    fit_log_magnitudes,
    normalize,
    tends_to_zero,
    valuation,
)

FAST_MARGIN = 0.05
SLOW_TOL = 0.1
WINDOW_TOL = 0.2
LOGFIT_RESIDUAL = 0.05


def _log_corrected_power(norm: SampledScalar):
    """Fit ``log|x| = a log(1/eps) + b log log(1/eps) + c`` on the tail.

    Returns ``(a, b, max_residual)`` or None when the tail has zeros or too
    few points.  Separates powers of ``log(1/eps)`` from genuine powers of
    ``eps``, which a single log-log slope cannot do on a finite grid.
    """
    tail = norm.grid.tail_indices
    mag = np.abs(norm.total()[tail])
    if len(tail) < 4 or np.any(mag == 0):
        return None
    L = np.log(1 / norm.grid.eps[tail])
    A = np.column_stack([L, np.log(L), np.ones_like(L)])
    coef, *_ = np.linalg.lstsq(A, np.log(mag), rcond=None)
    resid = float(np.max(np.abs(A @ coef - np.log(mag))))
    return float(coef[0]), float(coef[1]), resid


class ScaleClass(str, enum.Enum):
    SLOW = "Slow"
    FAST = "Fast"
    NEITHER = "Neither"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True, eq=False)
class GenPoint:
    coords: tuple

    def __post_init__(self):
        coords = tuple(
            as_exact(c) if isinstance(c, numbers.Number) else c for c in self.coords
        )
        if not coords:
            raise ValueError("a point needs at least one coordinate")
        kinds = {type(c) for c in coords}
        if len(kinds) != 1 or not kinds <= {ExactScalar, SampledScalar}:
            raise ValueError("coordinates must be all exact or all sampled")
        if isinstance(coords[0], SampledScalar):
            g = coords[0].grid
            if any(c.grid != g for c in coords):
                raise ValueError("sampled coordinates must share one grid")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def of(cls, *coords) -> "GenPoint":
        return cls(tuple(coords))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def exact(self) -> bool:
        return isinstance(self.coords[0], ExactScalar)

    @property
    def grid(self):
        return None if self.exact else self.coords[0].grid

    def sample(self, grid) -> "GenPoint":
        if not self.exact:
            return self
        return GenPoint(tuple(c.sample(grid) for c in self.coords))

    def __sub__(self, other: "GenPoint") -> "GenPoint":
        a, b = _compatible(self, other)
        return GenPoint(tuple(x - y for x, y in zip(a.coords, b.coords)))

    def at(self, eps: float) -> tuple:
        """Per-coordinate ``(anchor, offset)`` pairs of the representative at ``eps``."""
        out = []
        for c in self.coords:
            if isinstance(c, ExactScalar):
                out.append((0.0, complex(c(eps))))
            else:
                out.append(c.parts(c.grid.index_of(eps)))
        return tuple(out)


def _compatible(a: GenPoint, b: GenPoint):
    if a.dim != b.dim:
        raise ValueError("points of different dimension")
    if a.exact != b.exact:
        grid = a.grid or b.grid
        return a.sample(grid), b.sample(grid)
    if not a.exact and a.grid != b.grid:
        raise ValueError("sampled points on different grids")
    return a, b


def _single_term_abs(c: ExactScalar):
    (coef, a, b), = c.terms
    return abs(complex(coef)), a, b


def point_norm(p: GenPoint):
    """Euclidean norm net ``|x_eps|``.

    Stays exact when it is a single term (one nonzero coordinate, or only
    constants); otherwise it is sampled on the point's grid, or on the
    default grid for exact points.
    """
    if p.exact:
        nonzero = [c for c in p.coords if not c.is_zero()]
        if not nonzero:
            return ExactScalar.zero()
        if all(len(c.terms) == 1 for c in nonzero):
            if len(nonzero) == 1:
                m, a, b = _single_term_abs(nonzero[0])
                return normalize([(m, a, b)])
            if all(c.terms[0][1:] == (0, 0) for c in nonzero):
                return ExactScalar.const(math.sqrt(sum(abs(complex(c.terms[0][0])) ** 2 for c in nonzero)))
        from .scale import default_grid

        p = p.sample(default_grid())
    vals = np.sqrt(sum(np.abs(c.total()) ** 2 for c in p.coords))
    return SampledScalar(p.grid, vals)


def _point_valuation(p: GenPoint) -> float:
    return min(valuation(c) for c in p.coords)


def classify_scale(p: GenPoint) -> ScaleClass:
    if p.exact:
        return ScaleClass.SLOW if _point_valuation(p) >= 0 else ScaleClass.FAST
    norm = point_norm(p)
    fit = fit_exponent(norm)
    if fit.saturated_zero:
        return ScaleClass.SLOW
    if len(fit.window_slopes) == 2 and abs(fit.window_slopes[0] - fit.window_slopes[1]) > WINDOW_TOL:
        return ScaleClass.NEITHER
    if len(set(fit.branch_slopes)) > 1:
        finite = [s for s in fit.branch_slopes if math.isfinite(s)]
        if finite and max(finite) - min(finite) > WINDOW_TOL:
            return ScaleClass.NEITHER
    if fit.slope >= -SLOW_TOL:
        return ScaleClass.SLOW
    corrected = _log_corrected_power(norm)
    if corrected is not None:
        a, _, resid = corrected
        if resid <= LOGFIT_RESIDUAL and a <= SLOW_TOL:
            return ScaleClass.SLOW
    # |x_eps| >= eps^-a over the whole tail: log|x|/log eps <= -a everywhere
    tail = norm.grid.tail_indices
    mag = np.abs(norm.values[tail])
    if np.any(mag == 0):
        return ScaleClass.INCONCLUSIVE
    ratio = np.log(mag) / np.log(norm.grid.eps[tail])
    if float(np.max(ratio)) < -FAST_MARGIN:
        return ScaleClass.FAST
    return ScaleClass.INCONCLUSIVE


def _bounded_limit(c: ExactScalar):
    """Limit as eps -> 0 of a bounded exact scalar, or None if unbounded."""
    limit = 0
    for coef, a, b in c.terms:
        if a < 0 or (a == 0 and b > 0):
            return None
        if a == 0 and b == 0:
            limit = coef
    return complex(limit)


def is_compactly_supported(p: GenPoint, box: Sequence) -> bool:
    """Whether the net stays inside the closed box ``[(lo, hi), ...]`` for small eps."""
    if len(box) != p.dim:
        raise ValueError("box dimension mismatch")
    for lo, hi in box:
        if not lo <= hi:
            raise ValueError("empty box")
    if p.exact:
        from .scale import default_grid

        tail_eps = default_grid().eps[default_grid().tail_indices]
        for c, (lo, hi) in zip(p.coords, box):
            lim = _bounded_limit(c)
            if lim is None or abs(lim.imag) > 0:
                return False
            if not lo <= lim.real <= hi:
                return False
            if lim.real in (lo, hi):
                vals = c(tail_eps)
                if np.any(vals.real < lo) or np.any(vals.real > hi):
                    return False
        return True
    for c, (lo, hi) in zip(p.coords, box):
        v = c.total()
        if np.any(np.abs(v.imag) > 0) or np.any(v.real < lo) or np.any(v.real > hi):
            return False
    return True


def infinitely_close(a: GenPoint, b: GenPoint) -> bool:
    d = a - b
    if d.exact:
        return all(tends_to_zero(c) for c in d.coords)
    norm = point_norm(d)
    fit = fit_exponent(norm)
    if fit.saturated_zero or fit.slope > FAST_MARGIN:
        return True
    if fit.slope < -FAST_MARGIN:
        return False
    # no power-law decay: fall back to a decreasing tail that ends well below its start
    tail = np.abs(norm.values[norm.grid.tail_indices])
    return bool(np.all(np.diff(tail) <= 0) and tail[-1] < 0.5 * tail[0])


def sharp_distance(a: GenPoint, b: GenPoint) -> float:
    d = a - b
    if d.exact:
        v = _point_valuation(d)
        return 0.0 if v == INF else math.exp(-v)
    fit = fit_exponent(point_norm(d))
    return 0.0 if fit.saturated_zero else math.exp(-fit.slope)
