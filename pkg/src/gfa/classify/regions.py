"""Regions of R^d that depend on eps, and sup/inf of ``|d^alpha u_eps|`` over them.

Every region is a set of points ``c_eps + y`` with ``r_lo <= |y| <= r_hi``
around a centre ``c_eps``.  Sampling is deterministic: a uniform grid, a
geometric grid about the centre, dense clusters at the family's declared
features, then three rounds of local refinement around the largest values.
"""
from __future__ import annotations

import math
import os
import contextlib
import contextvars
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..family import Family, multi_indices, normalize_alpha
from ..points import GenPoint
from ..scale import EpsGrid, ExponentFit, default_grid, fit_log_magnitudes

UNIFORM_POINTS = 4097
RAY_POINTS = 1025
GEOM_STEP = 1.0 / 8
HINT_POINTS = 801
HINT_HALF_WIDTH = 4.0
HINT_GEOM = 80
REFINE_ROUNDS = 3
REFINE_POINTS = 33
REFINE_TOP = 5


class EmptyRegionError(ValueError):
    pass


@dataclass(frozen=True)
class Center:
    """Region centre at one eps: ``anchor + offset`` kept apart to avoid rounding."""

    anchor: np.ndarray
    offset: np.ndarray


def _zero_center(dim: int) -> Center:
    return Center(np.zeros(dim), np.zeros(dim))


class Region:
    """Base: subclasses define ``center(eps, dim)`` and ``radii(eps, family)``."""

    name = "region"

    def center(self, eps: float, dim: int) -> Center:
        return _zero_center(dim)

    def radii(self, eps: float, family: Family) -> tuple:
        raise NotImplementedError

    @property
    def key(self) -> tuple:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"region": self.name}

    def label(self) -> str:
        return self.name


@dataclass(frozen=True)
class Ball(Region):
    """``|x| <= eps^-m``."""

    m: float
    name = "ball"

    def radii(self, eps, family):
        return 0.0, eps ** (-self.m)

    @property
    def key(self):
        return ("ball", self.m)

    def describe(self):
        return {"region": "ball", "m": self.m}

    def label(self):
        return f"ball(m={self.m})"


@dataclass(frozen=True)
class Annulus(Region):
    """``eps^-m <= |x| <= eps^-(m+1)``."""

    m: float
    name = "annulus"

    def radii(self, eps, family):
        return eps ** (-self.m), eps ** (-self.m - 1)

    @property
    def key(self):
        return ("annulus", self.m)

    def describe(self):
        return {"region": "annulus", "m": self.m}

    def label(self):
        return f"annulus(m={self.m})"


@dataclass(frozen=True)
class Exterior(Region):
    """``|x| >= eps^(-1/m)``, truncated at the family's support radius if known,
    otherwise at ``eps^-cap``."""

    m: float
    cap: float = 4.0
    name = "exterior"

    def radii(self, eps, family):
        lo = eps ** (-1.0 / self.m)
        hi = eps ** (-self.cap)
        support = family.support_radius(eps)
        if support is not None:
            hi = min(hi, support * (1 + 1e-9))
        # still look just past the inner radius so the verdict rests on samples
        return lo, max(hi, 2.0 * lo)

    @property
    def key(self):
        return ("exterior", self.m, self.cap)

    def describe(self):
        return {"region": "exterior", "m": self.m, "cap": self.cap}

    def label(self):
        return f"exterior(m={self.m})"


@dataclass(frozen=True)
class ClassicalBall(Region):
    """``|x - x0| <= r`` for a fixed point ``x0``."""

    x0: tuple
    r: float
    name = "classical_ball"

    def center(self, eps, dim):
        return Center(np.asarray(self.x0, dtype=float).reshape(dim), np.zeros(dim))

    def radii(self, eps, family):
        return 0.0, self.r

    @property
    def key(self):
        return ("classical_ball", tuple(self.x0), self.r)

    def describe(self):
        return {"region": "classical_ball", "x0": list(self.x0), "r": self.r}

    def label(self):
        return f"ball(x0={list(self.x0)}, r={self.r:g})"


def _point_center(p: GenPoint, eps: float, dim: int) -> Center:
    parts = p.at(eps)
    anchor = np.array([a for a, _ in parts], dtype=complex)
    offset = np.array([o for _, o in parts], dtype=complex)
    if np.any(anchor.imag != 0) or np.any(offset.imag != 0):
        raise ValueError("generalized points must be real")
    return Center(anchor.real.reshape(dim), offset.real.reshape(dim))


@dataclass(frozen=True, eq=False)
class SharpBall(Region):
    """``|x - x_eps| <= eps^n`` around a generalized point."""

    point: GenPoint
    n: float
    name = "sharp_ball"

    def center(self, eps, dim):
        return _point_center(self.point, eps, dim)

    def radii(self, eps, family):
        return 0.0, eps ** self.n

    @property
    def key(self):
        return ("sharp_ball", id(self.point), self.n)

    def describe(self):
        return {"region": "sharp_ball", "n": self.n}

    def label(self):
        return f"sharp_ball(n={self.n})"


@dataclass(frozen=True, eq=False)
class PointNet(Region):
    """The single point ``x_eps``."""

    point: GenPoint
    name = "point"

    def center(self, eps, dim):
        return _point_center(self.point, eps, dim)

    def radii(self, eps, family):
        return 0.0, 0.0

    @property
    def key(self):
        return ("point", id(self.point))

    def describe(self):
        return {"region": "point"}


# ---------------------------------------------------------------- sampling


@dataclass
class _Group:
    """Points ``anchor + base + t * direction`` for a sorted parameter ``t``."""

    anchor: np.ndarray
    base: np.ndarray
    direction: np.ndarray
    t: np.ndarray
    values: Optional[np.ndarray] = None
    # membership: lo <= |shift + t * direction| <= hi, relative to the region centre
    shift: Optional[np.ndarray] = None
    lo: float = 0.0
    hi: float = math.inf

    def offsets(self, t=None) -> np.ndarray:
        t = self.t if t is None else t
        return self.base[None, :] + t[:, None] * self.direction[None, :]

    def inside(self, t: np.ndarray) -> np.ndarray:
        shift = np.zeros_like(self.direction) if self.shift is None else self.shift
        r = np.sqrt(np.sum((shift[None, :] + t[:, None] * self.direction[None, :]) ** 2, axis=1))
        return (r >= self.lo * (1 - 1e-12)) & (r <= self.hi * (1 + 1e-12))


def _geometric(lo: float, hi: float) -> np.ndarray:
    """``2^(j/8)`` in ``[lo, hi]`` (plus a little below when ``lo = 0``)."""
    if hi <= 0:
        return np.empty(0)
    top = math.ceil(math.log2(hi) / GEOM_STEP)
    bottom = math.floor(math.log2(max(lo, hi * 2.0**-60)) / GEOM_STEP)
    vals = 2.0 ** (np.arange(bottom, top + 1) * GEOM_STEP)
    return vals[(vals >= lo) & (vals <= hi)]


def _radial_1d(lo: float, hi: float) -> np.ndarray:
    if hi == 0:
        return np.zeros(1)
    if lo == 0:
        uni = np.linspace(-hi, hi, UNIFORM_POINTS)
    else:
        half = np.linspace(lo, hi, UNIFORM_POINTS // 2 + 1)
        uni = np.concatenate([-half, half])
    g = _geometric(lo, hi)
    pts = np.concatenate([uni, g, -g, [lo, -lo, hi, -hi]])
    return np.unique(pts)


def _hint_t(scale: float) -> np.ndarray:
    uni = scale * np.linspace(-HINT_HALF_WIDTH, HINT_HALF_WIDTH, HINT_POINTS)
    g = scale * 2.0 ** (np.arange(-HINT_GEOM, HINT_GEOM + 1) * GEOM_STEP)
    return np.unique(np.concatenate([uni, g, -g, [0.0]]))


def _directions(dim: int) -> list:
    dirs = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        dirs.extend([e, -e])
    for signs in np.ndindex(*([2] * dim)):
        v = np.array([1.0 if s else -1.0 for s in signs]) / math.sqrt(dim)
        dirs.append(v)
    return dirs


def _initial_groups(region: Region, family: Family, eps: float) -> list:
    dim = family.dim
    c = region.center(eps, dim)
    lo, hi = region.radii(eps, family)
    if hi < lo:
        raise EmptyRegionError(f"{region.label()} is empty at eps={eps:g}")
    groups = []
    if dim == 1:
        one = np.ones(1)
        groups.append(_Group(c.anchor, c.offset, one, _radial_1d(lo, hi), lo=lo, hi=hi))
        for hc, scale in family.hints(eps):
            if not (scale > 0 and math.isfinite(scale)):
                continue
            t = _hint_t(scale)
            # position relative to the region centre
            rel = (hc - c.anchor[0]) - c.offset[0] + t
            keep = (np.abs(rel) >= lo) & (np.abs(rel) <= hi)
            if np.any(keep):
                shift = np.array([(hc - c.anchor[0]) - c.offset[0]])
                groups.append(_Group(np.array([hc], dtype=float), np.zeros(1), one, t[keep],
                                     shift=shift, lo=lo, hi=hi))
        return groups
    radial = np.unique(np.concatenate([
        np.linspace(lo, hi, RAY_POINTS), _geometric(lo, hi), [lo, hi]]))
    for d in _directions(dim):
        groups.append(_Group(c.anchor, c.offset, d, radial, lo=lo, hi=hi))
    return groups


def _evaluate(family: Family, alpha: tuple, eps: float, g: _Group, t=None) -> np.ndarray:
    return family.log_abs(alpha, eps, g.offsets(t), anchor=g.anchor)


def _weighted(vals: np.ndarray, g: _Group, t, weight: float) -> np.ndarray:
    if weight == 0:
        return vals
    pos = g.anchor[None, :] + g.offsets(t)
    r = np.sqrt(np.sum(pos**2, axis=1))
    with np.errstate(divide="ignore"):
        w = weight * np.log(r)
    out = vals + w
    return np.where(np.isneginf(vals) | np.isneginf(w), -np.inf, out)


def region_extreme(family: Family, alpha, eps: float, region: Region, mode: str = "sup",
                   weight: float = 0.0) -> float:
    """``log sup`` (or ``log inf``) of ``|x|^weight |d^alpha u_eps(x)|`` over the region."""
    alpha = normalize_alpha(alpha, family.dim)
    key = (region.key, alpha, float(eps), mode, weight)
    hit = family.cache.get(key)
    if hit is not None:
        return hit
    sign = 1.0 if mode == "sup" else -1.0
    groups = _initial_groups(region, family, eps)
    for g in groups:
        g.values = _weighted(_evaluate(family, alpha, eps, g), g, None, weight)
    for _ in range(REFINE_ROUNDS):
        cands = []
        for gi, g in enumerate(groups):
            if len(g.t) < 2:
                continue
            s = sign * g.values
            s = np.where(np.isnan(s), -np.inf, s)
            top = np.argsort(s)[::-1][:REFINE_TOP]
            for i in top:
                if np.isfinite(s[i]) or mode == "inf":
                    cands.append((s[i], gi, int(i)))
        cands.sort(key=lambda c: c[0], reverse=True)
        new: dict = {}
        for _, gi, i in cands[:REFINE_TOP]:
            g = groups[gi]
            left = g.t[max(i - 1, 0)]
            right = g.t[min(i + 1, len(g.t) - 1)]
            if right > left:
                new.setdefault(gi, []).append(np.linspace(left, right, REFINE_POINTS + 2)[1:-1])
        if not new:
            break
        for gi, chunks in new.items():
            g = groups[gi]
            t_new = np.setdiff1d(np.unique(np.concatenate(chunks)), g.t)
            t_new = t_new[g.inside(t_new)]
            if len(t_new) == 0:
                continue
            v_new = _weighted(_evaluate(family, alpha, eps, g, t_new), g, t_new, weight)
            t_all = np.concatenate([g.t, t_new])
            v_all = np.concatenate([g.values, v_new])
            order = np.argsort(t_all, kind="stable")
            g.t, g.values = t_all[order], v_all[order]
    allv = np.concatenate([g.values for g in groups])
    allv = allv[~np.isnan(allv)]
    if len(allv) == 0:
        result = -math.inf if mode == "sup" else math.inf
    else:
        result = float(np.max(allv)) if mode == "sup" else float(np.min(allv))
    with family._lock:
        family.cache[key] = result
    return result


def sup_on_region(family: Family, alpha, eps: float, region: Region) -> float:
    """``sup |d^alpha u_eps|`` over the region (a plain number; may overflow to inf)."""
    return math.exp(region_extreme(family, alpha, eps, region, "sup"))


def log_sup_on_region(family: Family, alpha, eps: float, region: Region) -> float:
    return region_extreme(family, alpha, eps, region, "sup")


def threads() -> int:
    env = os.environ.get("GFA_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def parallel_map(fn, items) -> list:
    items = list(items)
    n = threads()
    if n <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass
class Sweep:
    """Log-extremes of one ``(alpha, region)`` pair across the grid tail and their fit."""

    alpha: tuple
    region: Region
    logmag: np.ndarray
    fit: ExponentFit
    mode: str = "sup"
    weight: float = 0.0
    extra: dict = field(default_factory=dict)

    def rows(self, grid: EpsGrid) -> list:
        out = []
        for i in grid.tail_indices:
            out.append({
                "eps": float(grid.eps[i]),
                "region": self.region.label(),
                "alpha": list(self.alpha),
                "m_or_k": getattr(self.region, "m", self.extra.get("order", sum(self.alpha))),
                "sup_logmag": float(self.logmag[i]),
                "fit_slope": self.fit.slope,
                "residual": self.fit.max_residual,
            })
        return out


def sweep(family: Family, alpha, region: Region, grid: Optional[EpsGrid] = None,
          mode: str = "sup", weight: float = 0.0) -> Sweep:
    """Evaluate the region extreme at every tail eps and fit the exponent."""
    grid = grid or default_grid()
    alpha = normalize_alpha(alpha, family.dim)
    tail = list(grid.tail_indices)
    vals = parallel_map(lambda i: region_extreme(family, alpha, grid.eps[i], region, mode, weight), tail)
    logmag = np.full(len(grid), np.nan)
    logmag[tail] = vals
    fit = fit_log_magnitudes(grid, logmag)
    out = Sweep(alpha, region, logmag, fit, mode, weight)
    rec = _RECORDER.get()
    if rec is not None:
        rec.extend(out.rows(grid))
    return out


_RECORDER: contextvars.ContextVar = contextvars.ContextVar("sweep_recorder", default=None)


@contextlib.contextmanager
def recording():
    """Collect the CSV rows of every sweep run inside the block."""
    rows: list = []
    token = _RECORDER.set(rows)
    try:
        yield rows
    finally:
        _RECORDER.reset(token)


def order_sweep(family: Family, order: int, region: Region, grid: Optional[EpsGrid] = None) -> Sweep:
    """Max over ``|alpha| = order`` of the region sup, fitted as one net."""
    grid = grid or default_grid()
    parts = [sweep(family, a, region, grid) for a in multi_indices(family.dim, order)]
    logmag = np.max(np.vstack([p.logmag for p in parts]), axis=0)
    fit = fit_log_magnitudes(grid, logmag)
    worst = min(parts, key=lambda p: p.fit.slope)
    return Sweep(worst.alpha, region, logmag, fit, extra={"order": order})
