"""The two named kernels and their derivatives.

``bump(t) = exp(-1/(1 - t^2))`` on ``|t| < 1`` and 0 outside.  Its k-th
derivative is ``P_k(t) / (1 - t^2)^(2k) * bump(t)`` with integer polynomials
``P_k``; ``gauss(t) = exp(-t^2)`` has ``(-1)^k H_k(t) exp(-t^2)`` with the
physicists' Hermite polynomials.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np


def _pmul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def _padd(p, q):
    n = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)]


def _pder(p):
    return [i * p[i] for i in range(1, len(p))] or [0]


def _trim(p):
    while len(p) > 1 and p[-1] == 0:
        p = p[:-1]
    return p


@lru_cache(maxsize=None)
def bump_poly(k: int) -> tuple:
    """Coefficients (lowest degree first) of ``P_k``.

    ``P_{k+1} = P_k' s^2 + (4k t s - 2t) P_k`` with ``s = 1 - t^2``.
    """
    if k < 0:
        raise ValueError("negative derivative order")
    if k == 0:
        return (1,)
    p = list(bump_poly(k - 1))
    j = k - 1
    s = [1, 0, -1]
    s2 = _pmul(s, s)
    factor = _padd(_pmul([0, 4 * j], s), [0, -2])
    return tuple(_trim(_padd(_pmul(_pder(p), s2), _pmul(factor, p))))


@lru_cache(maxsize=None)
def hermite_poly(k: int) -> tuple:
    """Physicists' Hermite ``H_k``: ``H_{k+1} = 2t H_k - H_k'``."""
    if k == 0:
        return (1,)
    h = list(hermite_poly(k - 1))
    return tuple(_trim(_padd(_pmul([0, 2], h), [-c for c in _pder(h)])))


def _polyval(coeffs, t):
    c = np.array(coeffs[::-1], dtype=float)
    return np.polyval(c, t)


def bump_log(t, k: int = 0):
    """``(log|bump^(k)(t)|, sign)`` for real ``t``; outside the support ``(-inf, 0)``."""
    t = np.asarray(t, dtype=float)
    logmag = np.full(t.shape, -np.inf)
    sign = np.zeros(t.shape)
    inside = np.abs(t) < 1
    if np.any(inside):
        ti = t[inside]
        s = (1.0 - ti) * (1.0 + ti)
        p = _polyval(bump_poly(k), ti)
        with np.errstate(divide="ignore"):
            logmag[inside] = np.log(np.abs(p)) - 2 * k * np.log(s) - 1.0 / s
        sign[inside] = np.sign(p)
    return logmag, sign


def bump(t, k: int = 0):
    logmag, sign = bump_log(t, k)
    with np.errstate(over="ignore"):
        return sign * np.exp(logmag)


def gauss_log(t, k: int = 0):
    t = np.asarray(t, dtype=float)
    h = _polyval(hermite_poly(k), t)
    with np.errstate(divide="ignore"):
        logmag = np.log(np.abs(h)) - t * t
    return logmag, ((-1) ** k) * np.sign(h)


def gauss(t, k: int = 0):
    logmag, sign = gauss_log(t, k)
    return sign * np.exp(logmag)


KERNELS = {"bump": bump_log, "gauss": gauss_log}


@lru_cache(maxsize=None)
def bump_integral() -> float:
    """``int bump`` over the real line."""
    from scipy.integrate import quad

    val, _ = quad(lambda s: float(bump(s)), -1.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200)
    return val


@lru_cache(maxsize=None)
def bump_moment(i: int) -> float:
    """``int s^i bump(s) ds``."""
    from scipy.integrate import quad

    if i % 2:
        return 0.0
    val, _ = quad(lambda s: s**i * float(bump(s)), -1.0, 1.0, epsabs=1e-15, epsrel=1e-12, limit=200)
    return val


@lru_cache(maxsize=None)
def _gl_nodes(n: int):
    return np.polynomial.legendre.leggauss(n)


def bump_primitive(y, nodes: int = 96):
    """``int_{-1}^{y} bump(s) ds`` for an array ``y`` (Gauss-Legendre)."""
    y = np.clip(np.asarray(y, dtype=float), -1.0, 1.0)
    x, w = _gl_nodes(nodes)
    half = (y + 1.0) / 2.0
    s = -1.0 + half[..., None] * (x + 1.0)
    return half * (bump(s) @ w)


def plateau(t, k: int = 0):
    """Smooth cutoff: 1 on ``|t| <= 1``, 0 on ``|t| >= 2``, and its k-th derivative.

    Built as ``psi(2 - |t|)`` where ``psi`` is the normalized primitive of the
    bump rescaled to ``[0, 1]``.
    """
    t = np.asarray(t, dtype=float)
    s = 2.0 - np.abs(t)
    norm = bump_integral()
    if k == 0:
        return bump_primitive(2.0 * s - 1.0) / norm
    deriv = 2.0**k * bump(2.0 * s - 1.0, k - 1) / norm
    return (-np.sign(t)) ** k * deriv
