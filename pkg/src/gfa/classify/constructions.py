"""Families built from other families: smooth cutoffs and Taylor companions (d = 1)."""
from __future__ import annotations

import math
from math import comb, factorial
from typing import Callable, Optional, Union

import numpy as np

from .. import kernels
from ..family import DerivativeOrderError, Family, ProgrammaticFamily
from ..points import GenPoint
from ..scale import ExactScalar, SampledScalar


def _radius_fn(radius_net) -> Callable[[float], float]:
    if callable(radius_net) and not isinstance(radius_net, (ExactScalar, SampledScalar)):
        return lambda eps: float(radius_net(eps))
    if isinstance(radius_net, ExactScalar):
        return lambda eps: float(np.real(radius_net(eps)))
    if isinstance(radius_net, SampledScalar):
        return lambda eps: float(np.real(radius_net.at(eps)))
    value = float(radius_net)
    return lambda eps: value


def _logsum(logs: list, signs: list) -> tuple:
    """``log|sum s_i e^{l_i}|`` for complex signs, stable for huge ``l_i``."""
    logs = np.vstack(logs)
    signs = np.vstack(signs)
    top = np.max(logs, axis=0)
    safe = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(all="ignore"):
        total = np.sum(signs * np.exp(logs - safe), axis=0)
        out = np.log(np.abs(total)) + safe
    return np.where(np.isneginf(top), -np.inf, out), total


def cutoff_glue(family: Family, radius_net: Union[ExactScalar, SampledScalar, Callable, float],
                name: Optional[str] = None) -> Family:
    """``u_eps(x) chi(x / a_eps)`` with the plateau cutoff: 1 on ``|t| <= 1``, 0 on ``|t| >= 2``."""
    if family.dim != 1:
        raise ValueError("cutoff_glue is implemented for d = 1")
    a_of = _radius_fn(radius_net)

    def terms(alpha, eps, x, anchor):
        k = alpha[0]
        a = a_of(eps)
        if not a > 0:
            raise ValueError("cutoff radius must be positive")
        pos = (anchor[0] + x[:, 0]) / a
        inside = np.abs(pos) < 2
        return k, a, pos, inside

    def log_fn(alpha, eps, x, anchor):
        k, a, pos, inside = terms(alpha, eps, x, anchor)
        out = np.full(len(pos), -np.inf)
        if not np.any(inside):
            return out
        xs = x[inside]
        logs, signs = [], []
        for j in range(k + 1):
            lu = family.log_abs((j,), eps, xs, anchor)
            ph = np.exp(1j * np.angle(family.deriv((j,), eps, xs, anchor)))
            chi = kernels.plateau(pos[inside], k - j)
            with np.errstate(divide="ignore"):
                lc = np.log(np.abs(chi)) - (k - j) * math.log(a) + math.log(comb(k, j))
            logs.append(lu + lc)
            signs.append(ph * np.sign(chi))
        out[inside], _ = _logsum(logs, signs)
        return out

    def deriv_fn(alpha, eps, x, anchor):
        k, a, pos, inside = terms(alpha, eps, x, anchor)
        out = np.zeros(len(pos), dtype=complex)
        if not np.any(inside):
            return out
        xs = x[inside]
        acc = np.zeros(int(inside.sum()), dtype=complex)
        for j in range(k + 1):
            chi = kernels.plateau(pos[inside], k - j) * a ** (-(k - j))
            acc += comb(k, j) * family.deriv((j,), eps, xs, anchor) * chi
        out[inside] = acc
        return out

    return ProgrammaticFamily(
        1, deriv_fn, log_fn, name=name or f"glue({family.name})", max_order=family.max_order,
        support_radius=lambda eps: 2.0 * a_of(eps), hints=family.hints, anchored=True)


def default_degree(eps: float) -> int:
    """``ceil(log2 log2 (1/eps))``: grows slower than any power of ``log(1/eps)``."""
    return max(0, math.ceil(math.log2(math.log2(1.0 / eps))))


def taylor_companion(family: Family, x0: GenPoint, degree_rule: Callable[[float], int] = default_degree,
                     cutoff_radius: float = 1.0, name: Optional[str] = None) -> Family:
    """Truncated Taylor polynomial of ``u_eps`` at ``x_eps`` times a plateau cutoff.

    ``v_eps(x) = sum_{k <= m_eps} c_k (x - x_eps)^k / k! * chi(2 (x - x_eps) / r)``
    with ``c_k = d^k u_eps(x_eps)``; the cutoff is identically 1 on
    ``|x - x_eps| <= r / 2``, so every derivative of order ``<= m_eps`` at
    ``x_eps`` equals that of ``u``.
    """
    if family.dim != 1 or x0.dim != 1:
        raise ValueError("taylor_companion is implemented for d = 1")
    r = float(cutoff_radius)
    coeff_cache: dict = {}

    def coeffs(eps):
        hit = coeff_cache.get(eps)
        if hit is not None:
            return hit
        m = int(degree_rule(eps))
        if m > family.max_order:
            raise DerivativeOrderError(f"degree {m} exceeds the family's derivative order {family.max_order}")
        (anc, off), = x0.at(eps)
        anc, off = float(np.real(anc)), float(np.real(off))
        c = [complex(family.deriv((k,), eps, np.array([off]), np.array([anc]))[0]) for k in range(m + 1)]
        coeff_cache[eps] = (anc, off, c)
        return anc, off, c

    def deriv_fn(alpha, eps, x, anchor):
        k = alpha[0]
        anc, off, c = coeffs(eps)
        # displacement from x_eps, computed from the two anchors to keep precision
        y = (anchor[0] - anc) + (x[:, 0] - off)
        m = len(c) - 1
        out = np.zeros(len(y), dtype=complex)
        for j in range(k + 1):
            # j-th derivative of the polynomial times (k-j)-th of the cutoff
            poly = np.zeros(len(y), dtype=complex)
            for i in range(j, m + 1):
                poly += c[i] * y ** (i - j) / factorial(i - j)
            chi = kernels.plateau(2.0 * y / r, k - j) * (2.0 / r) ** (k - j)
            out += comb(k, j) * poly * chi
        return out

    return ProgrammaticFamily(
        1, deriv_fn, None, name=name or f"taylor({family.name})", max_order=family.max_order,
        hints=lambda eps: [(coeffs(eps)[0] + coeffs(eps)[1], r)], anchored=True)
