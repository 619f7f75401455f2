"""Independent high-precision evaluation of DSL expressions.

Used to check the symbolic derivatives: the expression is evaluated with
mpmath at 40 significant digits and differentiated numerically by
``mpmath.diff``, so no rule of the symbolic differentiator is involved.
"""
from __future__ import annotations

from fractions import Fraction

import mpmath

from . import dsl

DPS = 40


def _bump(t):
    if abs(t) >= 1:
        return mpmath.mpf(0)
    return mpmath.exp(-1 / (1 - t * t))


def _gauss(t):
    return mpmath.exp(-t * t)


_FUNCS = {
    "exp": mpmath.exp, "sin": mpmath.sin, "cos": mpmath.cos,
    "log": mpmath.log, "sqrt": mpmath.sqrt,
}
_KERNELS = {"bump": _bump, "gauss": _gauss}


def _mpnum(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    if isinstance(v, complex):
        return mpmath.mpc(v.real, v.imag)
    return mpmath.mpf(v)


def mp_eval(e: dsl.Expr, env: dict):
    """Evaluate ``e`` with mpmath; ``env`` maps ``eps`` and ``x1..`` to numbers."""
    k = e.kind
    if k == "num":
        return _mpnum(e.value)
    if k == "const":
        return mpmath.j if e.name == "i" else mpmath.pi
    if k == "var":
        return env[e.name]
    if k == "neg":
        return -mp_eval(e.a, env)
    if k in ("add", "sub", "mul", "div", "genpow"):
        a, b = mp_eval(e.a, env), mp_eval(e.b, env)
        if k == "add":
            return a + b
        if k == "sub":
            return a - b
        if k == "mul":
            return a * b
        if k == "div":
            return a / b
        return mpmath.exp(b * mpmath.log(a))
    if k == "pow":
        a = mp_eval(e.a, env)
        q = e.q
        if q.denominator == 1:
            return a ** int(q)
        return a ** (mpmath.mpf(q.numerator) / q.denominator)
    if k == "call":
        arg = mp_eval(e.a, env)
        if e.func in _KERNELS:
            f = _KERNELS[e.func]
            if e.order == 0:
                return f(arg)
            return mpmath.diff(f, arg, e.order)
        return _FUNCS[e.func](arg)
    raise TypeError(f"unknown node {k}")


def mp_partial(e: dsl.Expr, name: str, env: dict, order: int = 1) -> complex:
    """``d^order e / d name^order`` at ``env`` by high-precision numerical differentiation."""
    with mpmath.workdps(DPS):
        env = {k: mpmath.mpf(v) for k, v in env.items()}

        def f(s):
            local = dict(env)
            local[name] = s
            return mp_eval(e, local)

        return complex(mpmath.diff(f, env[name], order))
