"""A small expression language for closed-form families ``u_eps(x)``.

Nodes are hash-consed: building the same expression twice returns the same
object, so structural equality is identity and derivative tables share
subexpressions.  Smart constructors fold constants and apply the 0/1
identities; nothing more.

Grammar::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := base ('^' exponent)?
    exponent := '-' exponent | base ('^' exponent)?
    base     := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'

Identifiers are ``eps``, ``x1`` .. ``xd``, the constants ``i`` and ``pi``,
the builtins ``exp sin cos log sqrt``, the kernels ``bump`` and ``gauss``,
and ``bump_k`` / ``gauss_k`` for their k-th derivatives.
"""
from __future__ import annotations

import math
import re
import weakref
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import kernels

MAX_KERNEL_ORDER = 64
UNARY = ("exp", "sin", "cos", "log", "sqrt")
CONSTANTS = {"i": 1j, "pi": math.pi}


class DSLError(ValueError):
    """Base class for expression-language errors."""


class ParseError(DSLError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class DomainError(DSLError, ArithmeticError):
    pass


# ---------------------------------------------------------------- nodes

_INTERN: "weakref.WeakValueDictionary" = weakref.WeakValueDictionary()
# first source position of each parsed node, for domain-error messages
_POSITIONS: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


class Expr:
    __slots__ = ("_key", "_hash", "__weakref__")
    kind = "expr"

    def __new__(cls, *args):
        key = (cls.kind,) + tuple(id(a) if isinstance(a, Expr) else a for a in args)
        # keep Fraction/complex/int constants apart
        key += tuple(type(a).__name__ for a in args if not isinstance(a, Expr))
        node = _INTERN.get(key)
        if node is not None:
            return node
        node = object.__new__(cls)
        node._key = key
        node._hash = hash(key)
        node._init(*args)
        _INTERN[key] = node
        return node

    def _init(self, *args):
        raise NotImplementedError

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    @property
    def children(self) -> tuple:
        return ()

    def __repr__(self):
        return f"Expr({to_text(self)!r})"

    def __str__(self):
        return to_text(self)

    # operator sugar for building expressions in code
    def __add__(self, o):
        return add(self, _lift(o))

    def __radd__(self, o):
        return add(_lift(o), self)

    def __sub__(self, o):
        return sub(self, _lift(o))

    def __rsub__(self, o):
        return sub(_lift(o), self)

    def __mul__(self, o):
        return mul(self, _lift(o))

    def __rmul__(self, o):
        return mul(_lift(o), self)

    def __truediv__(self, o):
        return div(self, _lift(o))

    def __rtruediv__(self, o):
        return div(_lift(o), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, o):
        return power(self, _lift(o))


class Num(Expr):
    __slots__ = ("value",)
    kind = "num"

    def _init(self, value):
        self.value = value


class Const(Expr):
    __slots__ = ("name",)
    kind = "const"

    def _init(self, name):
        self.name = name


class Var(Expr):
    __slots__ = ("name",)
    kind = "var"

    def _init(self, name):
        self.name = name


class _Binary(Expr):
    __slots__ = ("a", "b")

    def _init(self, a, b):
        self.a = a
        self.b = b

    @property
    def children(self):
        return (self.a, self.b)


class Add(_Binary):
    __slots__ = ()
    kind = "add"


class Sub(_Binary):
    __slots__ = ()
    kind = "sub"


class Mul(_Binary):
    __slots__ = ()
    kind = "mul"


class Div(_Binary):
    __slots__ = ()
    kind = "div"


class Neg(Expr):
    __slots__ = ("a",)
    kind = "neg"

    def _init(self, a):
        self.a = a

    @property
    def children(self):
        return (self.a,)


class Pow(Expr):
    """``base ^ q`` with a rational constant ``q``."""

    __slots__ = ("a", "q")
    kind = "pow"

    def _init(self, a, q):
        self.a = a
        self.q = q

    @property
    def children(self):
        return (self.a,)


class GenPow(_Binary):
    """``base ^ exponent`` with a non-constant exponent; needs ``base > 0``."""

    __slots__ = ()
    kind = "genpow"


class Call(Expr):
    """Unary builtin or kernel; ``order`` is the kernel derivative order."""

    __slots__ = ("func", "a", "order")
    kind = "call"

    def _init(self, func, a, order=0):
        self.func = func
        self.a = a
        self.order = order

    @property
    def children(self):
        return (self.a,)


ZERO = Num(Fraction(0))
ONE = Num(Fraction(1))


def _lift(v) -> Expr:
    if isinstance(v, Expr):
        return v
    return num(v)


def num(v) -> Num:
    if isinstance(v, complex):
        if v.imag == 0:
            v = v.real
        else:
            return Num(v)
    if isinstance(v, (int, Fraction)):
        return Num(Fraction(v))
    if not math.isfinite(v):
        raise DSLError(f"non-finite constant {v!r}")
    return Num(Fraction(float(v)))


def var(name: str) -> Var:
    return Var(name)


def _is_num(e, value=None) -> bool:
    return isinstance(e, Num) and (value is None or e.value == value)


def _fold(a, b, op):
    try:
        r = op(a.value, b.value)
    except (ZeroDivisionError, OverflowError):
        return None
    return num(r) if not isinstance(r, complex) else Num(r)


def add(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        return _fold(a, b, lambda x, y: x + y)
    if _is_num(a, 0):
        return b
    if _is_num(b, 0):
        return a
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        return _fold(a, b, lambda x, y: x - y)
    if _is_num(b, 0):
        return a
    if _is_num(a, 0):
        return neg(b)
    if a is b:
        return ZERO
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        return _fold(a, b, lambda x, y: x * y)
    if _is_num(a, 0) or _is_num(b, 0):
        return ZERO
    if _is_num(a, 1):
        return b
    if _is_num(b, 1):
        return a
    if _is_num(b):
        a, b = b, a
    if _is_num(a) and isinstance(b, Mul) and _is_num(b.a):
        return mul(_fold(a, b.a, lambda x, y: x * y), b.b)
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b) and not _is_num(b, 0):
        return _fold(a, b, lambda x, y: x / y)
    if _is_num(a, 0) and not _is_num(b, 0):
        return ZERO
    if _is_num(b, 1):
        return a
    return Div(a, b)


def neg(a: Expr) -> Expr:
    if _is_num(a):
        return num(-a.value) if not isinstance(a.value, complex) else Num(-a.value)
    if isinstance(a, Neg):
        return a.a
    return Neg(a)


def pow_q(a: Expr, q) -> Expr:
    q = Fraction(q)
    if q == 0:
        return ONE
    if q == 1:
        return a
    if _is_num(a) and q.denominator == 1 and not (_is_num(a, 0) and q < 0):
        return num(Fraction(a.value) ** int(q)) if isinstance(a.value, Fraction) else Num(a.value ** int(q))
    return Pow(a, q)


def power(a: Expr, e: Expr) -> Expr:
    if _is_num(e) and isinstance(e.value, Fraction):
        return pow_q(a, e.value)
    if _is_num(e):
        raise DSLError("exponents must be real rational constants or non-constant expressions")
    return GenPow(a, e)


def call(func: str, a: Expr, order: int = 0) -> Expr:
    if func in UNARY:
        if order:
            raise DSLError(f"{func} has no order suffix")
        if func == "exp" and _is_num(a, 0):
            return ONE
        if func == "log" and _is_num(a, 1):
            return ZERO
        return Call(func, a, 0)
    if func in kernels.KERNELS:
        if not 0 <= order <= MAX_KERNEL_ORDER:
            raise DSLError(f"kernel derivative order {order} out of range")
        return Call(func, a, order)
    raise DSLError(f"unknown function {func!r}")


# ---------------------------------------------------------------- parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)
_VAR = re.compile(r"x([1-9]\d*)$")
_KERNEL = re.compile(r"(bump|gauss)(?:_(\d+))?$")


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str, line0: int = 1):
    toks = []
    for lineno, line in enumerate(text.split("\n"), start=line0):
        pos = 0
        while pos < len(line):
            if line[pos:].strip() == "":
                break
            m = _TOKEN.match(line, pos)
            if not m or m.end() == pos:
                col = pos + len(line[pos:]) - len(line[pos:].lstrip()) + 1
                raise ParseError(f"unexpected character {line[col - 1]!r}", lineno, col)
            kind = m.lastgroup
            start = m.start(kind)
            toks.append(_Tok(kind, m.group(kind), lineno, start + 1))
            pos = m.end()
    end_line = line0 + text.count("\n")
    toks.append(_Tok("end", "", end_line, len(text.split("\n")[-1]) + 1))
    return toks


class _Parser:
    def __init__(self, text: str, dim: int | None, line0: int):
        self.toks = _tokenize(text, line0)
        self.pos = 0
        self.dim = dim

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.next()
        if t.text != text:
            found = "end of input" if t.kind == "end" else repr(t.text)
            raise ParseError(f"expected {text!r}, found {found}", t.line, t.col)
        return t

    def fail(self, t: _Tok, what: str = "expression"):
        found = "end of input" if t.kind == "end" else repr(t.text)
        raise ParseError(f"expected {what}, found {found}", t.line, t.col)

    def mark(self, node: Expr, t: _Tok) -> Expr:
        if node not in _POSITIONS:
            _POSITIONS[node] = (t.line, t.col)
        return node

    def parse(self) -> Expr:
        e = self.expr()
        t = self.peek()
        if t.kind != "end":
            self.fail(t, "operator or end of input")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().text in ("+", "-"):
            t = self.next()
            rhs = self.term()
            e = self.mark(add(e, rhs) if t.text == "+" else sub(e, rhs), t)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek().text in ("*", "/"):
            t = self.next()
            rhs = self.unary()
            try:
                e = self.mark(mul(e, rhs) if t.text == "*" else div(e, rhs), t)
            except DSLError as err:
                raise ParseError(str(err), t.line, t.col) from None
        return e

    def unary(self) -> Expr:
        if self.peek().text == "-":
            t = self.next()
            return self.mark(neg(self.unary()), t)
        return self.power()

    def power(self) -> Expr:
        b = self.base()
        if self.peek().text == "^":
            t = self.next()
            ex = self.exponent()
            try:
                return self.mark(power(b, ex), t)
            except DSLError as err:
                raise ParseError(str(err), t.line, t.col) from None
        return b

    def exponent(self) -> Expr:
        if self.peek().text == "-":
            t = self.next()
            return self.mark(neg(self.exponent()), t)
        b = self.base()
        if self.peek().text == "^":
            t = self.next()
            ex = self.exponent()
            try:
                return self.mark(power(b, ex), t)
            except DSLError as err:
                raise ParseError(str(err), t.line, t.col) from None
        return b

    def base(self) -> Expr:
        t = self.next()
        if t.kind == "num":
            return num(Fraction(t.text))
        if t.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            if self.peek().text == "(":
                return self.application(t)
            return self.mark(self.identifier(t), t)
        self.fail(t)

    def identifier(self, t: _Tok) -> Expr:
        name = t.text
        if name in CONSTANTS:
            return Const(name)
        if name == "eps":
            return Var(name)
        m = _VAR.match(name)
        if m:
            if self.dim is not None and int(m.group(1)) > self.dim:
                raise ParseError(f"variable {name} exceeds dimension {self.dim}", t.line, t.col)
            return Var(name)
        if name in UNARY or _KERNEL.match(name):
            raise ParseError(f"function {name} needs an argument", t.line, t.col)
        raise ParseError(f"unknown identifier {name!r}", t.line, t.col)

    def application(self, t: _Tok) -> Expr:
        name = t.text
        km = _KERNEL.match(name)
        if name not in UNARY and not km:
            if name in CONSTANTS or name == "eps" or _VAR.match(name):
                raise ParseError(f"{name} is not a function", t.line, t.col)
            raise ParseError(f"unknown function {name!r}", t.line, t.col)
        self.expect("(")
        args = [self.expr()]
        while self.peek().text == ",":
            self.next()
            args.append(self.expr())
        self.expect(")")
        if len(args) != 1:
            raise ParseError(f"{name} takes 1 argument, got {len(args)}", t.line, t.col)
        try:
            if km:
                node = call(km.group(1), args[0], int(km.group(2) or 0))
            else:
                node = call(name, args[0])
        except DSLError as err:
            raise ParseError(str(err), t.line, t.col) from None
        return self.mark(node, t)


def parse(text: str, dim: int | None = None, *, line: int = 1) -> Expr:
    """Parse ``text`` into an expression.

    >>> str(parse("eps^-1 * bump(x1/eps)"))
    '(eps^(-1))*bump(x1/eps)'
    """
    return _Parser(text, dim, line).parse()


# ---------------------------------------------------------------- printer

_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


def _atomic(e: Expr) -> bool:
    if isinstance(e, Num):
        return isinstance(e.value, Fraction) and e.value >= 0 and e.value.denominator == 1
    return isinstance(e, (Var, Const, Call))


def _wrap(e: Expr) -> str:
    s = to_text(e)
    return s if _atomic(e) else f"({s})"


def _operand(e: Expr) -> str:
    """Operand of + - * / or unary minus: powers bind tighter and need no parentheses."""
    return to_text(e) if isinstance(e, (Pow, GenPow)) else _wrap(e)


def _num_text(v) -> str:
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, complex):
        return f"{v.real!r}+{v.imag!r}*i" if v.real else f"{v.imag!r}*i"
    return repr(v)


def to_text(e: Expr) -> str:
    """Render with enough parentheses that ``parse(to_text(e)) is e``."""
    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, (Var, Const)):
        return e.name
    if isinstance(e, _Binary) and e.kind in _SYMBOL:
        return f"{_operand(e.a)}{_SYMBOL[e.kind]}{_operand(e.b)}"
    if isinstance(e, Neg):
        return f"-{_operand(e.a)}"
    if isinstance(e, Pow):
        q = e.q
        exp = str(q.numerator) if q.denominator == 1 and q >= 0 else f"({_num_text(q)})"
        return f"{_wrap(e.a)}^{exp}"
    if isinstance(e, GenPow):
        return f"{_wrap(e.a)}^({to_text(e.b)})"
    if isinstance(e, Call):
        name = e.func if not e.order else f"{e.func}_{e.order}"
        return f"{name}({to_text(e.a)})"
    raise TypeError(e)


def walk(e: Expr):
    """Distinct nodes of the DAG, children before parents."""
    seen = set()
    order = []
    stack = [(e, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for c in node.children:
            stack.append((c, False))
    return order


def variables(e: Expr) -> set:
    return {n.name for n in walk(e) if isinstance(n, Var)}


def max_coordinate(e: Expr) -> int:
    """Largest ``d`` among the ``xd`` variables used, 0 if none."""
    ds = [int(_VAR.match(v).group(1)) for v in variables(e) if _VAR.match(v)]
    return max(ds, default=0)


def source_position(e: Expr):
    return _POSITIONS.get(e)


# ---------------------------------------------------------------- differentiation

def _check_var(name: str):
    if name != "eps" and not _VAR.match(name):
        raise DSLError(f"cannot differentiate with respect to {name!r}")


def differentiate(e: Expr, name: str) -> Expr:
    """Symbolic partial derivative of ``e`` with respect to variable ``name``."""
    _check_var(name)
    memo: dict = {}
    for node in walk(e):
        memo[node] = _d(node, name, memo)
    return memo[e]


def _d(e: Expr, name: str, memo) -> Expr:
    if isinstance(e, (Num, Const)):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == name else ZERO
    if isinstance(e, Add):
        return add(memo[e.a], memo[e.b])
    if isinstance(e, Sub):
        return sub(memo[e.a], memo[e.b])
    if isinstance(e, Neg):
        return neg(memo[e.a])
    if isinstance(e, Mul):
        return add(mul(memo[e.a], e.b), mul(e.a, memo[e.b]))
    if isinstance(e, Div):
        da, db = memo[e.a], memo[e.b]
        if db is ZERO:
            return div(da, e.b)
        return div(sub(mul(da, e.b), mul(e.a, db)), pow_q(e.b, 2))
    if isinstance(e, Pow):
        da = memo[e.a]
        if da is ZERO:
            return ZERO
        return mul(mul(num(e.q), pow_q(e.a, e.q - 1)), da)
    if isinstance(e, GenPow):
        # d(b^g) = b^g * (g' log b + g b'/b)
        da, dg = memo[e.a], memo[e.b]
        inner = add(mul(dg, call("log", e.a)), div(mul(e.b, da), e.a))
        return mul(e, inner)
    if isinstance(e, Call):
        da = memo[e.a]
        if da is ZERO:
            return ZERO
        f, a = e.func, e.a
        if f == "exp":
            outer = e
        elif f == "sin":
            outer = call("cos", a)
        elif f == "cos":
            outer = neg(call("sin", a))
        elif f == "log":
            outer = div(ONE, a)
        elif f == "sqrt":
            outer = div(num(Fraction(1, 2)), e)
        else:
            outer = call(f, a, e.order + 1)
        return mul(outer, da)
    raise TypeError(e)


# ---------------------------------------------------------------- evaluation

def _describe(node: Expr) -> str:
    pos = source_position(node)
    where = f" at line {pos[0]}, column {pos[1]}" if pos else ""
    return f"{to_text(node)!s}{where}"


class Evaluator:
    """Evaluates a set of expressions at one ``(eps, x)`` batch.

    ``value`` returns complex values; ``log`` returns the complex logarithm
    ``log|v| + i arg v`` computed without ever forming ``v`` where it would
    overflow.  Both memoize per node, so derivative DAGs are cheap.
    """

    def __init__(self, eps: float, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            x = x[None]
        if x.ndim == 1:
            x = x[:, None]
        self.x = x
        self.eps = float(eps)
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        self.shape = x.shape[:1]
        self._val: dict = {}
        self._log: dict = {}

    def _const(self, v):
        return np.full(self.shape, complex(v))

    def var_value(self, name: str):
        if name == "eps":
            return self._const(self.eps)
        j = int(name[1:])
        if j > self.x.shape[1]:
            raise DSLError(f"variable {name} exceeds point dimension {self.x.shape[1]}")
        return self.x[:, j - 1].astype(complex)

    def value(self, e: Expr):
        for node in walk(e):
            if node not in self._val:
                self._val[node] = self._value(node)
        return self._val[e]

    def _real_arg(self, node: Expr, v):
        if np.any(np.abs(v.imag) > 1e-12 * np.maximum(1.0, np.abs(v.real))):
            raise DomainError(f"{node.func} needs a real argument: {_describe(node)}")
        return v.real

    def _value(self, e: Expr):
        V = self._val
        if isinstance(e, Num):
            return self._const(e.value)
        if isinstance(e, Const):
            return self._const(CONSTANTS[e.name])
        if isinstance(e, Var):
            return self.var_value(e.name)
        with np.errstate(all="ignore"):
            if isinstance(e, Add):
                return V[e.a] + V[e.b]
            if isinstance(e, Sub):
                return V[e.a] - V[e.b]
            if isinstance(e, Mul):
                return V[e.a] * V[e.b]
            if isinstance(e, Div):
                return V[e.a] / V[e.b]
            if isinstance(e, Neg):
                return -V[e.a]
            if isinstance(e, Pow):
                return _qpow(V[e.a], e.q)
            if isinstance(e, GenPow):
                return np.exp(self.log(e))
            if isinstance(e, Call):
                a = V[e.a]
                if e.func == "exp":
                    return np.exp(a)
                if e.func == "sin":
                    return np.sin(a)
                if e.func == "cos":
                    return np.cos(a)
                if e.func == "sqrt":
                    return np.sqrt(a)
                if e.func == "log":
                    self._positive(e, a)
                    return np.log(a.real).astype(complex)
                t = self._real_arg(e, a)
                logmag, sign = kernels.KERNELS[e.func](t, e.order)
                return (sign * np.exp(logmag)).astype(complex)
        raise TypeError(e)

    def _positive(self, node: Expr, a):
        bad = (np.abs(a.imag) > 1e-12 * np.maximum(1.0, np.abs(a.real))) | ~(a.real > 0)
        if np.any(bad):
            k = int(np.argmax(bad))
            what = "log" if isinstance(node, Call) else "non-constant power"
            raise DomainError(
                f"{what} of non-positive value {a[k]:.6g} in {_describe(node)}"
            )

    def log(self, e: Expr):
        for node in walk(e):
            if node not in self._log:
                self._log[node] = self._logv(node)
        return self._log[e]

    def _logv(self, e: Expr):
        L = self._log
        with np.errstate(all="ignore"):
            if isinstance(e, (Num, Const, Var)):
                return _clog(self.value(e))
            if isinstance(e, (Add, Sub)):
                lb = L[e.b] if isinstance(e, Add) else L[e.b] + 1j * math.pi
                return _logaddexp(L[e.a], lb)
            if isinstance(e, Mul):
                return _lmul(L[e.a], L[e.b])
            if isinstance(e, Div):
                return _lmul(L[e.a], -L[e.b])
            if isinstance(e, Neg):
                return L[e.a] + 1j * math.pi
            if isinstance(e, Pow):
                return _lscale(L[e.a], float(e.q))
            if isinstance(e, GenPow):
                lb = L[e.a]
                self._positive(e, np.where(np.isfinite(lb.real), np.exp(1j * lb.imag), 0))
                g = self.value(e.b)
                return _lmul_real(lb.real, g)
            if isinstance(e, Call):
                if e.func == "exp":
                    return self.value(e.a).astype(complex)
                if e.func == "sqrt":
                    return L[e.a] / 2
                if e.func == "log":
                    la = L[e.a]
                    self._positive(e, np.where(np.isfinite(la.real), np.exp(1j * la.imag), 0))
                    return _clog(la.real.astype(complex))
                if e.func in ("sin", "cos"):
                    return _clog(self.value(e))
                t = self._real_arg(e, self.value(e.a))
                logmag, sign = kernels.KERNELS[e.func](t, e.order)
                return logmag + 1j * np.where(sign < 0, math.pi, 0.0)
        raise TypeError(e)


def _qpow(a, q: Fraction):
    if q.denominator == 1:
        n = int(q)
        if n < 0:
            return 1.0 / a ** (-n)
        return a**n
    return np.power(a, float(q))


def _clog(v):
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(np.asarray(v, dtype=complex))
    return np.where(v == 0, complex(-np.inf, 0.0), out)


def _lmul(a, b):
    out = a + b
    zero = np.isneginf(a.real) | np.isneginf(b.real)
    return np.where(zero, complex(-np.inf, 0.0), out)


def _lmul_real(lb_real, g):
    out = lb_real * g
    zero = np.isneginf(lb_real) & (g.real > 0)
    return np.where(zero, complex(-np.inf, 0.0), out)


def _lscale(la, q):
    out = la * q
    return np.where(np.isneginf(la.real) & (q > 0), complex(-np.inf, 0.0), out)


def _logaddexp(a, b):
    """Complex ``log(exp(a) + exp(b))``."""
    swap = a.real < b.real
    hi = np.where(swap, b, a)
    lo = np.where(swap, a, b)
    with np.errstate(all="ignore"):
        out = hi + np.log1p(np.exp(lo - hi))
        # exact cancellation gives log(0)
        out = np.where(np.isneginf(out.real), complex(-np.inf, 0.0), out)
    out = np.where(np.isneginf(lo.real), hi, out)
    return np.where(np.isneginf(hi.real), complex(-np.inf, 0.0), out)


def evaluate(e: Expr, eps: float, x) -> np.ndarray:
    """Complex values of ``e`` at ``eps`` and points ``x`` (shape ``(n,)`` or ``(n, d)``)."""
    return Evaluator(eps, x).value(e)


def evaluate_log(e: Expr, eps: float, x) -> np.ndarray:
    """Complex logarithm of ``e``; ``-inf`` real part marks zeros."""
    return Evaluator(eps, x).log(e)


def compile_expr(e: Expr) -> Callable:
    """Convenience: ``f(eps, x)`` returning complex values."""
    return lambda eps, x: evaluate(e, eps, x)


def affine_features(e: Expr, eps: float, name: str = "x1") -> list:
    """``(center, scale, kind)`` for every kernel or oscillatory call whose
    argument is affine in ``name`` with a real slope at this ``eps``.

    A kernel ``bump(p + q x)`` is centred at ``-p/q`` with width ``1/|q|``;
    ``sin``/``cos``/``exp`` of an affine argument oscillate on scale ``1/|q|``.
    """
    out = []
    probes = np.array([[0.0], [1.0], [2.0]])
    for node in walk(e):
        if not isinstance(node, Call) or node.func in ("log", "sqrt"):
            continue
        if name not in variables(node.a):
            continue
        try:
            a0, a1, a2 = Evaluator(eps, probes).value(node.a)
        except (DSLError, ArithmeticError):
            continue
        q = a1 - a0
        if not np.isfinite(q) or q == 0 or abs((a2 - a1) - q) > 1e-9 * max(1.0, abs(q)):
            continue
        if node.func in kernels.KERNELS:
            if abs(q.imag) > 0 or abs(a0.imag) > 0:
                continue
            out.append((float(-a0.real / q.real), float(1.0 / abs(q.real)), "kernel"))
        elif node.func in ("sin", "cos") and q.imag == 0:
            out.append((0.0, float(1.0 / abs(q.real)), "oscillation"))
        elif node.func == "exp" and q.real == 0:
            out.append((0.0, float(1.0 / abs(q.imag)), "oscillation"))
    return out

