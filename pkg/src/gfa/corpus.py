"""Expressions exercising every grammar rule, and smooth families with probe
boxes for derivative checks."""
from __future__ import annotations

GRAMMAR_CORPUS = (
    "0",
    "42",
    "3/4",
    "2.5",
    "1e-3",
    "eps",
    "x1",
    "pi",
    "i",
    "-x1",
    "--x1",
    "x1 + 1",
    "x1 - eps",
    "2*x1",
    "x1/eps",
    "x1^2",
    "x1^-1",
    "x1^(1/2)",
    "2^3^2",
    "-x1^2",
    "(x1 + 1)*(x1 - 1)",
    "x1*x2 + x2^3",
    "exp(-x1^2)",
    "sin(x1/eps)",
    "cos(pi*x1)",
    "log(1 + x1^2)",
    "sqrt(1 + eps*x1^2)",
    "bump(x1)",
    "bump_3(x1/eps)",
    "gauss(x1 - 1/eps)",
    "gauss_2(x1)*x2",
    "eps^-1*bump(x1/eps)",
    "bump(x1)*exp(i*x1/eps)",
    "(1 + x1^2)^(log(1 + x1^2)/log(1/eps))",
    "x1^2*sin(x1/eps)",
    "exp(x1)*cos(x2) - sin(x1*x2)",
    "(x1 + 2)^eps",
    "1/(x1^2 + eps^2)",
    "log(1/eps)*gauss(x1)",
    "((x1))",
)

# text, dimension, probe box per coordinate, eps values
DERIVATIVE_FAMILIES = (
    ("x1^2*sin(x1/eps)", 1, (-1.0, 1.0), (0.5, 0.1)),
    ("exp(-x1^2)*cos(3*x1)", 1, (-2.0, 2.0), (0.5,)),
    ("log(1 + x1^2)/(1 + eps*x1^2)", 1, (-3.0, 3.0), (0.25,)),
    ("bump(x1)*exp(i*x1/eps)", 1, (-0.9, 0.9), (0.25,)),
    ("eps^-1*bump(x1/eps)", 1, (-0.2, 0.2), (0.25,)),
    ("gauss(x1 - 1/eps)", 1, (1.0, 6.0), (0.25,)),
    ("(1 + x1^2)^(log(1 + x1^2)/log(1/eps))", 1, (-3.0, 3.0), (0.1, 0.01)),
    ("sqrt(2 + sin(x1))*x1^3", 1, (-2.0, 2.0), (0.5,)),
    ("1/(x1^2 + eps^2)", 1, (-1.0, 1.0), (0.5,)),
    ("exp(x1)*cos(x2) - sin(x1*x2)", 2, (-1.0, 1.0), (0.5,)),
    ("gauss_2(x1)*x2^2 + bump(x2/2)", 2, (-1.5, 1.5), (0.5,)),
)
