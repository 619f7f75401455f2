import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfa import dsl
from gfa.corpus import GRAMMAR_CORPUS
from gfa.family import family_from_expr, parse_family_file
from gfa.oracles import mp_partial


@pytest.mark.parametrize("text", GRAMMAR_CORPUS)
def test_corpus_round_trip(text):
    e = dsl.parse(text)
    printed = dsl.to_text(e)
    assert dsl.parse(printed) is e
    assert dsl.to_text(dsl.parse(printed)) == printed


def test_corpus_size():
    assert len(GRAMMAR_CORPUS) == 40


def test_hash_consing_shares_nodes():
    assert dsl.parse("x1*sin(x1)") is dsl.parse("x1 * sin( x1 )")


def test_power_is_right_associative_and_binds_tighter_than_minus():
    assert dsl.parse("2^3^2") is dsl.parse("2^(3^2)")
    assert dsl.parse("-x1^2") is dsl.parse("-(x1^2)")


@pytest.mark.parametrize("text,line,col", [
    ("x1 +", 1, 5),
    ("sin(x1", 1, 7),
    ("foo(x1)", 1, 1),
    ("x1 $ 2", 1, 4),
])
def test_parse_errors_carry_positions(text, line, col):
    with pytest.raises(dsl.ParseError) as info:
        dsl.parse(text)
    assert (info.value.line, info.value.column) == (line, col)


def test_coordinate_beyond_dimension_is_rejected():
    with pytest.raises(dsl.DSLError):
        dsl.parse("x3", 2)


def test_family_file_format():
    fam = parse_family_file("# a comment\ndim = 1\nname = osc\nu = bump(x1)*\n    sin(x1/eps)\n")
    assert fam.name == "osc" and fam.dim == 1
    assert fam.expr is dsl.parse("bump(x1)*sin(x1/eps)")
    with pytest.raises(dsl.ParseError) as info:
        parse_family_file("dim = 1\nu = x1 +\n")
    assert info.value.line == 2


def test_derivative_of_polynomial_is_exact():
    d = dsl.differentiate(dsl.parse("x1^3 + 2*x1"), "x1")
    fam = family_from_expr(d, 1)
    x = np.linspace(-2, 2, 9)
    np.testing.assert_allclose(fam.value(0.5, x).real, 3 * x**2 + 2, rtol=1e-15)


@pytest.mark.parametrize("text,eps", [
    ("x1^2*sin(x1/eps)", 0.1),
    ("bump(x1)*exp(i*x1/eps)", 0.3),
    ("(1 + x1^2)^(log(1 + x1^2)/log(1/eps))", 0.01),
    ("gauss(x1 - 1/eps)", 0.5),
])
def test_symbolic_derivatives_match_high_precision_differences(text, eps):
    fam = family_from_expr(text, 1)
    for x in np.linspace(-0.9, 0.9, 7):
        for order in (1, 2, 3):
            sym = fam.deriv(order, eps, np.array([x]))[0]
            ref = mp_partial(fam.expr, "x1", {"x1": float(x), "eps": eps}, order)
            assert abs(sym - ref) <= 1e-9 * max(1.0, abs(ref))


leaves = st.sampled_from(["x1", "eps", "2", "1/3", "pi"])


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from(["+", "-", "*", "/"]), children).map(
            lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(st.sampled_from(["sin", "cos", "exp", "gauss", "bump"]), children).map(
            lambda t: f"{t[0]}({t[1]})"),
        st.tuples(children, st.sampled_from(["2", "-1", "(1/2)"])).map(lambda t: f"({t[0]})^{t[1]}"),
    )


expressions = st.recursive(leaves, _combine, max_leaves=8)


@given(expressions)
@settings(max_examples=200, deadline=None)
def test_random_expressions_round_trip(text):
    e = dsl.parse(text)
    assert dsl.parse(dsl.to_text(e)) is e


@given(expressions, st.floats(0.05, 0.9), st.floats(-0.8, 0.8))
@settings(max_examples=80, deadline=None)
def test_printed_form_evaluates_identically(text, eps, x):
    e = dsl.parse(text)
    a = family_from_expr(e, 1).value(eps, np.array([x]))[0]
    b = family_from_expr(dsl.to_text(e), 1).value(eps, np.array([x]))[0]
    np.testing.assert_array_equal(a, b)
