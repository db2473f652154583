import math

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from stolarskyfv.errors import ExprDomainError, ExprEvalError, ExprSyntaxError
from stolarskyfv.exprparse import (
    BinOp, Call, Const, Expression, Neg, Num, Var, evaluate, parse, to_string, variables,
)


@pytest.mark.parametrize("text,x,expected", [
    ("2*sin(2*pi*x)", 0.25, 2.0),
    ("x*(1-x)", 0.5, 0.25),
    ("5*(x+1)*x", 1.0, 10.0),
    ("2^3^2", 0.0, 512.0),
    ("exp(-x)", 0.0, 1.0),
    ("sqrt(abs(-4))", 0.0, 2.0),
    ("-2^2", 0.0, -4.0),
    ("2*-x", 3.0, -6.0),
    ("1e-3 + .5", 0.0, 0.501),
    ("e", 0.0, math.e),
    ("8/2/2", 0.0, 2.0),
    ("2-3-4", 0.0, -5.0),
])
def test_values(text, x, expected):
    assert evaluate(parse(text), {"x": x}) == pytest.approx(expected, rel=1e-15, abs=1e-15)


@pytest.mark.parametrize("text", ["log(x)", "sqrt(x)", "1/(x+1)", "0^(-1)", "x^0.5", "exp(1000)"])
def test_domain_errors(text):
    with pytest.raises(ExprDomainError):
        evaluate(parse(text), {"x": -1.0})


@pytest.mark.parametrize("text,offset", [
    ("sin(", 4), ("2 +", 3), ("foo(x)", 0), ("1 $ 2", 2), ("(1", 2), ("1 2", 2), ("", 0), ("sin x", 4),
])
def test_syntax_error_offsets(text, offset):
    with pytest.raises(ExprSyntaxError) as info:
        parse(text)
    assert info.value.offset == offset


def test_offsets_are_bytes():
    with pytest.raises(ExprSyntaxError) as info:
        parse("1 + é")
    assert info.value.offset == 4


def test_undefined_variable():
    with pytest.raises(ExprEvalError):
        evaluate(parse("y + 1"), {"x": 1.0})


def test_vectorised_and_callable():
    e = Expression("x*y + 1")
    out = e(np.array([1.0, 2.0]), np.array([3.0, 4.0]))
    np.testing.assert_array_equal(out, [4.0, 9.0])
    assert Expression("3")(np.zeros(4)).shape == (4,)
    assert e == Expression("(x * y) + 1") and hash(e) == hash(Expression("x*y+1"))
    assert variables(parse("sin(x) + z*pi")) == {"x", "z"}


def test_tree_shape():
    assert parse("-x^2") == Neg(BinOp("^", Var("x"), Num(2.0)))
    assert parse("cos(pi)") == Call("cos", Const("pi"))


leaves = st.one_of(
    st.floats(0, 1e6, allow_nan=False).map(Num),
    st.sampled_from([Var("x"), Var("y"), Const("pi"), Const("e")]),
)


def extend(children):
    return st.one_of(
        children.map(Neg),
        st.tuples(st.sampled_from("+-*/^"), children, children).map(lambda t: BinOp(*t)),
        st.tuples(st.sampled_from(["sin", "cos", "exp", "log", "sqrt", "abs"]), children).map(lambda t: Call(*t)),
    )


trees = st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=400, deadline=None)
@given(trees)
def test_round_trip(tree):
    text = to_string(tree)
    assert parse(text) == tree
    assert to_string(parse(text)) == text


@settings(max_examples=400, deadline=None)
@given(trees, st.floats(-3, 3), st.floats(-3, 3))
def test_evaluation_is_finite_or_reports(tree, x, y):
    try:
        v = evaluate(tree, {"x": x, "y": y})
    except ExprEvalError:
        return
    assert np.all(np.isfinite(v))


@settings(max_examples=400, deadline=None)
@given(st.text(alphabet="xy+-*/^() .0123456789sinpe", max_size=20))
def test_fuzz_never_crashes(text):
    try:
        parse(text)
    except ExprSyntaxError as exc:
        assert 0 <= exc.offset <= len(text.encode())
