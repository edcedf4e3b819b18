import math

import pytest
import sympy as sp

from symbolic.expr_core import (
    EvaluationDomainError,
    ExprSyntaxError,
    UnboundSymbolError,
    UnknownFunctionError,
    diff,
    evaluate,
    is_symbolic_zero,
    jet,
    jet_parts,
    numeric_residual,
    parse,
    simplify,
    to_text,
)

X, Y = sp.symbols("x y")
UX = jet("u", "x")
ATOMS = (X, Y, UX)


def _random_expr(rng, depth, transcendental=True):
    """Random tree over x, y, u_x that stays finite for arguments in [-1, 1]."""
    if depth == 0:
        if rng.random() < 0.25:
            return sp.Integer(int(rng.integers(1, 4)))
        return ATOMS[int(rng.integers(len(ATOMS)))]
    a = _random_expr(rng, depth - 1, transcendental)
    b = _random_expr(rng, depth - 1, transcendental)
    ops = ["add", "mul", "square", "damp"] + (["exp", "sin", "cosh"] if transcendental else [])
    op = ops[int(rng.integers(len(ops)))]
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "square":
        return (a - b) ** 2
    if op == "damp":
        return a / (1 + b**2)
    return {"exp": sp.exp, "sin": sp.sin, "cosh": sp.cosh}[op](a)


def _random_binding(rng):
    return {s: float(rng.uniform(-1.0, 1.0)) for s in ATOMS}


def test_parse_reads_jets_and_powers():
    """Underscore suffixes become jet symbols and ^ is exponentiation."""
    e = parse("u_x^2 + eps*u")
    u_x = jet("u", "x")

    assert u_x in e.free_symbols
    assert sp.diff(e, u_x) == 2 * u_x
    assert jet_parts(u_x).derivs == ("x",)


def test_jet_suffix_order_is_canonical():
    """Mixed derivatives name the same symbol in any order."""
    assert jet("u", "x", "z") == jet("u", "z", "x")
    assert jet(jet("u", "x"), "x") == jet("u", "x", "x")


def test_parse_multi_letter_variables_with_scope():
    """u_eps decodes as a derivative along eps when eps is an independent."""
    e = parse("u_eps", independents=["z", "x", "eps"])
    (sym,) = e.free_symbols

    assert jet_parts(sym).derivs == ("eps",)


def test_parse_numbers_are_exact():
    """Decimal literals become rationals."""
    assert parse("0.5*x") == sp.Rational(1, 2) * sp.Symbol("x")


@pytest.mark.parametrize(
    "text",
    ["u_x +", "(x + 1", "x + 1)", "x $ 2", ""],
)
def test_parse_rejects_malformed_text(text):
    """Syntax errors carry a position."""
    with pytest.raises(ExprSyntaxError) as info:
        parse(text)
    assert info.value.line >= 1 and info.value.column >= 1


def test_parse_rejects_unknown_function():
    """Only whitelisted functions are callable."""
    with pytest.raises(UnknownFunctionError):
        parse("gamma(x)")


def test_simplify_is_idempotent():
    """Normal form of a normal form is unchanged."""
    e = parse("(x^2 - 1)/(x - 1) + u_x*(x + 1) - u_x*x")
    once = simplify(e)

    assert simplify(once) == once
    assert simplify(once - (parse("x + 1 + u_x"))) == 0


def test_symbolic_zero_falls_back_for_transcendental_identities():
    """cosh^2 - sinh^2 - 1 is zero only after sympy's trigonometric rewriting."""
    assert is_symbolic_zero(parse("cosh(x)^2 - sinh(x)^2 - 1"))
    assert not is_symbolic_zero(parse("cosh(x)^2 - 1"))


def test_to_text_parses_back():
    """Printed expressions are accepted by the parser."""
    e = parse("-3*Omega^2*t*E + cosh(x)^-2")

    assert simplify(parse(to_text(e)) - e) == 0
    assert "**" not in to_text(e)


def test_evaluate_with_names_and_symbols():
    """Bindings may be keyed by name or symbol."""
    assert evaluate("x^2 + y", {"x": 3, sp.Symbol("y"): 1}) == pytest.approx(10.0)
    assert evaluate(parse("exp(x)"), {"x": 1.0}) == pytest.approx(math.e)


def test_evaluate_reports_missing_symbols():
    """Unbound symbols are listed in the error."""
    with pytest.raises(UnboundSymbolError) as info:
        evaluate("x + y", {"x": 1})
    assert "y" in str(info.value)


def test_evaluate_reports_offending_subexpression():
    """log of a negative number names the failing subexpression."""
    with pytest.raises(EvaluationDomainError) as info:
        evaluate("1 + log(x - 2)", {"x": 1.0})
    assert "log" in str(info.value)


def test_numeric_residual_of_identity_is_roundoff(rng):
    """An identity evaluates to zero up to scaled roundoff."""
    e = parse("(x + y)^2 - x^2 - 2*x*y - y^2")

    assert numeric_residual(e, rng=rng) < 1e-12
    assert numeric_residual(parse("x - 2*y"), rng=rng) > 1e-3


def test_simplify_preserves_values(rng):
    """simplify(e) and e agree on 1000 random (expression, binding) pairs."""
    for _ in range(200):
        e = _random_expr(rng, 2)
        normal = simplify(e)
        for _ in range(5):
            binding = _random_binding(rng)
            assert evaluate(normal, binding) == pytest.approx(evaluate(e, binding), rel=1e-9, abs=1e-9), e


def test_simplify_is_idempotent_on_random_quotients(rng):
    """The normal form of a random rational expression is a fixed point."""
    for _ in range(100):
        once = simplify(_random_expr(rng, 2, transcendental=False))
        assert simplify(once) == once


def test_diff_matches_central_differences(rng):
    """Partial derivatives agree with (e(s + h) - e(s - h)) / 2h."""
    h = 1e-5
    for _ in range(100):
        e = _random_expr(rng, 2)
        binding = _random_binding(rng)
        s = ATOMS[int(rng.integers(len(ATOMS)))]
        forward = evaluate(e, {**binding, s: binding[s] + h})
        backward = evaluate(e, {**binding, s: binding[s] - h})
        exact = evaluate(diff(e, s), binding)
        assert exact == pytest.approx((forward - backward) / (2 * h), rel=1e-5, abs=1e-5), (e, s)
