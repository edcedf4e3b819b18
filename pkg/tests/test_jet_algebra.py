from concurrent.futures import ThreadPoolExecutor

import pytest
import sympy as sp

from symbolic import jet_algebra
from symbolic.expr_core import jet, parse, simplify
from symbolic.jet_algebra import FrameError, LinearFunctional, ModelSystem, configure_frame_depth

Z, X, EPS, U = sp.symbols("z x eps u")
JET_ATOMS = (Z, X, EPS, U, jet("u", "x"), jet("u", "z"), jet("u", "x", "x"))


def _random_polynomial(rng, terms=3):
    """Sum of a few random monomials of degree <= 2 in the jet atoms."""
    total = sp.Integer(0)
    for _ in range(terms):
        coefficient = sp.Integer(int(rng.integers(-3, 4)))
        picks = rng.integers(len(JET_ATOMS), size=int(rng.integers(1, 3)))
        total += coefficient * sp.Mul(*(JET_ATOMS[int(k)] for k in picks))
    return total


def test_total_derivative_follows_the_chain_rule(hopf_frame):
    """D_x (u*u_x) = u_x^2 + u*u_xx."""
    u_x, u_xx = jet("u", "x"), jet("u", "x", "x")
    result = hopf_frame.total_derivative(U * u_x, "x")

    assert simplify(result - (u_x**2 + U * u_xx)) == 0


def test_total_derivative_leibniz_rule(hopf_frame):
    """D_z (a*b) = a*D_z b + b*D_z a."""
    a = parse("u*x + eps*u_x")
    b = parse("u_x^2 + z")
    lhs = hopf_frame.total_derivative(a * b, "z")
    rhs = a * hopf_frame.total_derivative(b, "z") + b * hopf_frame.total_derivative(a, "z")

    assert simplify(lhs - rhs) == 0


def test_total_derivatives_commute(hopf_frame):
    """D_x D_z e = D_z D_x e on the jet space."""
    e = parse("u^2*u_x + z*x*u_z")
    xz = hopf_frame.total_derivative(hopf_frame.total_derivative(e, "z"), "x")
    zx = hopf_frame.total_derivative(hopf_frame.total_derivative(e, "x"), "z")

    assert simplify(xz - zx) == 0


def test_total_derivative_rejects_non_independent(hopf_frame):
    """Differentiation along a dependent variable is an error."""
    with pytest.raises(ValueError):
        hopf_frame.total_derivative(U, "u")


def test_frame_reduce_eliminates_leading_jets(hopf_frame):
    """u_z and u_zx disappear on the frame."""
    u_x, u_z, u_xx = jet("u", "x"), jet("u", "z"), jet("u", "x", "x")
    reduced = hopf_frame.frame_reduce(jet("u", "x", "z"))

    assert u_z not in reduced.free_symbols
    assert simplify(reduced - (-EPS * u_x**2 - EPS * U * u_xx)) == 0
    assert simplify(hopf_frame.frame_reduce(u_z + EPS * U * u_x)) == 0


def test_equation_residuals_vanish(hopf_frame, optics_frame):
    """The equations themselves reduce to zero on their frames."""
    for frame in (hopf_frame, optics_frame):
        assert all(r == 0 for r in frame.equation_residuals())


def test_frame_depth_bound_raises():
    """A depth bound of zero rounds cannot finish a reduction."""
    sys = ModelSystem.build(["t", "x"], ["w"], {"w_t": "w_x"}, name="shift", max_depth=0)
    with pytest.raises(FrameError):
        sys.frame_reduce(jet("w", "t"))


def test_dependencies_limit_differentiation(vlasov_frame):
    """E depends on (t, x) only, so D_v E = 0."""
    assert vlasov_frame.total_derivative(sp.Symbol("E"), "v") == 0
    assert vlasov_frame.total_derivative(sp.Symbol("E"), "x") == jet("E", "x")


def test_leading_form_may_not_refer_to_itself():
    """u_t = u_t + 1 is rejected."""
    with pytest.raises(ValueError):
        ModelSystem.build(["t", "x"], ["u"], {"u_t": "u_t + 1"})


def test_linear_functionals_validate_their_fields():
    """Point functionals need a point, moments need species."""
    ux0 = LinearFunctional.point_eval("ux0", "u", ["x"], at={"x": 0})

    assert ux0.symbol == sp.Symbol("ux0")
    assert ux0.point_variables == ("x",)
    with pytest.raises(ValueError):
        LinearFunctional(kind="point", name="bad", target="u")
    with pytest.raises(ValueError):
        LinearFunctional.moment("n", "v", 1, species={})


def test_leibniz_rule_on_random_products(hopf_frame, rng):
    """D_i (a*b) = a*D_i b + b*D_i a for random jet polynomials."""
    for _ in range(30):
        a, b = _random_polynomial(rng), _random_polynomial(rng)
        for i in ("z", "x", "eps"):
            lhs = hopf_frame.total_derivative(a * b, i)
            rhs = a * hopf_frame.total_derivative(b, i) + b * hopf_frame.total_derivative(a, i)
            assert sp.expand(lhs - rhs) == 0, (a, b, i)


def test_total_derivatives_commute_on_random_polynomials(hopf_frame, rng):
    """D_x D_z e = D_z D_x e for random jet polynomials."""
    for _ in range(30):
        e = _random_polynomial(rng, terms=4)
        xz = hopf_frame.total_derivative(hopf_frame.total_derivative(e, "z"), "x")
        zx = hopf_frame.total_derivative(hopf_frame.total_derivative(e, "x"), "z")
        assert sp.expand(xz - zx) == 0, e


def test_frame_reduction_is_thread_safe(rng):
    """Concurrent reductions on a fresh system match the serial results."""
    burgers = ModelSystem.build(["t", "x"], ["w"], {"w_t": "-w*w_x"}, name="burgers")
    targets = [jet("w", *(["t"] * int(rng.integers(1, 3)) + ["x"] * int(rng.integers(0, 3)))) for _ in range(24)]
    with ThreadPoolExecutor(max_workers=8) as pool:
        parallel = list(pool.map(burgers.frame_reduce, targets))
    serial = ModelSystem.build(["t", "x"], ["w"], {"w_t": "-w*w_x"}, name="burgers")

    for target, reduced in zip(targets, parallel):
        assert simplify(reduced - serial.frame_reduce(target)) == 0, target
        assert jet("w", "t") not in reduced.free_symbols


def test_configured_frame_depth_reaches_new_systems(monkeypatch):
    """configure_frame_depth sets the bound of systems built afterwards."""
    monkeypatch.setattr(jet_algebra, "_frame_depth", jet_algebra.DEFAULT_FRAME_DEPTH)
    configure_frame_depth(0)
    sys = ModelSystem.build(["t", "x"], ["w"], {"w_t": "w_x"}, name="shift")

    assert sys.max_depth == 0
    with pytest.raises(FrameError):
        sys.frame_reduce(jet("w", "t"))
    with pytest.raises(ValueError):
        configure_frame_depth(-1)
