import pytest
import sympy as sp

from scenarios.hopf import hopf_generators
from symbolic.expr_core import jet, simplify
from symmetry.generators import (
    Generator,
    GeneratorFamily,
    canonical,
    generator_from_section,
    generator_to_section,
    prolong,
)

Z, X, EPS, U = sp.symbols("z x eps u")


def test_generator_arithmetic():
    """Sums, scalar multiples and differences act coordinate-wise."""
    a = Generator({"x": 1}, label="a")
    b = Generator({"x": X}, {"u": U}, label="b")
    c = a + 2 * b

    assert simplify(c.coordinate("x") - (1 + 2 * X)) == 0
    assert c.coordinate("u") == 2 * U
    assert (c - c).is_zero()
    assert (-a).coordinate("x") == -1


def test_apply_is_a_derivation():
    """X(f*g) = f X(g) + g X(f) on functions of the group variables."""
    g = hopf_generators()["X1"]
    f, h = X**2 * U, sp.exp(Z) + EPS
    lhs = g.apply(f * h)
    rhs = f * g.apply(h) + h * g.apply(f)

    assert simplify(lhs - rhs) == 0


def test_canonical_coordinate(hopf_frame):
    """kappa = eta - xi^z u_z - xi^x u_x - xi^eps u_eps."""
    g = hopf_generators()["X1"]
    kappa = canonical(g, hopf_frame).kappa["u"]

    assert simplify(kappa - (-jet("u", "z") - EPS * U * jet("u", "x"))) == 0


@pytest.mark.parametrize("label", ["X1", "X2", "X3", "X4"])
def test_prolongation_methods_agree(hopf_frame, label):
    """The canonical formula and the recursion give the same second-order coordinates."""
    g = hopf_generators()[label]
    direct = prolong(g, 2, hopf_frame, method="direct")
    recursive = prolong(g, 2, hopf_frame, method="recursion")

    for sym in direct.zeta:
        assert simplify(direct.zeta[sym] - recursive.zeta[sym]) == 0, f"{label} disagrees on {sym}"


def test_prolongation_of_scaling(hopf_frame):
    """x d_x + u d_u leaves u_x unchanged and scales u_z."""
    g = hopf_generators()["X3"]
    pg = prolong(g, 1, hopf_frame)

    assert simplify(pg.coordinate(jet("u", "x"))) == 0
    assert simplify(pg.coordinate(jet("u", "z")) - jet("u", "z")) == 0


def test_prolong_rejects_bad_arguments(hopf_frame):
    """Order must be positive and coordinates must live on the system."""
    with pytest.raises(ValueError):
        prolong(hopf_generators()["X1"], 0, hopf_frame)
    with pytest.raises(ValueError):
        prolong(Generator({"t": 1}), 1, hopf_frame)


def test_family_express_and_rank():
    """Members are expressed with exact coefficients; outsiders give None."""
    g = hopf_generators()
    family = GeneratorFamily((g["X2"], g["X3"], g["X4"]))

    coefficients = family.express(Generator({"x": 2 + 3 * X}, {"u": 3 * U}))
    assert coefficients == [2, 3, 0]
    assert family.express(Generator({"z": 1})) is None
    assert family.rank() == 3


def test_section_round_trip():
    """Generators survive a trip through [generator.*] keys."""
    g = Generator({"z": 1, "x": EPS * U}, label="X1")
    section = generator_to_section(g)

    assert section == {"xi.z": "1", "xi.x": "eps*u"}
    back = generator_from_section("X1", section, scope=["z", "x", "eps"])
    assert back.equivalent(g)


def test_section_rejects_unknown_keys():
    """Keys other than xi.<var> / eta.<var> are an error."""
    with pytest.raises(ValueError):
        generator_from_section("bad", {"zeta.u": "1"})
