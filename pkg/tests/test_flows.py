import pytest
import sympy as sp

from scenarios.hopf import (
    AXIS_SLOPE,
    hopf_axis_closed_form,
    hopf_axis_generator,
    hopf_axis_solution,
    hopf_exact,
    hopf_generators,
    hopf_rg_generators,
    hopf_rg_transformation,
)
from scenarios.plasma import projective_generator
from symbolic.expr_core import evaluate, jet
from symmetry.flows import (
    BoundarySurface,
    FlowError,
    InvariantSolutionError,
    flow,
    invariant_solution,
)
from symmetry.generators import Generator

Z, EPS = sp.symbols("z eps")

POINT = {"z": 2.0, "x": 0.3, "eps": 0.1, "u": -0.7}


def test_flow_matches_closed_form_of_r3(hopf_linear):
    """exp(a R3) shifts eps by a and x by a*z*u."""
    R3 = hopf_rg_generators(hopf_linear)["R3"]
    image = flow(R3, POINT, 0.4)
    expected = hopf_rg_transformation(POINT, 0.4)

    for key in POINT:
        assert image[key] == pytest.approx(expected[key], abs=1e-9), key


@pytest.mark.parametrize("label", ["X1", "X3", "X4"])
def test_flow_group_law(label):
    """flow(p, a + b) = flow(flow(p, a), b)."""
    g = hopf_generators()[label]
    direct = flow(g, POINT, 0.5)
    composed = flow(g, flow(g, POINT, 0.2), 0.3)

    for key in POINT:
        assert direct[key] == pytest.approx(composed[key], abs=1e-8), f"{label}: {key}"


@pytest.mark.parametrize("label", ["X1", "X3", "X4"])
def test_flow_group_law_on_random_triples(label, rng):
    """The group law holds for 50 random (point, a, b) triples."""
    g = hopf_generators()[label]
    for _ in range(50):
        z, x, u = rng.uniform(-1.0, 1.0, size=3)
        point = {"z": z, "x": x, "eps": rng.uniform(0.05, 0.5), "u": u}
        a, b = rng.uniform(-0.5, 0.5, size=2)
        direct = flow(g, point, a + b)
        composed = flow(g, flow(g, point, a), b)
        for key in point:
            assert direct[key] == pytest.approx(composed[key], abs=1e-8), (label, point, a, b, key)


def _tangent_error(g, point, a):
    image = flow(g, point, a, rtol=1e-13, atol=1e-14)
    return max(abs((image[k] - point[k]) / a - evaluate(g.coordinate(k), point)) for k in point)


@pytest.mark.parametrize(
    "g, point",
    [
        (hopf_generators()["X3"], POINT),
        (hopf_generators()["X4"], POINT),
        (projective_generator(1.0), {"t": 0.4, "x": 0.6, "v": 0.2, "E": 0.3}),
    ],
    ids=["X3", "X4", "R6"],
)
def test_flow_is_tangent_to_its_generator(g, point):
    """(flow(p, a) - p)/a - xi(p) shrinks linearly: a tenfold smaller a gives a tenfold smaller gap."""
    coarse = _tangent_error(g, point, 1e-4)
    fine = _tangent_error(g, point, 1e-5)

    assert coarse / fine == pytest.approx(10.0, rel=0.05)


def test_functional_coordinate_is_the_derivative_along_the_flow(hopf_sinh, rng):
    """d/da of the axis slope of the transformed solution equals the prolonged coordinate."""
    eta = hopf_axis_generator(hopf_sinh).coordinate("ux0")
    R3 = hopf_rg_generators(hopf_sinh)["R3"]
    delta, a = 1e-3, 1e-3
    for _ in range(5):
        z = rng.uniform(0.2, 0.5) * hopf_sinh.singularity()
        pair = [{"z": z, "x": x, "eps": hopf_sinh.eps, "u": hopf_exact(hopf_sinh, z, x)} for x in (-delta, delta)]

        def slope(parameter):
            low, high = (flow(R3, p, parameter, rtol=1e-13, atol=1e-14) for p in pair)
            return (high["u"] - low["u"]) / (high["x"] - low["x"])

        expected = evaluate(eta, {"z": z, "eps": hopf_sinh.eps, "ux0": slope(0.0)})
        assert (slope(a) - slope(-a)) / (2 * a) == pytest.approx(expected, rel=1e-4), z


def test_flow_at_zero_is_identity():
    """a = 0 returns the point unchanged."""
    assert flow(hopf_generators()["X1"], POINT, 0.0) == POINT


def test_flow_rejects_incomplete_points():
    """Every group variable needs a value."""
    with pytest.raises(ValueError):
        flow(hopf_generators()["X1"], {"z": 0.0, "x": 0.0}, 1.0)


def test_flow_rejects_derivative_coordinates():
    """Lie-Backlund generators have no finite point action."""
    g = Generator(eta={"u": jet("u", "x")}, label="contact")
    with pytest.raises(ValueError):
        flow(g, {"u": 1.0, jet("u", "x").name: 1.0}, 0.1)


def test_flow_reports_blowup():
    """du/da = u^2 from u = 1 leaves every bounded domain at a = 1."""
    g = Generator(eta={"u": sp.Symbol("u") ** 2}, label="blowup")
    with pytest.raises(FlowError):
        flow(g, {"u": 1.0}, 2.0)


@pytest.mark.parametrize("z", [0.0, 2.5, 5.0, 9.0])
def test_axis_solution_matches_closed_form(hopf_linear, z):
    """The invariant solution of R4 reproduces 1 / (eps*z + 1/U'(0))."""
    sol = hopf_axis_solution(hopf_linear)
    value = sol({"z": z, "eps": hopf_linear.eps})["ux0"]

    assert value == pytest.approx(hopf_axis_closed_form(hopf_linear, z), rel=1e-8)


def test_axis_transport_composes(hopf_linear):
    """Transport eps0 -> eps2 equals eps0 -> eps1 -> eps2 and stays on the solution."""
    sol = hopf_axis_solution(hopf_linear)
    z = 4.0
    start = {"z": z, "eps": 0.02, "ux0": 1.0 / (0.02 * z - 1.0)}

    direct = sol.transport(start, {"z": z, "eps": 0.2})["ux0"]
    middle = sol.transport(start, {"z": z, "eps": 0.1})["ux0"]
    composed = sol.transport({"z": z, "eps": 0.1, "ux0": middle}, {"z": z, "eps": 0.2})["ux0"]

    assert direct == pytest.approx(composed, abs=1e-9)
    assert direct == pytest.approx(1.0 / (0.2 * z - 1.0), rel=1e-9)


def test_transport_needs_the_unknowns(hopf_linear):
    """The start point must carry the values being transported."""
    with pytest.raises(ValueError):
        hopf_axis_solution(hopf_linear).transport({"z": 1.0, "eps": 0.1}, {"z": 1.0, "eps": 0.2})


def test_axis_solution_fails_past_the_singularity(hopf_linear):
    """Continuation across eps*z = 1 has no bracket on the boundary branch."""
    sol = hopf_axis_solution(hopf_linear)
    with pytest.raises(InvariantSolutionError):
        sol({"z": 12.0, "eps": hopf_linear.eps})


def test_invariants_are_checked(hopf_linear):
    """Expressions that the generator does not annihilate are refused."""
    surface = BoundarySurface(fixed={"eps": 0.0}, profile={"ux0": -1.0})
    with pytest.raises(InvariantSolutionError):
        invariant_solution(hopf_axis_generator(hopf_linear), [EPS - AXIS_SLOPE.symbol], surface, ["ux0"])


def test_unknowns_must_be_determined(hopf_linear):
    """Invariants that never involve an unknown leave it undetermined."""
    surface = BoundarySurface(fixed={"eps": 0.0}, profile={"ux0": -1.0})
    with pytest.raises(InvariantSolutionError):
        invariant_solution(hopf_axis_generator(hopf_linear), [Z], surface, ["ux0"])


def test_boundary_surface_allows_one_free_coordinate():
    """Two free coordinates are not supported."""
    with pytest.raises(ValueError):
        BoundarySurface(fixed={"z": 0.0}, profile={"u": 1.0}, free=("x", "y"))
