import pytest
import sympy as sp

from scenarios.hopf import hopf_generators
from scenarios.optics import parabolic_generator
from scenarios.plasma import E_FIELD, OMEGA, T, projective_generator
from symbolic.jet_algebra import ModelSystem
from symmetry.generators import Generator
from symmetry.invariance import (
    CoordinateSolveError,
    DeterminingSystemError,
    check_invariance,
    determining_system,
    solve_unknown_coordinate,
    verify_invariant,
)

pytestmark = pytest.mark.symbolic

Z, X, EPS, U = sp.symbols("z x eps u")


@pytest.mark.parametrize("label", ["X1", "X2", "X3", "X4"])
def test_hopf_generators_are_admitted(hopf_frame, label):
    """Each point generator of the Hopf equation leaves the frame invariant exactly."""
    result = check_invariance(hopf_frame, hopf_generators()[label])

    assert result.status == "symbolic", f"{label}: {result.residuals}"
    assert all(r == 0 for r in result.residuals)


def test_canonical_form_agrees_with_point_form(hopf_frame):
    """The evolutionary representative passes whenever the point form passes."""
    result = check_invariance(hopf_frame, hopf_generators()["X1"], form="canonical")

    assert result.passed


def test_non_symmetry_is_reported(hopf_frame):
    """u d_u alone is not admitted."""
    result = check_invariance(hopf_frame, Generator(eta={"u": U}, label="bad"))

    assert result.status == "nonzero"
    assert not result.passed


def test_parabolic_generator_on_cylindrical_beam(optics_frame):
    """R_par leaves the nu = 1 optics system invariant."""
    result = check_invariance(optics_frame, parabolic_generator())

    assert result.status == "symbolic", result.residuals


def test_projective_generator_on_vlasov(vlasov_frame):
    """R6 with eta^E = -3 Omega^2 t E is admitted."""
    assert check_invariance(vlasov_frame, projective_generator()).status == "symbolic"


def test_field_coordinate_is_derived(vlasov_frame):
    """Solving for the unknown E coordinate reproduces -3 Omega^2 t E."""
    bare = Generator(xi=projective_generator().xi, label="R6")
    eta = solve_unknown_coordinate(vlasov_frame, bare, "E", degree=2)

    assert sp.expand(eta + 3 * OMEGA**2 * T * E_FIELD) == 0


def test_coordinate_solve_rejects_unknown_variable(vlasov_frame):
    """Only variables of the system can be solved for."""
    with pytest.raises(CoordinateSolveError):
        solve_unknown_coordinate(vlasov_frame, projective_generator(), "w")


def test_hopf_determining_system_has_dimension_four(hopf_frame):
    """Degree-1 diagonal ansatz with the lift spans exactly X1..X4."""
    result = determining_system(hopf_frame, 1, ansatz="diagonal", constant=["z"], lift=True)

    assert result.dimension == 4
    for label, g in hopf_generators().items():
        coefficients = result.family.express(g)
        assert coefficients is not None, f"{label} is outside the computed span"
        assert all(c.is_Rational for c in coefficients)


def test_advection_translations_at_degree_zero():
    """Constant coordinates of u_t = -c u_x are the three translations."""
    sys = ModelSystem.build(["t", "x"], ["u"], {"u_t": "-c*u_x"}, parameters=["c"], name="advection")
    result = determining_system(sys, 0)

    assert result.dimension == 3
    for g in (Generator({"t": 1}), Generator({"x": 1}), Generator(eta={"u": 1})):
        assert result.family.express(g) is not None


def test_full_hopf_ansatz_is_larger(hopf_frame):
    """The full degree-1 ansatz admits more generators than the diagonal one."""
    result = determining_system(hopf_frame, 1)

    assert result.dimension == 6


def test_determining_system_rejects_nonlocal_systems():
    """Systems with nonlocal constraints are not purely differential."""
    from scenarios.plasma import vlasov_system

    with pytest.raises(DeterminingSystemError):
        determining_system(vlasov_system(nonlocal_constraints=True), 1)


def test_verify_invariant_of_translation():
    """x - eps*u*z is invariant under X1."""
    assert verify_invariant(hopf_generators()["X1"], X - EPS * U * Z) == 0
    assert verify_invariant(hopf_generators()["X2"], X) == 1
