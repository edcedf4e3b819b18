import math

import pytest
import sympy as sp

from scenarios.config import ScenarioError, SingularityError
from scenarios.optics import (
    AXIS_EIKONAL,
    AXIS_INTENSITY,
    OpticsScenario,
    axis_invariants,
    optics_axis_closed_form,
    optics_axis_generator,
    optics_axis_solution,
    optics_system,
    soliton_axis_jets,
    soliton_intensity,
    soliton_kappa_intensity,
)
from symbolic.expr_core import evaluate, is_symbolic_zero
from symmetry.generators import Generator
from symmetry.invariance import verify_invariant

pytestmark = pytest.mark.symbolic

Z, ALPHA = sp.symbols("z alpha")


def test_singular_points(parabolic_beam, soliton_beam):
    """1/sqrt(2 alpha) for the parabolic beam, 1/(2 sqrt(alpha)) for the soliton."""
    assert parabolic_beam.z_sing == pytest.approx(1 / math.sqrt(0.2))
    assert soliton_beam.z_sing == pytest.approx(1 / (2 * math.sqrt(0.1)))
    assert OpticsScenario(alpha=0.0).z_sing == math.inf


def test_scenario_validation():
    """nu, profile and alpha are checked."""
    with pytest.raises(ScenarioError):
        OpticsScenario(nu=2)
    with pytest.raises(ScenarioError):
        OpticsScenario(profile="gaussian")
    with pytest.raises(ScenarioError):
        OpticsScenario(alpha=-1.0)


def test_parabolic_axis_generator(parabolic_beam):
    """R_par on the axis: (1 - 2 a z^2) d_z + 4 a z I0 d_I0 + (4 a z W0 - 2 a) d_W0."""
    g = optics_axis_generator(parabolic_beam)
    I0, W0 = AXIS_INTENSITY.symbol, AXIS_EIKONAL.symbol
    expected = Generator(
        {"z": 1 - 2 * ALPHA * Z**2},
        {"I0": 4 * ALPHA * Z * I0, "W0": 4 * ALPHA * Z * W0 - 2 * ALPHA},
    )

    assert g.equivalent(expected), str(g)


def test_axis_invariants(parabolic_beam):
    """J1 and J2 are annihilated by the reduced generator."""
    g = optics_axis_generator(parabolic_beam)
    for J in axis_invariants():
        assert is_symbolic_zero(verify_invariant(g, J))


def test_invariant_solution_matches_closed_form(parabolic_beam):
    """I0 = 1/(1 - 2 a z^2), W0 = -2 a z/(1 - 2 a z^2)."""
    solution = optics_axis_solution(parabolic_beam)
    for z in (0.3, 1.0, 1.7):
        values = solution({"z": z})
        i0, w0 = optics_axis_closed_form(parabolic_beam, z)
        assert values["I0"] == pytest.approx(i0, rel=1e-8)
        assert values["W0"] == pytest.approx(w0, rel=1e-8)


def test_invariant_solution_needs_parabolic_profile(soliton_beam):
    """The soliton beam has no point-generator reconstruction."""
    with pytest.raises(ScenarioError):
        optics_axis_solution(soliton_beam)


def test_soliton_kappa_intensity(soliton_beam):
    """The reduced Lie-Backlund generator has the closed I0 coordinate."""
    eta = optics_axis_generator(soliton_beam).eta["I0"]

    assert is_symbolic_zero(eta - soliton_kappa_intensity())


@pytest.mark.parametrize("intensity", [1.2, 1.5, 1.8])
def test_soliton_kappa_vanishes_on_solution(soliton_beam, intensity):
    """Both reduced coordinates vanish on the exact soliton branch."""
    g = optics_axis_generator(soliton_beam)
    values = soliton_axis_jets(soliton_beam.alpha, intensity)

    assert abs(evaluate(g.eta["I0"], values)) < 1e-8
    assert abs(evaluate(g.eta["W0"], values)) < 1e-8


def test_soliton_branch():
    """I0 runs from 1 at z = 0 to 2 at the singularity."""
    assert soliton_intensity(0.1, 0.0) == 1.0
    z_sing = 1 / (2 * math.sqrt(0.1))
    assert soliton_intensity(0.1, 0.999999 * z_sing) == pytest.approx(2.0, abs=5e-3)
    with pytest.raises(SingularityError):
        soliton_intensity(0.1, 1.01 * z_sing)


def test_closed_form_availability(parabolic_beam):
    """The parabolic plane beam and points past z_sing have no closed axis form."""
    with pytest.raises(ScenarioError):
        optics_axis_closed_form(OpticsScenario(alpha=0.1, nu=0, profile="parabolic"), 0.5)
    with pytest.raises(SingularityError):
        optics_axis_closed_form(parabolic_beam, parabolic_beam.z_sing)


def test_optics_frame_with_parameter_nu():
    """Leaving nu symbolic keeps it among the parameters."""
    sys = optics_system()

    assert {p.name for p in sys.parameters} == {"alpha", "nu"}
