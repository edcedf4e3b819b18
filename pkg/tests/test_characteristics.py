import numpy as np
import pytest

from numerics.characteristics import (
    CharacteristicCrossingError,
    foot_point,
    hopf_axis_slope,
    hopf_characteristics,
    hopf_singularity,
)
from scenarios.hopf import HopfScenario, hopf_axis_closed_form, hopf_exact


def test_linear_profile_has_closed_form(hopf_linear):
    """For U = -x the solution is u = -x / (1 - eps*z)."""
    xs = np.linspace(-3.0, 3.0, 13)
    for z in (0.0, 2.0, 6.0, 9.0):
        expected = -xs / (1.0 - hopf_linear.eps * z)
        assert hopf_characteristics(hopf_linear, z, xs) == pytest.approx(expected, abs=1e-10), z


def test_characteristics_agree_with_implicit_solution(hopf_sinh):
    """Root finding for the foot point and for u give the same value."""
    for z, x in ((0.5, 0.5), (1.5, -0.4), (2.4, 0.1)):
        assert hopf_characteristics(hopf_sinh, z, [x])[0] == pytest.approx(hopf_exact(hopf_sinh, z, x), abs=1e-10)


def test_root_tolerance_is_passed_to_the_foot_point_search(hopf_sinh):
    """A loose xtol still lands within that tolerance of the implicit solution."""
    loose = hopf_characteristics(hopf_sinh, 1.5, [-0.4], xtol=1e-4)[0]

    assert loose == pytest.approx(hopf_exact(hopf_sinh, 1.5, -0.4), abs=1e-3)


def test_foot_point_at_the_boundary(hopf_sinh):
    """At z = 0 each point is its own foot."""
    assert foot_point(hopf_sinh, 0.0, 0.7) == 0.7


def test_axis_slope_matches_closed_form(hopf_sinh):
    """u_x(z, 0) = 1 / (eps*z + 1/U'(0))."""
    for z in (1.0, 2.0, 2.5):
        assert hopf_axis_slope(hopf_sinh, z) == pytest.approx(hopf_axis_closed_form(hopf_sinh, z), rel=1e-6)


def test_singularity_of_linear_profile(hopf_linear):
    """Characteristics of U = -x meet at z = 1/eps."""
    assert hopf_singularity(hopf_linear) == pytest.approx(10.0, rel=1e-12)
    assert hopf_singularity(hopf_linear, x0=0.0) == pytest.approx(hopf_linear.singularity(0.0), rel=1e-6)


def test_global_and_axis_singularities_differ(hopf_sinh):
    """For U = -sinh(x) the steepest slope is at the edge of the range, not on the axis."""
    assert hopf_singularity(hopf_sinh) < hopf_singularity(hopf_sinh, x0=0.0)
    assert hopf_singularity(hopf_sinh, x0=0.0) == pytest.approx(10.0, rel=1e-6)


def test_increasing_profile_never_folds():
    """U = x spreads the characteristics apart."""
    s = HopfScenario(eps=0.1, profile="x", x_range=(-5.0, 5.0), x_points=101)

    assert hopf_singularity(s) == float("inf")


def test_crossing_characteristics_are_reported(hopf_sinh):
    """Beyond the fold several feet reach the same point."""
    z = 4.0
    with pytest.raises(CharacteristicCrossingError):
        foot_point(hopf_sinh, z, 0.6)


def test_negative_z_is_rejected(hopf_linear):
    """Only the downstream half plane is solved."""
    with pytest.raises(ValueError):
        hopf_characteristics(hopf_linear, -1.0, [0.0])
