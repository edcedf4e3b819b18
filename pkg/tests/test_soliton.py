import math

import numpy as np
import pytest

from numerics.soliton import sample_soliton_axis, soliton_axis_ode, soliton_series
from scenarios.optics import OpticsScenario, soliton_intensity


@pytest.fixture(scope="module")
def axis(soliton_beam):
    return soliton_axis_ode(soliton_beam)


def test_series_start():
    """I0 - 1 ~ alpha z^2 near the boundary."""
    y, p = soliton_series(0.1, 0.01)

    assert y == pytest.approx(1e-5, rel=1e-4)
    assert p == pytest.approx(2e-3, rel=1e-4)


def test_ode_matches_implicit_relation(axis, soliton_beam):
    """z = sqrt(I0 - 1) / (sqrt(alpha) I0) holds along the integration."""
    zs = np.linspace(0.0, 0.9 * soliton_beam.z_sing, 50)

    assert np.max(np.abs(axis.implicit_residual(zs))) < 1e-7


def test_ode_intensity_matches_closed_branch(axis, soliton_beam):
    """Sampled I0 equals 2 / (1 + sqrt(1 - 4 alpha z^2))."""
    for z in np.linspace(0.05, 0.85, 5) * soliton_beam.z_sing:
        assert float(axis.intensity(z)) == pytest.approx(soliton_intensity(soliton_beam.alpha, z), rel=1e-6)


def test_blowup_of_the_axis_eikonal(axis, soliton_beam):
    """W0 blows up at z = 1/(2 sqrt(alpha)) where I0 = 2."""
    assert axis.z_blowup == pytest.approx(soliton_beam.z_sing, rel=1e-3)
    assert axis.I_blowup == pytest.approx(2.0, abs=1e-3)
    assert axis.z_end < 1.01 * soliton_beam.z_sing


def test_eikonal_is_negative_and_growing(axis, soliton_beam):
    """The beam focuses: W0 < 0 and |W0| increases."""
    zs = np.linspace(0.1, 0.9, 9) * soliton_beam.z_sing
    w0 = axis.eikonal(zs)

    assert np.all(w0 < 0)
    assert np.all(np.diff(np.abs(w0)) > 0)


def test_eikonal_matches_its_closed_form(axis, soliton_beam):
    """W0 = -2 alpha z I0 / (1 - 2 alpha z^2 I0) along the closed intensity branch."""
    alpha = soliton_beam.alpha
    for z in np.linspace(0.05, 0.85, 9) * soliton_beam.z_sing:
        i0 = soliton_intensity(alpha, z)
        expected = -2.0 * alpha * z * i0 / (1.0 - 2.0 * alpha * z**2 * i0)
        assert float(axis.eikonal(z)) == pytest.approx(expected, rel=1e-5), z


def test_sampling_beyond_the_run_gives_nan(axis):
    """Points past the limit are marked, not extrapolated."""
    intensity, eikonal = sample_soliton_axis(axis, [0.1, 10.0])

    assert math.isfinite(intensity[0]) and math.isnan(intensity[1])
    assert math.isnan(eikonal[1])


def test_soliton_solver_needs_a_soliton():
    """Parabolic beams and alpha = 0 are refused."""
    with pytest.raises(ValueError):
        soliton_axis_ode(OpticsScenario(alpha=0.1, nu=0, profile="parabolic"))
    with pytest.raises(ValueError):
        soliton_axis_ode(OpticsScenario(alpha=0.0, nu=0, profile="soliton"))
