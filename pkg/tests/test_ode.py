import math

import numpy as np
import pytest

from numerics.ode import IntegrationError, OdeProblem, energy_drift, ode_solve


def _oscillator(_t, y):
    return np.array([y[1], -y[0]])


def test_harmonic_oscillator_after_one_period():
    """DOP853 returns to the start after 2*pi."""
    trajectory = ode_solve(OdeProblem(rhs=_oscillator, y0=[1.0, 0.0], interval=(0.0, 2 * math.pi)))

    assert trajectory.y_end == pytest.approx([1.0, 0.0], abs=1e-8)
    assert trajectory.t_end == pytest.approx(2 * math.pi)


def test_dense_output_between_steps():
    """The interpolant reproduces cos(t) anywhere in the interval."""
    trajectory = ode_solve(OdeProblem(rhs=_oscillator, y0=[1.0, 0.0], interval=(0.0, 3.0)))

    for t in (0.123, 1.7, 2.95):
        assert trajectory(t)[0] == pytest.approx(math.cos(t), abs=1e-9)


def test_energy_is_conserved():
    """(y^2 + y'^2)/2 drifts only by the integration tolerance."""
    trajectory = ode_solve(
        OdeProblem(rhs=_oscillator, y0=[1.0, 0.0], interval=(0.0, 20.0)),
        t_eval=np.linspace(0.0, 20.0, 201),
    )
    drift = energy_drift(trajectory.y, lambda y: 0.5 * (y[0] ** 2 + y[1] ** 2))

    assert drift < 1e-8


def test_backward_integration():
    """y' = y integrated from 1 back to 0 gives exp(-1) * y(1)."""
    trajectory = ode_solve(OdeProblem(rhs=lambda _t, y: y, y0=[math.e], interval=(1.0, 0.0)))

    assert trajectory.y_end[0] == pytest.approx(1.0, rel=1e-9)


def test_terminal_event_stops_integration():
    """A terminal event ends the run early and is recorded."""

    def crossing(_t, y):
        return y[0]

    crossing.terminal = True
    crossing.direction = -1
    trajectory = ode_solve(
        OdeProblem(rhs=_oscillator, y0=[1.0, 0.0], interval=(0.0, 10.0), events=(crossing,))
    )

    assert trajectory.terminated
    assert trajectory.t_events[0][0] == pytest.approx(math.pi / 2, abs=1e-9)


def test_blowup_raises_integration_error():
    """y' = y^2 from y = 1 leaves every bound at t = 1."""
    with pytest.raises(IntegrationError) as info:
        ode_solve(OdeProblem(rhs=lambda _t, y: y * y, y0=[1.0], interval=(0.0, 2.0)))
    assert info.value.last_t < 1.0 + 1e-6


def test_problem_validation():
    """Tolerances must be positive and the interval non-degenerate."""
    with pytest.raises(ValueError):
        OdeProblem(rhs=_oscillator, y0=[1.0, 0.0], interval=(0.0, 1.0), rtol=0.0)
    with pytest.raises(ValueError):
        OdeProblem(rhs=_oscillator, y0=[1.0, 0.0], interval=(1.0, 1.0))
