"""
Axis intensity of the plane soliton beam from the reduced second-order equation.

With y = I0 - 1 and p = dy/dz the axis relation reads

    y'' = p^2 (1 + 5 y + z p) / (2 y (1 + y)),

singular at z = 0 where y = p = 0. Integration starts slightly downstream from the
series I0 = 1 + alpha z^2 + 2 alpha^2 z^4 and runs until W0 = -I0_z / I0 blows up.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from numerics.ode import IntegrationError, OdeProblem, Trajectory, ode_solve

logger = logging.getLogger(__name__)

START_FRACTION = 1e-3
WATCH_LEVEL = 30.0
STOP_LEVEL = 1e3


def soliton_series(alpha: float, z: float) -> Tuple[float, float]:
    """(y, y_z) from I0 = 1 + alpha z^2 + 2 alpha^2 z^4."""
    return alpha * z * z + 2 * alpha**2 * z**4, 2 * alpha * z + 8 * alpha**2 * z**3


def _rhs(z: float, state: np.ndarray) -> np.ndarray:
    y, p = state
    return np.array([p, p * p * (1.0 + 5.0 * y + z * p) / (2.0 * y * (1.0 + y))])


@dataclass(frozen=True)
class SolitonAxis:
    """
    Result of soliton_axis_ode.

    Attributes:
        alpha: Refraction factor of the run
        trajectory: Dense trajectory of (y, y_z)
        z_blowup: Extrapolated blow-up coordinate of W0
        I_blowup: Extrapolated axis intensity at the blow-up
    """

    alpha: float
    trajectory: Trajectory
    z_blowup: float
    I_blowup: float

    @property
    def z_start(self) -> float:
        return float(self.trajectory.t[0])

    @property
    def z_end(self) -> float:
        return self.trajectory.t_end

    def _state(self, z) -> Tuple[np.ndarray, np.ndarray]:
        z = np.asarray(z, dtype=float)
        if np.any(z < 0) or np.any(z > self.z_end):
            raise ValueError(f"z must lie in [0, {self.z_end:.12g}]")
        near = z < self.z_start
        state = self.trajectory(np.where(near, self.z_start, z))
        y, p = state[0], state[1]
        series_y, series_p = soliton_series(self.alpha, z)
        return np.where(near, series_y, y), np.where(near, series_p, p)

    def intensity(self, z):
        y, _ = self._state(z)
        return 1.0 + y

    def eikonal(self, z):
        """W0 = -I0_z / I0."""
        y, p = self._state(z)
        return -p / (1.0 + y)

    def implicit_residual(self, z) -> np.ndarray:
        """z - sqrt(I0 - 1) / (sqrt(alpha) I0)."""
        i0 = self.intensity(z)
        return np.asarray(z) - np.sqrt(i0 - 1.0) / (math.sqrt(self.alpha) * i0)


def _level_event(level: float, terminal: bool):
    def event(_z, state):
        y, p = state
        return abs(p / (1.0 + y)) - level

    event.terminal = terminal
    event.direction = 1
    return event


def soliton_axis_ode(s, rtol: float = 1e-10, atol: float = 1e-14, fit_degree: int = 3) -> SolitonAxis:
    """
    Integrate the reduced axis equation of the soliton beam up to the blow-up of W0.

    The blow-up is located by fitting z and I0 as polynomials in 1/|W0| over the tail
    between the watch and stop levels and extrapolating to 1/|W0| = 0.

    Args:
        s: Scenario exposing alpha, profile and z_sing

    Raises:
        ValueError: the scenario is not a soliton beam with alpha > 0
        IntegrationError: the integration stopped before W0 blew up
    """
    if getattr(s, "profile", "soliton") != "soliton":
        raise ValueError(f"soliton_axis_ode needs the soliton profile, got {s.profile!r}")
    alpha = float(s.alpha)
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    z_sing = 1.0 / (2.0 * math.sqrt(alpha))
    z0 = START_FRACTION * z_sing
    root = math.sqrt(alpha)
    problem = OdeProblem(
        rhs=_rhs,
        y0=soliton_series(alpha, z0),
        interval=(z0, 2.0 * z_sing),
        rtol=rtol,
        atol=atol,
        events=(_level_event(WATCH_LEVEL * root, False), _level_event(STOP_LEVEL * root, True)),
    )
    trajectory = ode_solve(problem)
    if not trajectory.terminated or trajectory.t_events[0].size == 0:
        raise IntegrationError("W0 did not blow up inside the integration interval", trajectory.t_end, trajectory.y_end)

    z_watch = float(trajectory.t_events[0][0])
    zs = np.linspace(z_watch, trajectory.t_end, 400)
    y, p = trajectory(zs)
    inverse = (1.0 + y) / np.abs(p)
    z_fit = np.polyfit(inverse, zs, fit_degree)
    i_fit = np.polyfit(inverse, 1.0 + y, fit_degree)
    z_blowup = float(np.polyval(z_fit, 0.0))
    i_blowup = float(np.polyval(i_fit, 0.0))
    logger.debug(
        "soliton axis: %d steps, W0 blow-up at z=%.10g (I0=%.10g), expected %.10g",
        trajectory.t.size,
        z_blowup,
        i_blowup,
        z_sing,
    )
    return SolitonAxis(alpha=alpha, trajectory=trajectory, z_blowup=z_blowup, I_blowup=i_blowup)


def sample_soliton_axis(axis: SolitonAxis, z, limit: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """(I0, W0) at ``z``; points beyond ``limit`` (default the last integrated point) are nan."""
    z = np.asarray(z, dtype=float)
    limit = axis.z_end if limit is None else min(limit, axis.z_end)
    inside = z <= limit
    clipped = np.where(inside, z, 0.0)
    return np.where(inside, axis.intensity(clipped), np.nan), np.where(inside, axis.eikonal(clipped), np.nan)
