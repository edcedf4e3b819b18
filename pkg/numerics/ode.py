"""
Adaptive ODE integration with dense output.

ode_solve runs scipy's DOP853 embedded pair on an OdeProblem and returns a
Trajectory that can be sampled anywhere inside the integrated interval.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

logger = logging.getLogger(__name__)


class IntegrationError(RuntimeError):
    """The integrator stopped before the end of the interval."""

    def __init__(self, message: str, last_t: float, last_y: np.ndarray):
        super().__init__(f"{message} (last good point t={last_t:.12g})")
        self.last_t = last_t
        self.last_y = np.asarray(last_y)


@dataclass(frozen=True)
class OdeProblem:
    """
    y' = rhs(t, y) on ``interval`` starting from ``y0``.

    Attributes:
        rhs: Right-hand side callable (t, y) -> dy/dt
        y0: Initial state vector
        interval: (t0, t1); t1 < t0 integrates backwards
        rtol: Relative tolerance
        atol: Absolute tolerance
        events: Optional scipy event callables
    """

    rhs: Callable[[float, np.ndarray], np.ndarray]
    y0: Sequence[float]
    interval: Tuple[float, float]
    rtol: float = 1e-10
    atol: float = 1e-10
    events: Tuple[Callable, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError(f"tolerances must be positive, got rtol={self.rtol}, atol={self.atol}")
        if self.interval[0] == self.interval[1]:
            raise ValueError(f"degenerate interval {self.interval}")


@dataclass(frozen=True)
class Trajectory:
    """Accepted steps of an integration plus a dense interpolant."""

    t: np.ndarray
    y: np.ndarray
    dense: Callable[[float], np.ndarray]
    nfev: int
    t_events: Tuple[np.ndarray, ...] = ()
    y_events: Tuple[np.ndarray, ...] = ()
    terminated: bool = False

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def y_end(self) -> np.ndarray:
        return self.y[:, -1]

    def __call__(self, t):
        return self.dense(t)


def ode_solve(problem: OdeProblem, t_eval: Optional[Sequence[float]] = None) -> Trajectory:
    """
    Integrate ``problem`` with DOP853.

    Args:
        problem: The initial-value problem
        t_eval: Optional points at which the returned ``t``/``y`` are sampled

    Returns:
        Trajectory (terminated=True if a terminal event fired)

    Raises:
        IntegrationError: step-size underflow or a non-finite state
    """
    sol = solve_ivp(
        problem.rhs,
        problem.interval,
        np.asarray(problem.y0, dtype=float),
        method="DOP853",
        rtol=problem.rtol,
        atol=problem.atol,
        dense_output=True,
        t_eval=t_eval,
        events=list(problem.events) or None,
    )
    if sol.status < 0 or not np.all(np.isfinite(sol.y)):
        last_t = float(sol.t[-1]) if sol.t.size else float(problem.interval[0])
        last_y = sol.y[:, -1] if sol.y.size else np.asarray(problem.y0)
        raise IntegrationError(f"integration failed: {sol.message}", last_t, last_y)
    logger.debug("DOP853: %d steps, %d rhs evaluations", sol.t.size, sol.nfev)
    return Trajectory(
        t=sol.t,
        y=sol.y,
        dense=sol.sol,
        nfev=int(sol.nfev),
        t_events=tuple(sol.t_events or ()),
        y_events=tuple(sol.y_events or ()),
        terminated=sol.status == 1,
    )


def energy_drift(states: np.ndarray, energy: Callable[[np.ndarray], float]) -> float:
    """Largest relative deviation of ``energy`` from its initial value along ``states``."""
    values: List[float] = [energy(states[:, k]) for k in range(states.shape[1])]
    e0 = values[0]
    return float(max(abs(v - e0) for v in values) / max(abs(e0), 1e-300))
