"""
Method of characteristics for u_z + eps*u*u_x = 0.

Characteristics are straight lines x = x0 + eps*z*U(x0) carrying u = U(x0). The
functions here take any object exposing ``eps``, ``x_range``, ``x_points`` and a
vectorized ``value(x)``; scenarios.hopf.HopfScenario is the usual one.
"""

import logging
import math
from typing import Iterable, Optional

import numpy as np

from numerics.roots import NoSignChangeError, bracket_scan, expand_bracket, root_find

logger = logging.getLogger(__name__)


class CharacteristicCrossingError(RuntimeError):
    """More than one characteristic reaches the requested point."""

    def __init__(self, z: float, x: float, feet: Iterable[float]):
        feet = list(feet)
        super().__init__(f"{len(feet)} characteristics reach (z={z:.6g}, x={x:.6g}) from feet near {feet}")
        self.feet = feet


def foot_point(s, z: float, x: float, xtol: float = 1e-14) -> float:
    """
    Foot x0 of the characteristic through (z, x).

    Raises:
        NoSignChangeError: no characteristic from ``s.x_range`` reaches the point
        CharacteristicCrossingError: several do
    """
    if z == 0 or s.eps == 0:
        return float(x)

    def mismatch(x0):
        return x0 + s.eps * z * s.value(x0) - x

    lo, hi = s.x_range
    brackets = bracket_scan(mismatch, lo, hi, points=s.x_points)
    if not brackets:
        raise NoSignChangeError(lo, hi, float(mismatch(lo)), float(mismatch(hi)))
    if len(brackets) > 1:
        raise CharacteristicCrossingError(z, x, [0.5 * (a + b) for a, b in brackets])
    return root_find(lambda x0: float(mismatch(x0)), brackets[0], xtol=xtol).root


def hopf_characteristics(s, z: float, xs, xtol: float = 1e-14) -> np.ndarray:
    """u(z, x) at every sample of ``xs`` by root finding for the foot point."""
    if z < 0:
        raise ValueError(f"z must be >= 0, got {z}")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    feet = np.array([foot_point(s, z, x, xtol=xtol) for x in xs])
    return s.value(feet)


def hopf_axis_slope(s, z: float, h: float = 1e-4) -> float:
    """u_x(z, 0) by a centered difference of the characteristic solution."""
    left, right = hopf_characteristics(s, z, [-h, h])
    return float((right - left) / (2.0 * h))


def hopf_singularity(s, x0: Optional[float] = None, h: float = 1e-4) -> float:
    """
    First z where the foot map x0 -> x0 + eps*z*U(x0) stops being increasing.

    With ``x0`` the map is differentiated there by a centered difference; otherwise the
    smallest forward difference over the scan grid decides. Returns inf if the map never
    folds.
    """
    if s.eps == 0:
        return math.inf
    if x0 is not None:
        slope = float((s.value(x0 + h) - s.value(x0 - h)) / (2.0 * h))
    else:
        grid = np.linspace(s.x_range[0], s.x_range[1], s.x_points)
        slope = float(np.min(np.diff(s.value(grid)) / np.diff(grid)))
    if slope >= 0:
        return math.inf

    def fold(z: float) -> float:
        return 1.0 + s.eps * z * slope

    guess = 1.0 / s.eps
    bracket = expand_bracket(fold, guess, step=0.5 * guess)
    z_star = root_find(fold, bracket).root
    logger.debug("characteristics fold at z=%.12g (slope %.6g)", z_star, slope)
    return z_star
