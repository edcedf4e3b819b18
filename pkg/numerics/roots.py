"""
Bracketing root finding and adaptive quadrature.

Thin wrappers around scipy.optimize.brentq and scipy.integrate.quad that turn
solver complaints into exceptions carrying the data needed to diagnose them.
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

logger = logging.getLogger(__name__)


class NoSignChangeError(ValueError):
    """The function has the same sign at both ends of the bracket."""

    def __init__(self, a: float, b: float, fa: float, fb: float):
        super().__init__(f"no sign change on [{a:.6g}, {b:.6g}] (f(a)={fa:.3g}, f(b)={fb:.3g})")
        self.bracket = (a, b)
        self.values = (fa, fb)


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


@dataclass(frozen=True)
class RootResult:
    root: float
    residual: float
    iterations: int


def root_find(
    f: Callable[[float], float],
    bracket: Tuple[float, float],
    xtol: float = 1e-14,
    rtol: float = 4 * np.finfo(float).eps,
    maxiter: int = 200,
) -> RootResult:
    """
    Root of ``f`` inside ``bracket`` by Brent's method.

    Raises:
        NoSignChangeError: f(a) and f(b) share a sign
    """
    a, b = float(bracket[0]), float(bracket[1])
    fa, fb = float(f(a)), float(f(b))
    if fa == 0.0:
        return RootResult(a, 0.0, 0)
    if fb == 0.0:
        return RootResult(b, 0.0, 0)
    if np.sign(fa) == np.sign(fb) or not (np.isfinite(fa) and np.isfinite(fb)):
        raise NoSignChangeError(a, b, fa, fb)
    root, info = brentq(f, a, b, xtol=xtol, rtol=rtol, maxiter=maxiter, full_output=True)
    return RootResult(float(root), abs(float(f(root))), int(info.iterations))


def bracket_scan(f: Callable[[float], float], a: float, b: float, points: int = 2001) -> List[Tuple[float, float]]:
    """All sub-intervals of a uniform grid on [a, b] where ``f`` changes sign."""
    xs = np.linspace(a, b, points)
    with np.errstate(all="ignore"):
        try:
            fs = np.asarray(f(xs), dtype=float)
        except (TypeError, ValueError):
            fs = None
        if fs is None or fs.shape != xs.shape:
            fs = np.array([float(f(x)) for x in xs])
    brackets: List[Tuple[float, float]] = []
    for k in range(points - 1):
        f0, f1 = fs[k], fs[k + 1]
        if not (np.isfinite(f0) and np.isfinite(f1)):
            continue
        if f0 == 0.0:
            brackets.append((xs[k], xs[k]))
        elif f0 * f1 < 0.0:
            brackets.append((xs[k], xs[k + 1]))
    if fs[-1] == 0.0:
        brackets.append((xs[-1], xs[-1]))
    return brackets


def expand_bracket(
    f: Callable[[float], float],
    guess: float,
    step: Optional[float] = None,
    factor: float = 2.0,
    max_expansions: int = 60,
) -> Tuple[float, float]:
    """
    Grow an interval around ``guess`` until ``f`` changes sign on one side.

    The side closest to ``guess`` wins, so continuation keeps to the nearest branch.
    """
    step = step if step is not None else 1e-3 * max(abs(guess), 1.0)
    f0 = float(f(guess))
    if f0 == 0.0:
        return guess, guess
    for n in range(max_expansions):
        lo, hi = guess - step, guess + step
        with np.errstate(all="ignore"):
            flo, fhi = float(f(lo)), float(f(hi))
        if np.isfinite(fhi) and fhi * f0 <= 0.0:
            logger.debug("bracket found after %d expansion(s): [%g, %g]", n, guess, hi)
            return guess, hi
        if np.isfinite(flo) and flo * f0 <= 0.0:
            logger.debug("bracket found after %d expansion(s): [%g, %g]", n, lo, guess)
            return lo, guess
        step *= factor
    raise NoSignChangeError(guess - step, guess + step, f0, f0)


def quadrature(
    f: Callable[[float], float],
    a: float,
    b: float,
    epsabs: float = 1e-10,
    epsrel: float = 1e-10,
    limit: int = 200,
    points: Optional[List[float]] = None,
) -> float:
    """
    Adaptive Gauss-Kronrod integral of ``f`` over [a, b].

    Raises:
        QuadratureError: subdivision limit reached or roundoff detected
    """
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, error = quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, points=points)
        except IntegrationWarning as exc:
            raise QuadratureError(f"quadrature on [{a:.6g}, {b:.6g}] did not converge: {exc}") from None
    logger.debug("quad on [%g, %g]: %.12g (error estimate %.2g)", a, b, value, error)
    return float(value)
