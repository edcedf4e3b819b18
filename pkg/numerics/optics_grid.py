"""
Method-of-lines solver for the beam equations on the half line x >= 0.

    v_z = -(v**2 / 2)_x + alpha*I_x
    I_z = -(v*I)_x - nu*I*v/x

The half domain [0, L] uses parity ghost nodes (v odd, I even). The two fluxes are
differenced with the second-order one-sided stencil on the upwind side of v, alpha*I_x
with second-order central differences, and one-sided stencils are used at x = L. The
source I*v/x becomes I*v_x on the axis. Steps are classical RK4 under a CFL limit.

For alpha > 0 the system is elliptic in (z, x): a mode of wavenumber k grows like
exp(k * integral(sqrt(alpha*I) dz)), so refining the grid alone feeds round-off into ever
faster modes. After every step the state is projected onto a fixed, grid-independent set
of smooth modes (see SpectralFilter). Solutions inside that set pass unchanged, which
keeps the second-order convergence of the stencils.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

GHOSTS = 2
MAX_CFL = 0.9
BASES = ("polynomial", "trigonometric", "none")


class CflError(RuntimeError):
    """A fixed step violates the CFL limit."""


class SchemeBreakdownError(RuntimeError):
    """The intensity turned negative or the state stopped being finite."""

    def __init__(self, message: str, z: float):
        super().__init__(f"{message} at z={z:.6g}")
        self.z = z


@dataclass(frozen=True)
class Grid1D:
    """
    Uniform half-line grid with a CFL-limited step controller.

    Attributes:
        x_max: Right end L of [0, L]
        nodes: Node count including x = 0
        cfl: Target CFL number of the controller
        dz_max: Upper bound on the step
        dz: Fixed step; None lets the controller choose
    """

    x_max: float
    nodes: int
    cfl: float = 0.8
    dz_max: float = 5e-3
    dz: Optional[float] = None

    def __post_init__(self):
        if self.x_max <= 0 or self.nodes < 5:
            raise ValueError(f"grid needs x_max > 0 and at least 5 nodes, got {self.x_max}, {self.nodes}")
        if not 0 < self.cfl <= MAX_CFL:
            raise ValueError(f"cfl must lie in (0, {MAX_CFL}], got {self.cfl}")

    @property
    def dx(self) -> float:
        return self.x_max / (self.nodes - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.x_max, self.nodes)

    def coarsened(self) -> "Grid1D":
        """Every other node; requires an odd node count."""
        if self.nodes % 2 == 0:
            raise ValueError(f"cannot coarsen a grid with {self.nodes} nodes")
        return Grid1D(self.x_max, (self.nodes - 1) // 2 + 1, self.cfl, self.dz_max, self.dz)

    def step(self, speed: float) -> float:
        """Step for the current characteristic speed bound."""
        if self.dz is not None:
            number = self.dz * speed / self.dx
            if number > MAX_CFL:
                raise CflError(f"dz={self.dz} gives CFL number {number:.3f} > {MAX_CFL}")
            return self.dz
        if speed <= 0:
            return self.dz_max
        return min(self.cfl * self.dx / speed, self.dz_max)


@dataclass(frozen=True)
class SpectralFilter:
    """
    Projection of I onto even and of v onto odd smooth modes, applied after each step.

    Attributes:
        basis: "polynomial" keeps Chebyshev polynomials T_j(x/L) up to degree ``size``;
            "trigonometric" keeps cos(k x) and sin(k x) with k = j*pi/L <= ``size``;
            "none" disables the projection
        size: Highest degree, or the cutoff wavenumber
    """

    basis: str = "trigonometric"
    size: float = 40.0

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"unknown filter basis {self.basis!r}, expected one of {BASES}")
        if self.size <= 0:
            raise ValueError(f"filter size must be > 0, got {self.size}")

    @classmethod
    def for_profile(cls, profile: str) -> "SpectralFilter":
        if profile == "parabolic":
            return cls("polynomial", 8)
        return cls("trigonometric", 40.0)

    def projectors(self, grid: Grid1D) -> Optional[Tuple[np.ndarray, ...]]:
        """(even basis, its weighted left inverse, odd basis, its left inverse), or None when inactive."""
        if self.basis == "none":
            return None
        return _projectors(self.basis, float(self.size), grid.x_max, grid.nodes)


@lru_cache(maxsize=16)
def _projectors(basis: str, size: float, x_max: float, nodes: int) -> Optional[Tuple[np.ndarray, ...]]:
    x = np.linspace(0.0, x_max, nodes)
    if basis == "polynomial":
        columns = np.polynomial.chebyshev.chebvander(x / x_max, int(size))
        even, odd = columns[:, 0::2], columns[:, 1::2]
        if even.shape[1] >= nodes:
            return None
    else:
        top = int(math.floor(size * x_max / math.pi))
        # cos modes beyond nodes-1 alias on the grid
        if top >= nodes - 2:
            return None
        k = np.arange(top + 1) * math.pi / x_max
        even, odd = np.cos(np.outer(x, k)), np.sin(np.outer(x, k[1:]))
    # trapezoid weights make the cosine modes exactly orthogonal on the grid
    root = np.sqrt(np.r_[0.5, np.ones(nodes - 2), 0.5])
    even_inv = np.linalg.pinv(even * root[:, None]) * root
    odd_inv = np.linalg.pinv(odd * root[:, None]) * root
    return even, even_inv, odd, odd_inv


@dataclass(frozen=True)
class AxisHistory:
    """
    Axis values along z.

    Attributes:
        z: Output coordinates
        I0: I(z, 0)
        W0: v_x(z, 0)
        dx: Grid spacing of the run
        error_estimate: |I0 - I0 on the coarsened grid|, or None when not requested
    """

    z: np.ndarray
    I0: np.ndarray
    W0: np.ndarray
    dx: float
    error_estimate: Optional[np.ndarray] = None


def _with_ghosts(f: np.ndarray, parity: float) -> np.ndarray:
    return np.concatenate([parity * f[GHOSTS:0:-1], f])


def _central(f: np.ndarray, dx: float, parity: float) -> np.ndarray:
    g = _with_ghosts(f, parity)
    n = f.size
    d = np.empty(n)
    j = np.arange(GHOSTS, GHOSTS + n - 1)
    d[: n - 1] = (g[j + 1] - g[j - 1]) / (2 * dx)
    d[n - 1] = (3 * f[n - 1] - 4 * f[n - 2] + f[n - 3]) / (2 * dx)
    return d


def _upwind(flux: np.ndarray, speed: np.ndarray, dx: float, parity: float) -> np.ndarray:
    """flux_x from the second-order one-sided stencil on the upwind side of ``speed``."""
    g = _with_ghosts(flux, parity)
    n = flux.size
    j = np.arange(GHOSTS, GHOSTS + n)
    backward = (3 * g[j] - 4 * g[j - 1] + g[j - 2]) / (2 * dx)
    forward = backward.copy()
    k = j[: n - 2]
    forward[: n - 2] = (-3 * g[k] + 4 * g[k + 1] - g[k + 2]) / (2 * dx)
    return np.where(speed > 0, backward, forward)


def _rhs(alpha: float, nu: int, dx: float, x: np.ndarray) -> Callable[[np.ndarray, np.ndarray], tuple]:
    interior = x > 0

    def rhs(v: np.ndarray, intensity: np.ndarray):
        dv = -_upwind(0.5 * v * v, v, dx, 1.0) + alpha * _central(intensity, dx, 1.0)
        di = -_upwind(v * intensity, v, dx, -1.0)
        if nu:
            ratio = np.where(interior, v / np.where(interior, x, 1.0), _central(v, dx, -1.0))
            di = di - nu * intensity * ratio
        return dv, di

    return rhs


def _axis_slope(v: np.ndarray, dx: float) -> float:
    return float((-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * dx))


def _march(
    s, grid: Grid1D, z_out: np.ndarray, velocity: Optional[Callable], spectral_filter: SpectralFilter
) -> AxisHistory:
    x = grid.x
    dx = grid.dx
    intensity = np.asarray(s.intensity(x), dtype=float)
    v = np.zeros_like(x) if velocity is None else np.asarray(velocity(x), dtype=float)
    rhs = _rhs(s.alpha, s.nu, dx, x)
    projectors = spectral_filter.projectors(grid)

    I0: List[float] = []
    W0: List[float] = []
    z, steps = 0.0, 0
    for target in z_out:
        while z < target - 1e-15:
            speed = float(np.max(np.abs(v)) + math.sqrt(max(s.alpha * np.max(intensity), 0.0)))
            dz = min(grid.step(speed), target - z)
            k1 = rhs(v, intensity)
            k2 = rhs(v + 0.5 * dz * k1[0], intensity + 0.5 * dz * k1[1])
            k3 = rhs(v + 0.5 * dz * k2[0], intensity + 0.5 * dz * k2[1])
            k4 = rhs(v + dz * k3[0], intensity + dz * k3[1])
            v = v + dz / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            intensity = intensity + dz / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            if projectors is not None:
                even, even_inv, odd, odd_inv = projectors
                intensity = even @ (even_inv @ intensity)
                v = odd @ (odd_inv @ v)
            z += dz
            steps += 1
            if not (np.all(np.isfinite(v)) and np.all(np.isfinite(intensity))):
                raise SchemeBreakdownError("non-finite state", z)
            if np.min(intensity) < -1e-6 * np.max(intensity):
                raise SchemeBreakdownError(f"negative intensity {np.min(intensity):.3g}", z)
        I0.append(float(intensity[0]))
        W0.append(_axis_slope(v, dx))
    logger.debug(
        "optics grid: %d nodes, dx=%.4g, %s filter, %d RK4 steps to z=%.6g",
        grid.nodes, dx, "no" if projectors is None else spectral_filter.basis, steps, z,
    )
    return AxisHistory(z=np.asarray(z_out, dtype=float), I0=np.array(I0), W0=np.array(W0), dx=dx)


def default_grid(s) -> Tuple[float, int]:
    """(x_max, nodes) used when a run does not name them."""
    if getattr(s, "profile", "") == "parabolic":
        # I(0.9*z_sing, x) stays positive for x < 0.43
        return 0.4, 4001
    return 9.6, 1921


def optics_grid_solve(
    s,
    z_max: float,
    nodes: Optional[int] = None,
    x_max: Optional[float] = None,
    samples: int = 50,
    z_eval: Optional[Sequence[float]] = None,
    estimate_error: bool = True,
    velocity: Optional[Callable] = None,
    dz: Optional[float] = None,
    spectral_filter: Optional[SpectralFilter] = None,
) -> AxisHistory:
    """
    Axis history of the beam equations up to ``z_max``.

    Args:
        s: Scenario exposing alpha, nu, profile, z_sing and a vectorized intensity(x)
        z_max: End of the run, at most 0.9 * z_sing
        nodes: Grid nodes on [0, x_max]; default 4001 for the parabolic beam, 1921 otherwise
        x_max: Right end; default 0.4 for the parabolic beam, 9.6 otherwise
        samples: Number of equally spaced output points when ``z_eval`` is not given
        z_eval: Explicit output coordinates (sorted, within [0, z_max])
        estimate_error: Repeat the run on the coarsened grid and report the difference
        velocity: Initial v(0, x), odd in x; default 0
        dz: Fixed step; None selects the CFL controller
        spectral_filter: Mode projection after each step; default SpectralFilter.for_profile

    Raises:
        CflError: the fixed step violates the CFL limit
        SchemeBreakdownError: negative intensity or a non-finite state
    """
    if z_max <= 0:
        raise ValueError(f"z_max must be > 0, got {z_max}")
    if z_max > 0.9 * s.z_sing:
        raise ValueError(f"z_max={z_max:.6g} exceeds 0.9*z_sing={0.9 * s.z_sing:.6g}")
    default_x, default_nodes = default_grid(s)
    grid = Grid1D(
        x_max=default_x if x_max is None else x_max, nodes=default_nodes if nodes is None else nodes, dz=dz
    )
    if spectral_filter is None:
        spectral_filter = SpectralFilter.for_profile(getattr(s, "profile", ""))
    z_out = np.linspace(0.0, z_max, samples + 1) if z_eval is None else np.asarray(z_eval, dtype=float)
    if np.any(np.diff(z_out) < 0) or z_out[0] < 0 or z_out[-1] > z_max:
        raise ValueError("z_eval must be sorted and lie in [0, z_max]")

    history = _march(s, grid, z_out, velocity, spectral_filter)
    if not estimate_error:
        return history
    coarse = _march(s, grid.coarsened(), z_out, velocity, spectral_filter)
    return AxisHistory(
        z=history.z,
        I0=history.I0,
        W0=history.W0,
        dx=history.dx,
        error_estimate=np.abs(history.I0 - coarse.I0),
    )


@dataclass(frozen=True)
class ConvergenceStudy:
    """Axis-intensity errors against a reference at one z on successively refined grids."""

    nodes: List[int]
    dx: List[float]
    errors: List[float]

    @property
    def orders(self) -> List[float]:
        return [
            math.log(e0 / e1) / math.log(h0 / h1)
            for e0, e1, h0, h1 in zip(self.errors, self.errors[1:], self.dx, self.dx[1:])
        ]


def default_study_nodes(s) -> Tuple[int, ...]:
    if getattr(s, "profile", "") == "parabolic":
        return (11, 21, 41)
    return (481, 961, 1921)


def grid_convergence(
    s,
    z: float,
    reference: float,
    nodes: Optional[Sequence[int]] = None,
    x_max: Optional[float] = None,
) -> ConvergenceStudy:
    """Relative error of I(z, 0) against ``reference`` on each grid."""
    nodes = tuple(nodes or default_study_nodes(s))
    dxs, errors = [], []
    for n in nodes:
        history = optics_grid_solve(s, z, nodes=n, x_max=x_max, z_eval=[z], estimate_error=False)
        dxs.append(history.dx)
        errors.append(abs(history.I0[-1] - reference) / abs(reference))
        logger.debug("grid %d: relative axis error %.3g", n, errors[-1])
    return ConvergenceStudy(nodes=list(nodes), dx=dxs, errors=errors)
