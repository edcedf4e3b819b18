"""
Hopf equation u_z + eps*u*u_x = 0 with boundary data u(0, x) = U(x).

Provides the model system (eps as a group variable or as a parameter), the admitted
generators X1..X4, the generators R1..R3 restricted on the perturbative solution, the
canonical Lie-Backlund generator, closed-form solutions and the on-axis functional
u_x(z, 0).
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import sympy as sp

from numerics.roots import bracket_scan, root_find
from scenarios.config import ScenarioError, SingularityError
from symbolic.expr_core import ExprSyntaxError, jet, lambdify, parse
from symbolic.jet_algebra import BoundaryCondition, LinearFunctional, ModelSystem
from symmetry.flows import BoundarySurface, InvariantSolution, invariant_solution
from symmetry.generators import Generator, GeneratorFamily
from symmetry.restriction import prolong_to_functional

logger = logging.getLogger(__name__)

Z, X, EPS, U = sp.symbols("z x eps u")


@dataclass(frozen=True)
class HopfScenario:
    """
    Attributes:
        eps: Nonlinearity parameter, >= 0
        profile: Boundary profile U(x) as an expression in x
        inverse: Optional closed form of H = U^-1 as an expression in u
        x_range: Domain on which U must be strictly monotone
        x_points: Grid size for monotonicity and slope scans
    """

    eps: float = 0.1
    profile: str = "-x"
    inverse: Optional[str] = None
    x_range: Tuple[float, float] = (-50.0, 50.0)
    x_points: int = 2001
    name: str = "hopf"

    def __post_init__(self):
        if not np.isfinite(self.eps) or self.eps < 0:
            raise ScenarioError(f"eps must be a finite number >= 0, got {self.eps}")
        if not self.x_range[0] < self.x_range[1]:
            raise ScenarioError(f"empty x range {self.x_range}")
        if self.x_points < 3:
            raise ScenarioError("x_points must be >= 3")
        stray = self.profile_expr.free_symbols - {X}
        if stray:
            raise ScenarioError(f"profile may only depend on x, found {sorted(s.name for s in stray)}")
        slopes = self.slope(self.grid)
        if not (np.all(slopes > 0) or np.all(slopes < 0)):
            raise ScenarioError(f"profile {self.profile!r} is not strictly monotone on {self.x_range}")

    @classmethod
    def from_section(cls, section) -> "HopfScenario":
        try:
            return cls(
                eps=float(section.get("eps", "0.1")),
                profile=section.get("profile", "-x"),
                inverse=section.get("inverse") or None,
                x_range=(float(section.get("x_min", "-50")), float(section.get("x_max", "50"))),
                x_points=int(section.get("x_points", "2001")),
                name=section.get("name", "hopf"),
            )
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"[hopf] {exc}") from None

    # -- profile -------------------------------------------------------------

    @cached_property
    def profile_expr(self) -> sp.Expr:
        try:
            return parse(self.profile)
        except ExprSyntaxError as exc:
            raise ScenarioError(f"profile {self.profile!r}: {exc}") from None

    @cached_property
    def slope_expr(self) -> sp.Expr:
        return sp.diff(self.profile_expr, X)

    @cached_property
    def grid(self) -> np.ndarray:
        return np.linspace(self.x_range[0], self.x_range[1], self.x_points)

    @cached_property
    def _profile_fn(self) -> Callable:
        return lambdify(self.profile_expr, [X])

    @cached_property
    def _slope_fn(self) -> Callable:
        return lambdify(self.slope_expr, [X])

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self._profile_fn(x), dtype=float), x.shape) * 1.0

    def slope(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self._slope_fn(x), dtype=float), x.shape) * 1.0

    @cached_property
    def u_bounds(self) -> Tuple[float, float]:
        ends = self.value(np.array(self.x_range))
        return float(ends.min()), float(ends.max())

    @cached_property
    def inverse_expr(self) -> Optional[sp.Expr]:
        """Closed form of H(u) = U^-1(u), or None when only the numeric inverse is available."""
        if self.inverse:
            try:
                return parse(self.inverse)
            except ExprSyntaxError as exc:
                raise ScenarioError(f"inverse {self.inverse!r}: {exc}") from None
        try:
            candidates = sp.solve(sp.Eq(self.profile_expr, U), X)
        except (NotImplementedError, ValueError):
            candidates = []
        lo, hi = self.u_bounds
        trial_points = np.linspace(lo, hi, 7)[1:-1]
        for branch in candidates:
            try:
                values = [complex(branch.subs(U, p).evalf()) for p in trial_points]
            except (TypeError, ValueError):
                continue
            if all(abs(v.imag) < 1e-12 and abs(float(self.value(v.real)) - p) < 1e-9 for v, p in zip(values, trial_points)):
                logger.debug("closed-form inverse of %s: %s", self.profile, branch)
                return branch
        logger.warning("no closed-form inverse for profile %s; using numeric inversion", self.profile)
        return None

    @cached_property
    def _inverse_fn(self) -> Optional[Callable]:
        return lambdify(self.inverse_expr, [U]) if self.inverse_expr is not None else None

    def inverse_value(self, u: float) -> float:
        """H(u), the foot of the characteristic carrying the value u."""
        if self._inverse_fn is not None:
            return self._inverse_fn(u)
        return root_find(lambda x: float(self.value(x)) - u, self.x_range).root

    # -- singularity ---------------------------------------------------------

    def singularity(self, x0: Optional[float] = None) -> float:
        """
        Smallest z > 0 where characteristics cross.

        With ``x0`` the crossing of the characteristic issued from x0 is returned
        (x0 = 0 gives the on-axis singularity); otherwise the earliest crossing over
        the scanned x range.
        """
        steepest = -float(self.slope(x0)) if x0 is not None else float(np.max(-self.slope(self.grid)))
        if self.eps == 0 or steepest <= 0:
            return float("inf")
        return 1.0 / (self.eps * steepest)


# ---------------------------------------------------------------------------
# Solutions
# ---------------------------------------------------------------------------


def hopf_exact(s: HopfScenario, z: float, x: float) -> float:
    """
    Exact solution from the implicit relation x - eps*z*u = H(u).

    Raises:
        SingularityError: z at or beyond the characteristic crossing, or several roots
        ValueError: no characteristic of the scanned range reaches (z, x)
    """
    if z < 0:
        raise ValueError(f"z must be >= 0, got {z}")
    if z >= s.singularity():
        raise SingularityError(f"z={z} is at or beyond the singularity z*={s.singularity():.12g}")
    if s.eps * z == 0:
        return float(s.value(x))

    def implicit(u):
        return s.inverse_value(u) + s.eps * z * u - x

    lo, hi = s.u_bounds
    points = 2001 if s.inverse_expr is not None else 201
    brackets = bracket_scan(implicit, lo, hi, points=points)
    if not brackets:
        raise ValueError(f"no characteristic from {s.x_range} reaches (z={z}, x={x})")
    if len(brackets) > 1:
        raise SingularityError(f"{len(brackets)} characteristics reach (z={z}, x={x})")
    return root_find(implicit, brackets[0]).root


def hopf_perturbative(s: HopfScenario, z, x):
    """First-order approximation u ~ U - eps*z*U*U_x."""
    return s.value(x) - s.eps * np.asarray(z, dtype=float) * s.value(x) * s.slope(x)


# ---------------------------------------------------------------------------
# Symbolic objects
# ---------------------------------------------------------------------------


def hopf_system(eps_group: bool = True) -> ModelSystem:
    """Hopf equation; eps is an independent (group) variable unless ``eps_group`` is False."""
    if eps_group:
        return ModelSystem.build(["z", "x", "eps"], ["u"], {"u_z": "-eps*u*u_x"}, name="hopf")
    return ModelSystem.build(["z", "x"], ["u"], {"u_z": "-eps*u*u_x"}, parameters=["eps"], name="hopf")


def hopf_boundary(s: HopfScenario) -> BoundaryCondition:
    return BoundaryCondition(variable="z", value=0, dependent="u", profile=s.profile_expr)


def hopf_generators() -> Dict[str, Generator]:
    """Point generators X1..X4 admitted by the Hopf equation with eps in the group."""
    return {
        "X1": Generator({"z": 1, "x": EPS * U}, label="X1"),
        "X2": Generator({"x": 1}, label="X2"),
        "X3": Generator({"x": X}, {"u": U}, label="X3"),
        "X4": Generator({"eps": EPS, "x": X}, label="X4"),
    }


def characteristic_variable() -> sp.Expr:
    return X - EPS * U * Z


def profile_slope_on_solution(s: HopfScenario, form: str = "chi") -> sp.Expr:
    """
    U_chi written on the solution.

    form="chi": U'(chi) with chi = x - eps*u*z. form="u": U'(H(u)), needs a closed-form inverse.
    """
    if form == "chi":
        return s.slope_expr.subs(X, characteristic_variable())
    if form == "u":
        if s.inverse_expr is None:
            raise ScenarioError(f"profile {s.profile!r} has no closed-form inverse for the u-form")
        return s.slope_expr.subs(X, s.inverse_expr)
    raise ValueError(f"unknown form {form!r}")


def hopf_instantiated_family(s: HopfScenario, form: str = "chi") -> GeneratorFamily:
    """
    The admitted family with the arbitrary functions fixed to the ones used for
    restriction: X1, X3, X4/eps, chi*d_x, (chi/eps)*d_x, (u/U_chi)*d_x.
    """
    g = hopf_generators()
    chi = characteristic_variable()
    u_chi = profile_slope_on_solution(s, form)
    basis = (
        g["X1"],
        g["X3"],
        (g["X4"] * (1 / EPS)).relabel("X4/eps"),
        Generator({"x": chi}, label="X2[chi]"),
        Generator({"x": chi / EPS}, label="X2[chi/eps]"),
        Generator({"x": U / u_chi}, label="X2[u/U_chi]"),
    )
    return GeneratorFamily(basis)


def hopf_rg_generators(s: HopfScenario, form: str = "chi") -> Dict[str, Generator]:
    """R1 = X1, R2 = u((eps*z + 1/U_chi) d_x + d_u), R3 = z*u*d_x + d_eps."""
    u_chi = profile_slope_on_solution(s, form)
    return {
        "R1": hopf_generators()["X1"].relabel("R1"),
        "R2": Generator({"x": U * (EPS * Z + 1 / u_chi)}, {"u": U}, label="R2"),
        "R3": Generator({"x": Z * U, "eps": 1}, label="R3"),
    }


def hopf_cangen(s: HopfScenario) -> Generator:
    """Canonical Lie-Backlund generator kappa*d_u with kappa = 1 - u_x/U_x(u) - eps*z*u_x."""
    form = "u" if s.inverse_expr is not None else "chi"
    u_x = jet("u", "x")
    kappa = 1 - u_x / profile_slope_on_solution(s, form) - EPS * Z * u_x
    return Generator(eta={"u": kappa}, label="Rcan")


def hopf_rg_transformation(point: Dict[str, float], a: float) -> Dict[str, float]:
    """Closed-form group action of R3: x' = x + a*z*u, eps' = eps + a."""
    out = dict(point)
    out["x"] = point["x"] + a * point["z"] * point["u"]
    out["eps"] = point["eps"] + a
    return out


# ---------------------------------------------------------------------------
# On-axis functional u_x(z, 0)
# ---------------------------------------------------------------------------

AXIS_SLOPE = LinearFunctional.point_eval("ux0", "u", ["x"], at={"x": 0})


def _require_odd_axis(s: HopfScenario) -> None:
    if abs(float(s.value(0.0))) > 1e-12:
        raise ScenarioError(f"the axis functional needs U(0) = 0, profile gives {float(s.value(0.0))}")


def hopf_axis_generator(s: HopfScenario) -> Generator:
    """R3 carried to the reduced space {z, eps, ux0}: d_eps - z*ux0^2 d_ux0."""
    _require_odd_axis(s)
    R3 = hopf_rg_generators(s)["R3"]
    return prolong_to_functional(R3, AXIS_SLOPE, hopf_system(), reductions={"u": 0}, label="R4")


def hopf_axis_invariants() -> List[sp.Expr]:
    ux0 = AXIS_SLOPE.symbol
    return [Z, EPS * Z - 1 / ux0]


def hopf_axis_solution(s: HopfScenario, steps: int = 24) -> InvariantSolution:
    """ux0(z, eps) rebuilt from the invariants of R4 and the data ux0 = U'(0) at eps = 0."""
    surface = BoundarySurface(fixed={"eps": 0.0}, profile={"ux0": float(s.slope(0.0))})
    return invariant_solution(hopf_axis_generator(s), hopf_axis_invariants(), surface, ["ux0"], steps=steps)


def hopf_axis_closed_form(s: HopfScenario, z: float) -> float:
    """u_x(z, 0) = 1 / (eps*z + 1/U'(0))."""
    _require_odd_axis(s)
    if z >= s.singularity(0.0):
        raise SingularityError(f"z={z} is at or beyond the axis singularity {s.singularity(0.0):.12g}")
    return 1.0 / (s.eps * z + 1.0 / float(s.slope(0.0)))

