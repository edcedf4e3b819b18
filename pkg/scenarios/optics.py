"""
Stationary self-focusing of a collimated laser beam.

Geometrical-optics equations for intensity I and eikonal derivative v,

    v_z = -v*v_x + alpha*I_x
    I_z = -v*I_x - I*v_x - nu*I*v/x

with I(0, x) = profile(x), v(0, x) = 0. nu = 1 is the cylindrical beam, nu = 0 the
plane (slit) beam. The beam axis functionals are I0(z) = I(z, 0) and W0(z) = v_x(z, 0).
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np
import sympy as sp

from scenarios.config import ScenarioError, SingularityError
from symbolic.expr_core import jet
from symbolic.jet_algebra import BoundaryCondition, LinearFunctional, ModelSystem
from symmetry.flows import BoundarySurface, InvariantSolution, invariant_solution
from symmetry.generators import Generator
from symmetry.restriction import prolong_to_functional

logger = logging.getLogger(__name__)

Z, X, ALPHA, NU = sp.symbols("z x alpha nu")
I, V = sp.symbols("I v")

PROFILES = {
    "parabolic": 1 - X**2,
    "soliton": sp.cosh(X) ** -2,
}

AXIS_INTENSITY = LinearFunctional.point_eval("I0", "I", [], at={"x": 0})
AXIS_EIKONAL = LinearFunctional.point_eval("W0", "v", ["x"], at={"x": 0})


@dataclass(frozen=True)
class OpticsScenario:
    """
    Attributes:
        alpha: Nonlinear refraction factor, >= 0 (0 is the linear limit)
        nu: 1 for a cylindrical beam, 0 for a plane beam
        profile: "parabolic" (1 - x^2) or "soliton" (cosh(x)^-2)
        z_fraction: Fraction of z_sing covered by figure tables and grid runs
    """

    alpha: float = 0.1
    nu: int = 1
    profile: str = "parabolic"
    z_fraction: float = 0.8
    name: str = "optics"

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise ScenarioError(f"alpha must be >= 0, got {self.alpha}")
        if self.nu not in (0, 1):
            raise ScenarioError(f"nu must be 0 or 1, got {self.nu}")
        if self.profile not in PROFILES:
            raise ScenarioError(f"unknown profile {self.profile!r}, expected one of {sorted(PROFILES)}")
        if not 0 < self.z_fraction < 1:
            raise ScenarioError(f"z_fraction must lie in (0, 1), got {self.z_fraction}")

    @classmethod
    def from_section(cls, section) -> "OpticsScenario":
        try:
            return cls(
                alpha=float(section.get("alpha", "0.1")),
                nu=int(section.get("nu", "1")),
                profile=section.get("profile", "parabolic").strip(),
                z_fraction=float(section.get("z_fraction", "0.8")),
                name=section.get("name", "optics"),
            )
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"[optics] {exc}") from None

    @property
    def profile_expr(self) -> sp.Expr:
        return PROFILES[self.profile]

    @cached_property
    def z_sing(self) -> float:
        """Axis singularity: 1/sqrt(2 alpha) for the parabolic beam, 1/(2 sqrt(alpha)) for the soliton."""
        if self.alpha == 0:
            return float("inf")
        if self.profile == "parabolic":
            return 1.0 / math.sqrt(2.0 * self.alpha)
        return 1.0 / (2.0 * math.sqrt(self.alpha))

    def intensity(self, x):
        x = np.asarray(x, dtype=float)
        if self.profile == "parabolic":
            return 1.0 - x**2
        return 1.0 / np.cosh(x) ** 2


def optics_system(nu: Optional[int] = None) -> ModelSystem:
    """The optics frame; nu stays a parameter unless a value is given."""
    source = {None: "-nu*I*v/x", 1: "-I*v/x", 0: ""}[nu]
    parameters = ["alpha", "nu"] if nu is None else ["alpha"]
    return ModelSystem.build(
        ["z", "x"],
        ["I", "v"],
        {"v_z": "-v*v_x + alpha*I_x", "I_z": f"-v*I_x - I*v_x {source}".strip()},
        parameters=parameters,
        name=f"optics(nu={nu if nu is not None else 'nu'})",
    )


def optics_boundary(s: OpticsScenario) -> Tuple[BoundaryCondition, BoundaryCondition]:
    return (
        BoundaryCondition(variable="z", value=0, dependent="I", profile=s.profile_expr),
        BoundaryCondition(variable="z", value=0, dependent="v", profile=0),
    )


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def parabolic_generator(alpha: Optional[float] = None) -> Generator:
    """R_par = (1-2a z^2) d_z - 2a z x d_x - 2a (x - v z) d_v + 4a I z d_I for the parabolic cylindrical beam."""
    a = ALPHA if alpha is None else sp.nsimplify(alpha, rational=True)
    return Generator(
        xi={"z": 1 - 2 * a * Z**2, "x": -2 * a * Z * X},
        eta={"v": -2 * a * (X - V * Z), "I": 4 * a * I * Z},
        label="R_par",
    )


def soliton_generator() -> Generator:
    """Lie-Backlund generator restricted on the plane beam with intensity cosh(x)^-2."""
    a = ALPHA
    I_x, I_xx = jet("I", "x"), jet("I", "x", "x")
    v_x, v_xx = jet("v", "x"), jet("v", "x", "x")

    gap = V**2 + 4 * a * (1 - I)
    norm = I * v_x**2 + a * I_x**2
    curvature = I_xx - I_x**2 / (2 * I)
    prefactor = I / norm**2

    kappa_v = (
        prefactor
        * (
            (sp.Rational(1, 2) * (I * v_x**2 - a * I_x**2) * gap + 4 * a * V * I * I_x * v_x) * v_xx
            + (2 * a * V * (a * I_x**2 - I * v_x**2) + a * v_x * I_x * gap) * curvature
        )
        - V * (1 - Z * v_x)
        - a * Z * I_x
    )
    kappa_I = (
        prefactor
        * (
            (sp.Rational(1, 2) * (I * v_x**2 - a * I_x**2) * gap + 4 * a * V * I * v_x * I_x) * curvature
            - (2 * V * (a * I_x**2 - I * v_x**2) + v_x * I_x * gap) * I * v_xx
            + norm * (4 * a * I_x**2 + (I_x * V - 2 * I * v_x) ** 2) / (4 * I)
        )
        - I * (2 - Z * v_x)
        + Z * V * I_x
    )
    return Generator(eta={"v": kappa_v, "I": kappa_I}, label="R_sol")


# ---------------------------------------------------------------------------
# Axis functionals
# ---------------------------------------------------------------------------


def axis_jets() -> Dict[str, sp.Symbol]:
    """Symbols of I0 and its z-derivatives up to third order."""
    I0 = AXIS_INTENSITY.symbol
    return {
        "I0": I0,
        "I0_z": jet(I0, "z"),
        "I0_zz": jet(I0, "z", "z"),
        "I0_zzz": jet(I0, "z", "z", "z"),
    }


def axis_reductions() -> Dict[sp.Symbol, sp.Expr]:
    """
    Values of the x-jets at x = 0 for a beam even in x, in terms of I0 and its z-derivatives.

    v and the odd x-derivatives of I vanish, as do the even x-derivatives of v. The rest
    follow from the frame with nu = 0 differentiated in x and evaluated on the axis.
    """
    j = axis_jets()
    I0, I0_z, I0_zz, I0_zzz = j["I0"], j["I0_z"], j["I0_zz"], j["I0_zzz"]
    ratio = I0_z / I0
    return {
        V: sp.Integer(0),
        jet("I", "x"): sp.Integer(0),
        jet("I", "x", "x", "x"): sp.Integer(0),
        jet("v", "x", "x"): sp.Integer(0),
        jet("v", "x"): -ratio,
        jet("I", "x", "x"): (2 * ratio**2 - I0_zz / I0) / ALPHA,
        jet("v", "x", "x", "x"): (I0_zzz / I0 + 10 * ratio**3 - 8 * I0_zz * I0_z / I0**2) / (ALPHA * I0),
    }


def optics_axis_generator(s: OpticsScenario) -> Generator:
    """
    Generator carried to the axis functionals.

    parabolic: R_par on {z, I0, W0}. soliton: R_sol with the coordinates of I0 and W0
    written through I0 and its z-derivatives.
    """
    functionals = [AXIS_INTENSITY, AXIS_EIKONAL]
    if s.profile == "parabolic":
        return prolong_to_functional(parabolic_generator(), functionals, optics_system(nu=s.nu), label="R4")
    return prolong_to_functional(
        soliton_generator(), functionals, optics_system(nu=0), reductions=axis_reductions(), label="R5"
    )


def soliton_kappa_intensity() -> sp.Expr:
    """Closed form of the I0 coordinate of the reduced soliton generator."""
    j = axis_jets()
    I0, I0_z, I0_zz = j["I0"], j["I0_z"], j["I0_zz"]
    return 4 - 5 * I0 - Z * I0_z + 2 * (I0 - 1) * I0 * I0_zz / I0_z**2


def axis_invariants() -> List[sp.Expr]:
    """J1 = (1 - 2 alpha z^2) I0 and J2 = W0 (1 - 2 alpha z^2) + 2 alpha z."""
    I0, W0 = AXIS_INTENSITY.symbol, AXIS_EIKONAL.symbol
    return [(1 - 2 * ALPHA * Z**2) * I0, W0 * (1 - 2 * ALPHA * Z**2) + 2 * ALPHA * Z]


def optics_axis_solution(s: OpticsScenario, steps: int = 24) -> InvariantSolution:
    """Parabolic axis values rebuilt from J1, J2 and I0(0) = 1, W0(0) = 0."""
    if s.profile != "parabolic":
        raise ScenarioError("invariant reconstruction is available for the parabolic beam only")
    surface = BoundarySurface(fixed={"z": 0.0}, profile={"I0": 1.0, "W0": 0.0})
    return invariant_solution(
        optics_axis_generator(s),
        axis_invariants(),
        surface,
        ["I0", "W0"],
        params={"alpha": s.alpha},
        steps=steps,
    )


def soliton_intensity(alpha: float, z: float) -> float:
    """Branch I0 in [1, 2) of z = sqrt(I0 - 1) / (sqrt(alpha) I0)."""
    disc = 1.0 - 4.0 * alpha * z * z
    if disc < 0:
        raise SingularityError(f"z={z} is beyond the soliton singularity {1 / (2 * math.sqrt(alpha)):.12g}")
    return 2.0 / (1.0 + math.sqrt(disc))


def optics_axis_closed_form(s: OpticsScenario, z: float) -> Tuple[float, float]:
    """
    (I0, W0) on the beam axis.

    Raises:
        SingularityError: z >= z_sing
        ScenarioError: no closed form for this profile/geometry pair
    """
    if z < 0:
        raise ValueError(f"z must be >= 0, got {z}")
    if z >= s.z_sing:
        raise SingularityError(f"z={z} is at or beyond z_sing={s.z_sing:.12g}")
    a = s.alpha
    if s.profile == "parabolic" and s.nu == 1:
        d = 1.0 - 2.0 * a * z * z
        return 1.0 / d, -2.0 * a * z / d
    if s.profile == "soliton" and s.nu == 0:
        i0 = soliton_intensity(a, z)
        return i0, -2.0 * a * z * i0 / (1.0 - 2.0 * a * z * z * i0)
    raise ScenarioError(f"no closed axis form for profile {s.profile!r} with nu={s.nu}")


def soliton_axis_jets(alpha: float, intensity: float) -> Dict[sp.Symbol, float]:
    """
    z, I0 and the z-derivatives of I0 on the closed-form soliton branch, parametrized
    by the intensity value; used to evaluate reduced coordinates on the exact solution.
    """
    if not 1.0 < intensity < 2.0:
        raise ValueError(f"intensity must lie in (1, 2), got {intensity}")
    i = sp.Symbol("i", positive=True)
    z_of_i = sp.sqrt(i - 1) / (sp.sqrt(sp.nsimplify(alpha, rational=True)) * i)
    d1, d2, d3 = (sp.diff(z_of_i, i, k).subs(i, sp.nsimplify(intensity, rational=True)) for k in (1, 2, 3))
    d1, d2, d3 = float(d1), float(d2), float(d3)
    j = axis_jets()
    return {
        Z: float(z_of_i.subs(i, sp.nsimplify(intensity, rational=True))),
        ALPHA: alpha,
        j["I0"]: intensity,
        j["I0_z"]: 1.0 / d1,
        j["I0_zz"]: -d2 / d1**3,
        j["I0_zzz"]: (3.0 * d2**2 - d1 * d3) / d1**5,
    }
