"""
Quasi-neutral expansion of a collisionless plasma slab.

Units: cold-electron temperature T_c = 1, proton mass m_p = 1, elementary charge e = 1,
gradient length L_0 = 1. Omega is then measured in sqrt(T_c/m_p)/L_0.

Each component (ion species, cold and hot electrons) starts from a Maxwellian in the
invariant I = J4/2 + (e/m)*Phi0(J3) of the projective generator, with
J3 = x/sqrt(1 + Omega^2 t^2) and J4 = v^2 + Omega^2 (x - v t)^2. Quasi-neutrality fixes
Phi0 through the implicit function E(chi) solved by solve_potential.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Mapping, Optional, Tuple

import numpy as np
import sympy as sp
from scipy.special import logsumexp

from numerics.roots import expand_bracket, quadrature, root_find
from scenarios.config import ScenarioError
from symbolic.jet_algebra import LinearFunctional, ModelSystem
from symmetry.generators import Generator
from symmetry.invariance import solve_unknown_coordinate
from symmetry.restriction import prolong_to_functional

logger = logging.getLogger(__name__)

T, X, V, OMEGA = sp.symbols("t x v Omega")
E_FIELD = sp.Symbol("E")

ELECTRON_MASS = 1.0 / 1836.0
VELOCITY_WIDTHS = 12.0


@dataclass(frozen=True)
class Species:
    """An ion species: charge number, mass (proton masses), initial density, T_q/T_c."""

    name: str
    Z: float
    mass: float
    n0: float
    T_ratio: float

    def __post_init__(self):
        for key in ("Z", "mass", "n0", "T_ratio"):
            value = getattr(self, key)
            if not math.isfinite(value) or value <= 0:
                raise ScenarioError(f"species {self.name!r}: {key} must be > 0, got {value}")


@dataclass(frozen=True)
class Component:
    """A Maxwellian plasma component in dimensionless units."""

    name: str
    charge: float
    mass: float
    n0: float
    temperature: float


DEFAULT_SPECIES = (
    Species("carbon", Z=6.0, mass=12.0, n0=1.0, T_ratio=0.1),
    Species("proton", Z=1.0, mass=1.0, n0=0.6, T_ratio=0.1),
)


@dataclass(frozen=True)
class PlasmaScenario:
    """
    Attributes:
        species: Ion species, heaviest first
        omega: Inverse gradient time scale Omega
        th_over_tc: Hot to cold electron temperature ratio
        nh0_fraction: n_h0 / (Z_1 n_10)
        me_over_mp: Electron to proton mass ratio
        chi2_max: Upper end of the chi^2 axis of the density table
        chi2_points: Rows of the density table
    """

    species: Tuple[Species, ...] = DEFAULT_SPECIES
    omega: float = 1.0
    th_over_tc: float = 1000.0
    nh0_fraction: float = 5e-4
    me_over_mp: float = ELECTRON_MASS
    chi2_max: float = 3.0
    chi2_points: int = 301
    name: str = "plasma"
    components: Dict[str, Component] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not self.species:
            raise ScenarioError("at least one ion species is required")
        names = [sp_.name for sp_ in self.species]
        if len(set(names)) != len(names) or {"cold", "hot"} & set(names):
            raise ScenarioError(f"species names must be unique and differ from cold/hot: {names}")
        if not self.omega > 0:
            raise ScenarioError(f"Omega must be > 0, got {self.omega}")
        if not self.th_over_tc > 0:
            raise ScenarioError(f"Th_over_Tc must be > 0, got {self.th_over_tc}")
        if not 0 < self.me_over_mp < 1:
            raise ScenarioError(f"me_over_mp must lie in (0, 1), got {self.me_over_mp}")
        if self.nh0_fraction < 0:
            raise ScenarioError(f"nh0_fraction must be >= 0, got {self.nh0_fraction}")
        if self.n_c0 <= 0:
            raise ScenarioError(f"hot electrons exceed the ion charge (n_c0 = {self.n_c0:.6g})")
        if self.chi2_max <= 0 or self.chi2_points < 2:
            raise ScenarioError("chi2_max must be > 0 and chi2_points >= 2")

        components = {
            s.name: Component(s.name, charge=s.Z, mass=s.mass, n0=s.n0, temperature=s.T_ratio) for s in self.species
        }
        components["cold"] = Component("cold", charge=-1.0, mass=self.me_over_mp, n0=self.n_c0, temperature=1.0)
        components["hot"] = Component("hot", charge=-1.0, mass=self.me_over_mp, n0=self.n_h0, temperature=self.th_over_tc)
        object.__setattr__(self, "components", components)

    @classmethod
    def from_sections(cls, section, species_sections: Mapping[str, Mapping[str, str]]) -> "PlasmaScenario":
        try:
            species = tuple(
                Species(
                    name,
                    Z=float(sec["Z"]),
                    mass=float(sec["mass"]),
                    n0=float(sec["n0"]),
                    T_ratio=float(sec["T_ratio"]),
                )
                for name, sec in species_sections.items()
            )
            return cls(
                species=species or DEFAULT_SPECIES,
                omega=float(section.get("Omega", "1")),
                th_over_tc=float(section.get("Th_over_Tc", "1000")),
                nh0_fraction=float(section.get("nh0_fraction", "5e-4")),
                me_over_mp=float(section.get("me_over_mp", str(ELECTRON_MASS))),
                chi2_max=float(section.get("chi2_max", "3")),
                chi2_points=int(section.get("chi2_points", "301")),
                name=section.get("name", "plasma"),
            )
        except KeyError as exc:
            raise ScenarioError(f"species section misses key {exc}") from None
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(f"[plasma] {exc}") from None

    @property
    def ion_charge(self) -> float:
        """Total initial ion charge density sum_q Z_q n_q0."""
        return sum(s.Z * s.n0 for s in self.species)

    @property
    def n_h0(self) -> float:
        first = self.species[0]
        return self.nh0_fraction * first.Z * first.n0

    @property
    def n_c0(self) -> float:
        return self.ion_charge - self.n_h0

    def component(self, name: str) -> Component:
        try:
            return self.components[name]
        except KeyError:
            raise ScenarioError(f"unknown component {name!r}, expected one of {sorted(self.components)}") from None

    def stretch(self, t: float) -> float:
        """sqrt(1 + Omega^2 t^2)."""
        return math.sqrt(1.0 + (self.omega * t) ** 2)

    def harmonic(self, s: Species) -> float:
        """a_q = m_q Omega^2 (1 + Z_q m_e/m_q) / (2 T_q)."""
        return s.mass * self.omega**2 * (1.0 + s.Z * self.me_over_mp / s.mass) / (2.0 * s.T_ratio)


# ---------------------------------------------------------------------------
# Potential
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PotentialSolution:
    """
    Solution of the quasi-neutrality relation at one value of chi.

    Attributes:
        chi: Similarity variable J3
        script_e: Root of the implicit relation
        phi0: Potential Phi0(chi)
        dphi0: dPhi0/dchi
        densities: Component name -> n(chi)/n0 at t = 0 (the universal density N)
        residual: Quasi-neutrality residual sum_a e_a n_a
    """

    chi: float
    script_e: float
    phi0: float
    dphi0: float
    densities: Dict[str, float]
    residual: float

    @property
    def cold_fraction(self) -> float:
        """Share of the electron density carried by the cold component."""
        cold, hot = self.densities["cold_abs"], self.densities["hot_abs"]
        return cold / (cold + hot)


def _balance(s: PlasmaScenario, e: float, chi: float) -> Tuple[float, float, float]:
    """log(ion charge) - log(electron charge) and its derivatives in E and chi."""
    ions = np.array(
        [math.log(q.Z * q.n0) + (1.0 + q.Z / q.T_ratio) * e - s.harmonic(q) * chi**2 for q in s.species]
    )
    slopes_e = np.array([1.0 + q.Z / q.T_ratio for q in s.species])
    slopes_chi = np.array([-2.0 * s.harmonic(q) * chi for q in s.species])
    d = 1.0 - 1.0 / s.th_over_tc
    with np.errstate(divide="ignore"):
        electrons = np.array([math.log(s.n_c0), np.log(s.n_h0) + d * e])
    lse_ions = logsumexp(ions)
    lse_electrons = logsumexp(electrons)
    w_ions = np.exp(ions - lse_ions)
    w_hot = float(np.exp(electrons[1] - lse_electrons))
    value = float(lse_ions - lse_electrons)
    d_e = float(w_ions @ slopes_e - w_hot * d)
    d_chi = float(w_ions @ slopes_chi)
    return value, d_e, d_chi


@lru_cache(maxsize=4096)
def _solve_cached(s: PlasmaScenario, chi: float, xtol: float) -> PotentialSolution:
    def relation(e: float) -> float:
        return _balance(s, e, chi)[0]

    bracket = expand_bracket(relation, 0.0, step=0.5)
    result = root_find(relation, bracket, xtol=xtol)
    e = result.root
    _, d_e, d_chi = _balance(s, e, chi)
    de_dchi = -d_chi / d_e
    m_e = s.me_over_mp
    phi0 = -e + 0.5 * m_e * s.omega**2 * chi**2
    dphi0 = -de_dchi + m_e * s.omega**2 * chi

    densities = {c.name: _universal_density(s, c, chi, phi0) for c in s.components.values()}
    residual = sum(c.charge * c.n0 * densities[c.name] for c in s.components.values())
    densities["cold_abs"] = s.n_c0 * densities["cold"]
    densities["hot_abs"] = s.n_h0 * densities["hot"]
    logger.debug("chi=%.6g: E=%.12g (%d iterations, residual %.3g)", chi, e, result.iterations, residual)
    return PotentialSolution(chi=chi, script_e=e, phi0=phi0, dphi0=dphi0, densities=densities, residual=residual)


def solve_potential(s: PlasmaScenario, chi: float, xtol: float = 1e-14) -> PotentialSolution:
    """
    Solve the quasi-neutrality relation for E(chi) and derive Phi0 and the densities.

    Raises:
        NoSignChangeError: the implicit relation has no bracketed root
    """
    if not math.isfinite(chi):
        raise ValueError(f"chi must be finite, got {chi}")
    return _solve_cached(s, abs(float(chi)), xtol)


def _universal_density(s: PlasmaScenario, c: Component, chi: float, phi0: float) -> float:
    return math.exp(-c.mass * s.omega**2 * chi**2 / (2.0 * c.temperature) - c.charge * phi0 / c.temperature)


def ion_density_closed_form(s: PlasmaScenario, name: str, chi: float) -> float:
    """N_q = exp(E*Z_q/T_q - a_q chi^2) from the root E of the implicit relation."""
    q = next((sp_ for sp_ in s.species if sp_.name == name), None)
    if q is None:
        raise ScenarioError(f"{name!r} is not an ion species")
    e = solve_potential(s, chi).script_e
    return math.exp(e * q.Z / q.T_ratio - s.harmonic(q) * chi**2)


# ---------------------------------------------------------------------------
# Distribution, density, field, spectrum
# ---------------------------------------------------------------------------


def plasma_potential(s: PlasmaScenario, t: float, x: float) -> float:
    """Phi(t, x) = Phi0(J3) / (1 + Omega^2 t^2)."""
    st = s.stretch(t)
    return solve_potential(s, x / st).phi0 / st**2


def plasma_field(s: PlasmaScenario, t: float, x: float) -> float:
    """E = -Phi_x = -Phi0'(J3) / (1 + Omega^2 t^2)^(3/2)."""
    st = s.stretch(t)
    phi = solve_potential(s, x / st)
    sign = 1.0 if x >= 0 else -1.0
    return -sign * phi.dphi0 / st**3


def plasma_distribution(s: PlasmaScenario, name: str, t: float, x: float, v):
    """f = n0 sqrt(m/(2 pi T)) exp(-m I/T), I = J4/2 + (e/m) Phi0(J3)."""
    c = s.component(name)
    st = s.stretch(t)
    phi0 = solve_potential(s, x / st).phi0
    v = np.asarray(v, dtype=float)
    j4 = v**2 + s.omega**2 * (x - v * t) ** 2
    invariant = 0.5 * j4 + c.charge / c.mass * phi0
    return c.n0 * np.sqrt(c.mass / (2.0 * math.pi * c.temperature)) * np.exp(-c.mass * invariant / c.temperature)


def _velocity_window(s: PlasmaScenario, c: Component, t: float, x: float) -> Tuple[float, float, float]:
    st2 = 1.0 + (s.omega * t) ** 2
    mean = s.omega**2 * t * x / st2
    width = math.sqrt(c.temperature / (c.mass * st2))
    return mean, width, VELOCITY_WIDTHS * width


def velocity_moment(s: PlasmaScenario, name: str, t: float, x: float, power: int, epsabs: float = 1e-13) -> float:
    """integral of v^power f dv, truncated at 12 thermal widths."""
    c = s.component(name)
    mean, _, half = _velocity_window(s, c, t, x)
    return quadrature(
        lambda v: float(v**power * plasma_distribution(s, name, t, x, v)),
        mean - half,
        mean + half,
        epsabs=epsabs * max(c.n0, 1e-300),
        epsrel=1e-12,
    )


def plasma_density(s: PlasmaScenario, name: str, t: float, x: float, method: str = "closed") -> float:
    """
    n(t, x) of a component.

    method="closed": n0 N(chi) / sqrt(1 + Omega^2 t^2); method="quadrature": integral of f over v.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if method == "closed":
        st = s.stretch(t)
        c = s.component(name)
        return c.n0 * solve_potential(s, x / st).densities[name] / st
    if method == "quadrature":
        return velocity_moment(s, name, t, x, 0)
    raise ValueError(f"unknown method {method!r}")


def field_from_moments(s: PlasmaScenario, t: float, x: float, h: float = 1e-4) -> float:
    """
    E = d/dx (sum e int v^2 f dv) / sum (e^2/m) int f dv.

    The x-derivative uses a fourth-order central difference of step ``h``.
    """

    def pressure(xx: float) -> float:
        return sum(c.charge * velocity_moment(s, c.name, t, xx, 2) for c in s.components.values() if c.n0 > 0)

    derivative = (
        -pressure(x + 2 * h) + 8 * pressure(x + h) - 8 * pressure(x - h) + pressure(x - 2 * h)
    ) / (12.0 * h)
    weight = sum(
        c.charge**2 / c.mass * velocity_moment(s, c.name, t, x, 0) for c in s.components.values() if c.n0 > 0
    )
    return derivative / weight


def quasineutrality_residuals(s: PlasmaScenario, t: float, x: float) -> Tuple[float, float]:
    """(sum e int f dv, sum e int v f dv) by quadrature."""
    active = [c for c in s.components.values() if c.n0 > 0]
    charge = sum(c.charge * velocity_moment(s, c.name, t, x, 0) for c in active)
    current = sum(c.charge * velocity_moment(s, c.name, t, x, 1) for c in active)
    return charge, current


def plasma_spectrum(s: PlasmaScenario, name: str, t: float, energy: float, epsabs: float = 1e-10) -> float:
    """dN/d(energy) = (1/(m v)) integral (f(t,x,v) + f(t,x,-v)) dx with v = sqrt(2 energy/m)."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if energy <= 0:
        raise ValueError(f"energy must be > 0, got {energy}")
    c = s.component(name)
    v = math.sqrt(2.0 * energy / c.mass)
    ion = next((q for q in s.species if q.name == name), None)
    spread = math.sqrt(1.0 + ion.Z / ion.T_ratio) if ion is not None else 1.0
    half = VELOCITY_WIDTHS * spread * math.sqrt(c.temperature / c.mass) / s.omega
    centre = v * t
    lo, hi = -centre - half, centre + half

    def integrand(x: float) -> float:
        return float(plasma_distribution(s, name, t, x, v) + plasma_distribution(s, name, t, x, -v))

    breaks = sorted({-centre, centre}) if centre > 0 else None
    total = quadrature(integrand, lo, hi, epsabs=epsabs * c.n0, epsrel=1e-9, points=breaks)
    return total / (c.mass * v)


def plasma_spectrum_asymptote(s: PlasmaScenario, name: str, energy: float) -> float:
    """Large-Omega*t limit sqrt(2/(m energy)) (n0/Omega) N(chi = sqrt(2 energy/m)/Omega)."""
    c = s.component(name)
    chi = math.sqrt(2.0 * energy / c.mass) / s.omega
    return math.sqrt(2.0 / (c.mass * energy)) * c.n0 / s.omega * solve_potential(s, chi).densities[name]


def spectrum_energies(s: PlasmaScenario, name: str, omega_t: float, points: int = 9, floor: float = 1e-3) -> np.ndarray:
    """
    Energies on which the spectrum has reached its large-time form at Omega*t = ``omega_t``.

    The range starts at 2 energy/T = 10 / (Omega t)^2 and ends where the universal density
    N(chi) falls below ``floor`` (or at chi^2 = chi2_max).
    """
    if omega_t <= 0 or points < 2:
        raise ValueError(f"need omega_t > 0 and points >= 2, got {omega_t}, {points}")
    c = s.component(name)
    chis = np.sqrt(np.linspace(0.0, s.chi2_max, 61))[1:]
    kept = [chi for chi in chis if solve_potential(s, float(chi)).densities[name] >= floor]
    chi_top = kept[-1] if kept else chis[0]
    low = 5.0 * c.temperature / omega_t**2
    high = 0.5 * c.mass * (s.omega * chi_top) ** 2
    if high <= low:
        raise ValueError(f"{name}: empty energy range at Omega*t={omega_t}")
    return np.geomspace(low, high, points)


# ---------------------------------------------------------------------------
# Symbolic objects
# ---------------------------------------------------------------------------

DENSITY = LinearFunctional.moment("n", "v", 1, species={"f": 1})


def vlasov_system(nonlocal_constraints: bool = False) -> ModelSystem:
    """
    Vlasov equation f_t + v f_x + mu E f_v = 0 for one species with charge-to-mass ratio mu.

    E depends on (t, x) only. With ``nonlocal_constraints`` the zero charge and current
    moments are attached.
    """
    constraints = ()
    if nonlocal_constraints:
        constraints = (
            (LinearFunctional.moment("rho", "v", 1, species={"f": 1}), sp.Integer(0)),
            (LinearFunctional.moment("j", "v", "v", species={"f": 1}), sp.Integer(0)),
        )
    return ModelSystem.build(
        ["t", "x", "v"],
        ["f", "E"],
        {"f_t": "-v*f_x - mu*E*f_v"},
        parameters=["mu", "Omega"],
        dependencies={"E": ("t", "x")},
        nonlocal_constraints=constraints,
        name="vlasov",
    )


def projective_generator(omega: Optional[float] = None) -> Generator:
    """R6 = (1 + W^2 t^2) d_t + W^2 t x d_x + W^2 (x - v t) d_v - 3 W^2 t E d_E, W = Omega."""
    w2 = OMEGA**2 if omega is None else sp.nsimplify(omega, rational=True) ** 2
    return Generator(
        xi={"t": 1 + w2 * T**2, "x": w2 * T * X, "v": w2 * (X - V * T)},
        eta={"E": -3 * w2 * T * E_FIELD},
        label="R6",
    )


def density_generator() -> Generator:
    """R6 carried to the density moment: R7 on {t, x, n}."""
    return prolong_to_functional(projective_generator(), DENSITY, vlasov_system(), label="R7")


def density_invariants() -> Tuple[sp.Expr, sp.Expr]:
    """J3 = x / sqrt(1 + Omega^2 t^2) and n sqrt(1 + Omega^2 t^2)."""
    st = sp.sqrt(1 + OMEGA**2 * T**2)
    return X / st, DENSITY.symbol * st


def distribution_invariants() -> Tuple[sp.Expr, sp.Expr]:
    """J3 and J4 = v^2 + Omega^2 (x - v t)^2."""
    return X / sp.sqrt(1 + OMEGA**2 * T**2), V**2 + OMEGA**2 * (X - V * T) ** 2


def field_coordinate_residual(s: PlasmaScenario, t: float, x: float, h: float = 1e-5) -> Tuple[float, float]:
    """
    eta^E - xi^t E_t - xi^x E_x on the quasi-neutral field, by central differences.

    Returns (residual, scale) where scale is the largest term magnitude.
    """
    w2 = s.omega**2
    e = plasma_field(s, t, x)
    e_t = (plasma_field(s, t + h, x) - plasma_field(s, t - h, x)) / (2 * h)
    e_x = (plasma_field(s, t, x + h) - plasma_field(s, t, x - h)) / (2 * h)
    terms = (-3.0 * w2 * t * e, -(1.0 + w2 * t * t) * e_t, -w2 * t * x * e_x)
    return float(sum(terms)), float(max(abs(v) for v in terms))


def derive_field_coordinate() -> sp.Expr:
    """Coordinate of E that completes R6 to a symmetry of the Vlasov equation."""
    bare = Generator(xi=projective_generator().xi, label="R6")
    return solve_unknown_coordinate(vlasov_system(), bare, "E", degree=2)


def vlasov_residual(s: PlasmaScenario, name: str, t: float, x: float, v: float, h: float = 1e-5) -> Tuple[float, float]:
    """
    (log f)_t + v (log f)_x + (e/m) E (log f)_v by central differences of the constructed
    distribution, with E from the potential.

    Returns (residual, scale) where scale is the largest term magnitude.
    """
    c = s.component(name)

    def log_f(tt: float, xx: float, vv: float) -> float:
        return float(np.log(plasma_distribution(s, name, tt, xx, vv)))

    dv = h * max(1.0, abs(v))
    l_t = (log_f(t + h, x, v) - log_f(t - h, x, v)) / (2 * h)
    l_x = (log_f(t, x + h, v) - log_f(t, x - h, v)) / (2 * h)
    l_v = (log_f(t, x, v + dv) - log_f(t, x, v - dv)) / (2 * dv)
    terms = (l_t, v * l_x, c.charge / c.mass * plasma_field(s, t, x) * l_v)
    return float(sum(terms)), float(max(abs(term) for term in terms))
