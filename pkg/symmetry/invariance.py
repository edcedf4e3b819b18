"""
Invariance criteria, determining equations and invariant verification.

This module:
- applies prolonged generators to a system and reduces the result on its frame
- solves for a single unknown coordinate that makes a generator admissible
- builds and solves the linear determining system for a polynomial ansatz
- checks that an expression is an invariant of a generator
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import sympy as sp
from sympy.polys.monomials import itermonomials
from sympy.solvers.solveset import NonlinearError

from symbolic.expr_core import jet, numeric_residual, simplify
from symbolic.jet_algebra import ModelSystem
from symmetry.generators import Generator, GeneratorFamily, canonical, prolong, split_linear

logger = logging.getLogger(__name__)


class CoordinateSolveError(ValueError):
    """The unknown coordinate cannot be determined uniquely."""


class DeterminingSystemError(ValueError):
    """The determining system cannot be set up for this model."""


@dataclass(frozen=True)
class InvarianceCheck:
    """
    Result of an invariance check.

    status is "symbolic" (every residual simplifies to 0 and the random-point check
    agrees), "numeric-only" (residuals vanish numerically but not after simplify)
    or "nonzero".
    """

    label: str
    residuals: Tuple[sp.Expr, ...]
    status: str
    numeric_max: float

    @property
    def passed(self) -> bool:
        return self.status in ("symbolic", "numeric-only")


def _max_order(sys: ModelSystem, exprs: Sequence[Any]) -> int:
    orders = [p.order for e in exprs for p in sys.jets_in(e).values()]
    return max(orders, default=0)


def invariance_residuals(sys: ModelSystem, g: Generator, form: str = "point") -> List[sp.Expr]:
    """Generator action on each equation, reduced on the frame but not simplified."""
    if form == "point":
        order = max(_max_order(sys, sys.equations), 1)
        pg = prolong(g, order, sys)
        raw = [pg.apply(eq) for eq in sys.equations]
    elif form == "canonical":
        cg = canonical(g, sys)
        raw = [cg.apply(eq, sys) for eq in sys.equations]
    else:
        raise ValueError(f"unknown invariance form {form!r}")
    return [sys.frame_reduce(sp.expand(r), simplify_result=False) for r in raw]


def check_invariance(
    sys: ModelSystem,
    g: Generator,
    form: str = "point",
    samples: int = 100,
    tol: float = 1e-10,
    rng: Optional[np.random.Generator] = None,
) -> InvarianceCheck:
    """
    Check whether ``sys`` admits ``g``.

    Args:
        sys: Model system
        g: Generator on the group variables of ``sys``
        form: "point" (prolonged generator) or "canonical" (evolutionary form)
        samples: Random points for the numeric cross-check
        tol: Numeric zero threshold
    """
    raw = invariance_residuals(sys, g, form)
    residuals = tuple(simplify(r) for r in raw)
    numeric = max((numeric_residual(r, samples=samples, rng=rng) for r in raw), default=0.0)
    numeric_ok = bool(np.isfinite(numeric) and numeric <= tol)
    symbolic_ok = all(r == 0 for r in residuals)

    if symbolic_ok and numeric_ok:
        status = "symbolic"
    elif numeric_ok:
        status = "numeric-only"
        logger.warning("%s on %s: numeric-only pass (max %.3g)", g.label, sys.name, numeric)
    else:
        status = "nonzero"
        if symbolic_ok:
            logger.warning("%s on %s: simplifier reported 0 but numeric residual is %.3g", g.label, sys.name, numeric)
    logger.debug("%s on %s: %s", g.label, sys.name, status)
    return InvarianceCheck(label=g.label, residuals=residuals, status=status, numeric_max=float(numeric))


def _coefficient_symbols(prefix: str, count: int) -> List[sp.Symbol]:
    return [sp.Symbol(f"{prefix}{k}") for k in range(count)]


def _monomials(variables: Sequence[sp.Symbol], degree: int) -> List[sp.Expr]:
    return list(sp.ordered(itermonomials(list(variables), degree)))


def _split_equations(residuals: Sequence[sp.Expr], unknowns: Sequence[sp.Symbol], keep: Sequence[sp.Symbol] = ()) -> List[sp.Expr]:
    skip = set(unknowns) | set(keep)
    equations: List[sp.Expr] = []
    for r in residuals:
        gens = [s for s in r.free_symbols if s not in skip]
        equations.extend(split_linear(r, gens))
    return equations


def solve_unknown_coordinate(sys: ModelSystem, g: Generator, unknown: str, degree: int = 2) -> sp.Expr:
    """
    Find the coordinate of ``unknown`` that makes ``g`` a symmetry of ``sys``.

    The coordinate is sought as a polynomial of degree <= ``degree`` in the variables
    it may depend on, with coefficients that may involve the system parameters.

    Raises:
        CoordinateSolveError: residual not linear in the unknown, no solution, or several
    """
    if unknown in sys.dependencies:
        variables = [sp.Symbol(v) for v in sys.dependencies[unknown]] + [sp.Symbol(unknown)]
    elif unknown in sys.scope:
        variables = list(sys.independents) + list(sys.dependents)
    else:
        raise CoordinateSolveError(f"{unknown} is not a variable of {sys.name}")

    monomials = _monomials(variables, degree)
    coefficients = _coefficient_symbols(f"c_{unknown}", len(monomials))
    trial = sum((c * m for c, m in zip(coefficients, monomials)), sp.Integer(0))
    xi = dict(g.xi)
    eta = dict(g.eta)
    (xi if unknown in sys.scope else eta)[unknown] = trial
    candidate = Generator(xi, eta, label=g.label)

    residuals = invariance_residuals(sys, candidate)
    equations = _split_equations(residuals, coefficients, sys.parameters)
    try:
        solution = sp.linsolve(equations, coefficients)
    except NonlinearError as exc:
        raise CoordinateSolveError(f"invariance residual is not linear in the coordinate of {unknown}: {exc}") from None
    if not solution:
        raise CoordinateSolveError(f"no consistent coordinate for {unknown} in {g.label} on {sys.name}")
    values = next(iter(solution))
    free = set().union(*(sp.sympify(v).free_symbols for v in values)) & set(coefficients)
    if free:
        raise CoordinateSolveError(f"coordinate of {unknown} is not unique ({len(free)} free coefficient(s))")
    result = simplify(sum((v * m for v, m in zip(values, monomials)), sp.Integer(0)))
    logger.debug("solved coordinate of %s in %s: %s", unknown, g.label, result)
    return result


@dataclass(frozen=True, eq=False)
class DeterminingSystem:
    """Split determining equations and the generator family solving them."""

    equations: Tuple[sp.Expr, ...]
    unknowns: Tuple[sp.Symbol, ...]
    ansatz: Generator
    family: GeneratorFamily

    @property
    def dimension(self) -> int:
        return self.family.dimension


def _lift_field(sys: ModelSystem) -> Tuple[str, Dict[str, sp.Expr]]:
    """Evolution variable and lambda^j = -d(rhs)/d(u_{x_j}) of the characteristic field."""
    evolution = {p.derivs[0] for k in sys.leading for p in [sys.jet_of(k)] if p.order == 1}
    if len(evolution) != 1:
        raise DeterminingSystemError(f"{sys.name}: lift needs first-order equations in one evolution variable")
    z = evolution.pop()
    lam: Dict[str, sp.Expr] = {}
    for key, rhs in sys.leading.items():
        base = sys.jet_of(key).base
        for var in sys.scope:
            if var == z:
                continue
            value = -sp.diff(rhs, jet(base, var))
            if any(p.order > 0 for p in sys.jets_in(value).values()):
                raise DeterminingSystemError(f"{sys.name}: characteristic speed along {var} depends on derivatives")
            if var in lam and simplify(lam[var] - value) != 0:
                raise DeterminingSystemError(f"{sys.name}: equations disagree on the characteristic speed along {var}")
            lam[var] = value
    return z, lam


def determining_system(
    sys: ModelSystem,
    degree: int,
    ansatz: str = "full",
    constant: Sequence[str] = (),
    lift: bool = False,
    parameter_values: Optional[Mapping[str, Any]] = None,
) -> DeterminingSystem:
    """
    Solve the determining equations for polynomial generator coordinates.

    Args:
        sys: Purely differential model system
        degree: Polynomial degree of the ansatz, >= 0
        ansatz: "full" (all monomials of the group variables) or "diagonal"
            (each coordinate a polynomial in its own variable)
        constant: Variables whose coordinate is a single constant
        lift: Multiply the evolution coordinate by the characteristic field
        parameter_values: Numeric values substituted for system parameters

    Returns:
        DeterminingSystem whose family spans the solution space
    """
    if sys.nonlocal_constraints:
        raise DeterminingSystemError(f"{sys.name} has nonlocal constraints")
    if degree < 0:
        raise DeterminingSystemError(f"degree must be >= 0, got {degree}")
    if ansatz not in ("full", "diagonal"):
        raise DeterminingSystemError(f"unknown ansatz {ansatz!r}")

    group = list(sys.independents) + list(sys.dependents)
    unknowns: List[sp.Symbol] = []
    coords: Dict[str, sp.Expr] = {}
    for var in group:
        if var.name in constant:
            monomials = [sp.Integer(1)]
        elif ansatz == "full":
            monomials = _monomials(group, degree)
        else:
            monomials = [var**k for k in range(degree + 1)]
        cs = _coefficient_symbols(f"k_{var.name}", len(monomials))
        unknowns.extend(cs)
        coords[var.name] = sum((c * m for c, m in zip(cs, monomials)), sp.Integer(0))

    if lift:
        z, lam = _lift_field(sys)
        for var, speed in lam.items():
            coords[var] = coords[var] + coords[z] * speed

    xi = {k: v for k, v in coords.items() if k in sys.scope}
    eta = {k: v for k, v in coords.items() if k not in sys.scope}
    trial = Generator(xi, eta, label="ansatz")

    residuals = invariance_residuals(sys, trial)
    if parameter_values:
        values = {sp.Symbol(k): sp.nsimplify(v, rational=True) for k, v in parameter_values.items()}
        residuals = [r.xreplace(values) for r in residuals]
        keep: Sequence[sp.Symbol] = [p for p in sys.parameters if p not in values]
    else:
        keep = sys.parameters
    equations = _split_equations(residuals, unknowns, keep)
    logger.debug("%s: %d determining equations in %d unknowns", sys.name, len(equations), len(unknowns))

    if equations:
        matrix, _ = sp.linear_eq_to_matrix(equations, unknowns)
        null = matrix.nullspace()
    else:
        null = [sp.Matrix([1 if i == j else 0 for i in range(len(unknowns))]) for j in range(len(unknowns))]

    basis: List[Generator] = []
    for n, vector in enumerate(null, start=1):
        scale = math.lcm(*[int(sp.Rational(c).q) for c in vector if c.is_Rational])
        mapping = {u: c * scale for u, c in zip(unknowns, vector)}
        g = trial.subs(mapping)
        if parameter_values:
            g = g.subs({sp.Symbol(k): sp.nsimplify(v, rational=True) for k, v in parameter_values.items()})
        basis.append(g.simplified().relabel(f"G{n}"))
    if not basis:
        logger.warning("%s: the degree-%d ansatz admits only the zero generator", sys.name, degree)
    logger.debug("%s: determining system solution space has dimension %d", sys.name, len(basis))
    return DeterminingSystem(
        equations=tuple(equations),
        unknowns=tuple(unknowns),
        ansatz=trial,
        family=GeneratorFamily(tuple(basis)),
    )


def verify_invariant(g: Generator, J: Any, sys: Optional[ModelSystem] = None) -> sp.Expr:
    """
    Residual of ``g`` applied to ``J``; zero when ``J`` is an invariant of ``g``.

    With a host system, ``g`` is prolonged as far as the jets in ``J`` require and the
    result is reduced on the frame.
    """
    J = sp.sympify(J)
    if sys is None:
        return simplify(g.apply(J))
    order = _max_order(sys, [J])
    action = prolong(g, order, sys).apply(J) if order > 0 else g.apply(J)
    return sys.frame_reduce(sp.expand(action))
