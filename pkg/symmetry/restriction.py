"""
Restriction of admitted generators on a particular solution, and prolongation of
generators onto solution functionals.

restrict_on_solution keeps the combinations of a family whose canonical coordinates
vanish on the boundary data. prolong_to_functional carries a generator from the
variables of a model system to the reduced space {evolution variable, parameters,
functional values}.
"""

import logging
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp
from scipy.linalg import null_space

from symbolic.expr_core import as_symbol, jet, lambdify, simplify
from symbolic.jet_algebra import BoundaryCondition, LinearFunctional, ModelSystem
from symmetry.generators import Generator, GeneratorFamily, canonical

logger = logging.getLogger(__name__)


class RestrictionError(ValueError):
    """The boundary data admit no member of the family."""


class ClosureError(ValueError):
    """A prolonged coordinate does not close in the reduced space."""

    def __init__(self, message: str, term: Any = None):
        super().__init__(message if term is None else f"{message}: {term}")
        self.term = term


def _as_boundary(boundary: Union[BoundaryCondition, Sequence[BoundaryCondition]]) -> Tuple[BoundaryCondition, ...]:
    if isinstance(boundary, BoundaryCondition):
        return (boundary,)
    return tuple(boundary)


def _profile_jets(sys: ModelSystem, expr: sp.Expr, boundary: Sequence[BoundaryCondition]) -> Dict[sp.Symbol, sp.Expr]:
    """Map jets in ``expr`` to derivatives of the boundary profiles."""
    profiles = {bc.dependent: bc for bc in boundary}
    mapping: Dict[sp.Symbol, sp.Expr] = {}
    for sym, parts in sys.jets_in(expr).items():
        bc = profiles.get(parts.base)
        if bc is None:
            continue
        if bc.variable in parts.derivs:
            raise ClosureError(f"{sym} is a derivative across the boundary surface {bc.variable}={bc.value}", sym)
        value = bc.profile
        for d in parts.derivs:
            value = sp.diff(value, sp.Symbol(d))
        mapping[sym] = value
    return mapping


def boundary_invariance(
    g: Generator,
    sys: ModelSystem,
    boundary: Union[BoundaryCondition, Sequence[BoundaryCondition]],
) -> List[sp.Expr]:
    """
    Canonical coordinates of ``g`` evaluated on the boundary data.

    Each kappa is reduced on the frame (which removes derivatives across the boundary),
    restricted to the boundary surface and evaluated on the boundary profile.
    One expression per boundary condition; all vanish iff ``g`` leaves the data invariant.
    """
    boundary = _as_boundary(boundary)
    kappa = canonical(g, sys).kappa
    out: List[sp.Expr] = []
    for bc in boundary:
        k = sys.frame_reduce(kappa[bc.dependent], simplify_result=False)
        k = k.xreplace({sp.Symbol(bc.variable): bc.value})
        k = k.xreplace(_profile_jets(sys, k, boundary))
        out.append(simplify(k))
    return out


def _rationalize(value: float, tol: float) -> sp.Rational:
    if abs(value) < tol:
        return sp.Integer(0)
    return sp.nsimplify(value, tolerance=tol, rational=True)


def restrict_on_solution(
    fam: GeneratorFamily,
    sys: ModelSystem,
    approx: Union[BoundaryCondition, Sequence[BoundaryCondition]],
    samples: int = 24,
    rng: Optional[np.random.Generator] = None,
    tol: float = 1e-9,
) -> GeneratorFamily:
    """
    Members of ``fam`` whose canonical coordinates vanish on the boundary data.

    The conditions sum_j A_j kappa_j = 0 are sampled at random points of the remaining
    variables; the numeric kernel is brought to reduced row echelon form and rounded to
    rationals, then each resulting generator is verified exactly.

    Raises:
        RestrictionError: no nonzero combination survives, or rounding fails verification
    """
    boundary = _as_boundary(approx)
    conditions = [boundary_invariance(g, sys, boundary) for g in fam.basis]
    n = fam.dimension
    if all(c == 0 for cs in conditions for c in cs):
        logger.debug("family already vanishes on the boundary data")
        return fam

    rng = rng if rng is not None else np.random.default_rng(7)
    rows: List[np.ndarray] = []
    for idx in range(len(boundary)):
        column_exprs = [conditions[j][idx] for j in range(n)]
        syms = sorted(set().union(*(e.free_symbols for e in column_exprs)), key=lambda s: s.name)
        points = [rng.uniform(0.3, 1.2, size=max(samples, 3 * n)) for _ in syms]
        block = []
        for e in column_exprs:
            values = np.asarray(lambdify(e, syms)(*points), dtype=float) if syms else np.asarray(float(e))
            block.append(np.broadcast_to(values, (max(samples, 3 * n),)))
        rows.append(np.column_stack(block))
    matrix = np.vstack(rows)
    kernel = null_space(matrix, rcond=tol)
    logger.debug("restriction kernel has dimension %d of %d", kernel.shape[1], n)
    if kernel.shape[1] == 0:
        raise RestrictionError(f"no member of the {n}-dimensional family is compatible with the boundary data")
    if kernel.shape[1] == n:
        return fam

    echelon, _ = sp.Matrix(kernel.T).rref(iszerofunc=lambda v: abs(v) < 1e-8)
    basis: List[Generator] = []
    for r in range(kernel.shape[1]):
        coefficients = [_rationalize(float(v), 1e-8) for v in echelon.row(r)]
        g = fam.combination(coefficients, label=f"R{r + 1}").simplified()
        if any(c != 0 for c in boundary_invariance(g, sys, boundary)):
            raise RestrictionError(f"rational rounding of kernel vector {coefficients} does not vanish on the boundary")
        basis.append(g)
    return GeneratorFamily(tuple(basis))


# ---------------------------------------------------------------------------
# Prolongation onto functionals
# ---------------------------------------------------------------------------


def _as_functionals(functionals: Union[LinearFunctional, Sequence[LinearFunctional]]) -> Tuple[LinearFunctional, ...]:
    if isinstance(functionals, LinearFunctional):
        return (functionals,)
    return tuple(functionals)


def _functional_jet(sys: ModelSystem, sym: sp.Symbol, functionals: Sequence[LinearFunctional]) -> Optional[sp.Symbol]:
    parts = sys.jet_of(sym)
    if parts is None:
        return None
    best: Optional[Tuple[int, sp.Symbol]] = None
    for F in functionals:
        if F.kind != "point" or F.target != parts.base:
            continue
        extra = parts.without(F.derivs)
        if extra is None or any(d in F.point_variables for d in extra.derivs):
            continue
        candidate = (len(F.derivs), jet(F.name, *extra.derivs))
        if best is None or candidate[0] > best[0]:
            best = candidate
    return best[1] if best else None


def _close_point(
    expr: sp.Expr,
    sys: ModelSystem,
    functionals: Sequence[LinearFunctional],
    point: Mapping[sp.Symbol, sp.Expr],
    reductions: Mapping[sp.Symbol, sp.Expr],
) -> sp.Expr:
    expr = sys.frame_reduce(sp.expand(expr), simplify_result=False)
    early = expr.xreplace(dict(point))
    if early.has(sp.zoo, sp.nan, sp.oo):
        # removable singularities such as nu*v/x need cancelling before x -> 0
        early = simplify(expr).xreplace(dict(point))
        if early.has(sp.zoo, sp.nan, sp.oo):
            raise ClosureError("coordinate is singular at the evaluation point", early)
    expr = early.xreplace(dict(reductions))
    mapping: Dict[sp.Symbol, sp.Expr] = {}
    for sym in expr.free_symbols:
        target = _functional_jet(sys, sym, functionals)
        if target is not None:
            mapping[sym] = target
        elif sys.jet_of(sym) is not None:
            raise ClosureError("system variable left after reduction", sym)
        elif sym in point:
            raise ClosureError("evaluation-point variable left after reduction", sym)
    return simplify(expr.xreplace(mapping))


def _coefficients_in(expr: sp.Expr, v: sp.Symbol) -> List[sp.Expr]:
    """Coefficients of ``expr`` as a polynomial in ``v``, lowest degree first."""
    expr = sp.expand(expr)
    if not expr.has(v):
        return [expr]
    try:
        coeffs = sp.Poly(expr, v).all_coeffs()[::-1]
    except sp.PolynomialError:
        raise ClosureError(f"kernel is not polynomial in {v}", expr) from None
    return coeffs


def _moment_coordinate(
    g: Generator,
    F: LinearFunctional,
    sys: ModelSystem,
    functionals: Sequence[LinearFunctional],
) -> sp.Expr:
    """kappa^F = sum_s w_s * integral(weight * kappa^s dv), integrating v-derivatives by parts."""
    v = sp.Symbol(F.variable)
    kappa = canonical(g, sys).kappa

    # (remaining derivatives) -> {(species, power of v): coefficient}
    integrals: Dict[Tuple[str, ...], Dict[Tuple[str, int], sp.Expr]] = {}
    for species, w in F.species:
        for term in sp.Add.make_args(sp.expand(kappa[species])):
            jets = [s for s, p in sys.jets_in(term).items() if p.base == species]
            if len(jets) != 1 or sp.degree(term, jets[0]) != 1:
                raise ClosureError("integrand is not linear in one jet of the integrated species", term)
            parts = sys.jet_of(jets[0])
            c = sp.cancel(term / jets[0])
            if sys.jets_in(c):
                raise ClosureError("coefficient of an integrated jet depends on other jets", term)
            m = parts.count(F.variable)
            rest = tuple(d for d in parts.derivs if d != F.variable)
            kernel = (-1) ** m * sp.diff(F.weight * c, v, m)
            slot = integrals.setdefault(rest, {})
            for k, a in enumerate(_coefficients_in(kernel, v)):
                slot[(species, k)] = slot.get((species, k), sp.Integer(0)) + w * a

    moments = [M for M in functionals if M.kind == "moment" and M.variable == F.variable]
    profiles: List[Dict[Tuple[str, int], sp.Expr]] = []
    for M in moments:
        profile: Dict[Tuple[str, int], sp.Expr] = {}
        for species, w in M.species:
            for k, b in enumerate(_coefficients_in(M.weight, v)):
                profile[(species, k)] = w * b
        profiles.append(profile)

    result = sp.Integer(0)
    for derivs, target in integrals.items():
        unknowns = [sp.Dummy(f"c_{M.name}") for M in moments]
        keys = set(target) | {key for p in profiles for key in p}
        equations = [
            sum((c * p.get(key, 0) for c, p in zip(unknowns, profiles)), sp.Integer(0)) - target.get(key, 0)
            for key in keys
        ]
        solution = sp.linsolve(equations, unknowns) if unknowns else sp.EmptySet
        if not solution:
            raise ClosureError("moment coordinate is not a combination of the given functionals", target)
        values = [sp.sympify(x).xreplace({u: 0 for u in unknowns}) for x in next(iter(solution))]
        for c, M in zip(values, moments):
            result += c * jet(M.name, *derivs)
    return result


def prolong_to_functional(
    g: Generator,
    functionals: Union[LinearFunctional, Sequence[LinearFunctional]],
    sys: ModelSystem,
    reductions: Optional[Mapping[Any, Any]] = None,
    label: Optional[str] = None,
) -> Generator:
    """
    Carry ``g`` to the reduced space of the given functionals.

    Args:
        g: Generator (point or Lie-Backlund) on the variables of ``sys``
        functionals: Point-evaluation or velocity-moment functionals
        sys: Host system
        reductions: Jet values at the evaluation point, e.g. the on-axis relations
            ``{v_x: -I0_z/I0, ...}``; applied before remaining jets are renamed
        label: Label of the reduced generator

    Returns:
        Generator with xi on the surviving independents and eta on the functional values

    Raises:
        ClosureError: a coordinate keeps system variables or is not expressible
    """
    functionals = _as_functionals(functionals)
    reductions = {as_symbol(k): sp.sympify(v) for k, v in (reductions or {}).items()}
    kappa = canonical(g, sys).kappa

    point_vars = {name for F in functionals if F.kind == "point" for name in F.point_variables}
    moment_vars = {F.variable for F in functionals if F.kind == "moment"}
    point = {sp.Symbol(k): v for F in functionals if F.kind == "point" for k, v in F.point}
    if len({frozenset(F.point) for F in functionals if F.kind == "point"}) > 1:
        raise ClosureError("point functionals must share one evaluation point")

    xi: Dict[str, sp.Expr] = {}
    for var, coord in g.xi.items():
        if var in point_vars or var in moment_vars:
            continue
        value = simplify(coord.xreplace(point))
        if sys.jets_in(value) or value.free_symbols & ({sp.Symbol(v) for v in moment_vars} | set(point)):
            raise ClosureError(f"coordinate xi^{var} does not close in the reduced space", value)
        xi[var] = value

    eta: Dict[str, sp.Expr] = {}
    for F in functionals:
        if F.kind == "point":
            free_vars = [v for v in sys.scope if v not in point_vars and sys.depends_on(F.target, v)]
            raw = sys.total_derivative_along(kappa[F.target], F.derivs)
            for var in free_vars:
                raw += g.xi.get(var, 0) * jet(F.target, *F.derivs, var)
            eta[F.name] = _close_point(raw, sys, functionals, point, reductions)
        else:
            k = _moment_coordinate(g, F, sys, functionals)
            reduced_vars = [v for v in sys.scope if v != F.variable]
            for var in reduced_vars:
                k += xi.get(var, 0) * jet(F.name, var)
            eta[F.name] = simplify(k)
    reduced = Generator(xi, eta, label=label or f"{g.label}|{','.join(F.name for F in functionals)}")
    logger.debug("prolonged %s onto functionals: %s", g.label, reduced)
    return reduced
