"""
Finite transformations and invariant solutions of generators.

flow integrates the Lie equations dX/da = (xi, eta)(X). invariant_solution rebuilds
functional values from invariants of a reduced generator and data on a boundary
surface, tracking the branch that starts at the boundary.
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp

from numerics.ode import IntegrationError, OdeProblem, ode_solve
from numerics.roots import NoSignChangeError, expand_bracket, root_find
from symbolic.expr_core import jet_parts, lambdify
from symmetry.generators import Generator

logger = logging.getLogger(__name__)


class FlowError(RuntimeError):
    """The group orbit left the domain where the generator can be evaluated."""


class InvariantSolutionError(RuntimeError):
    """The invariant relations cannot be solved on the branch of the boundary data."""


def _bind(expr: sp.Expr, params: Mapping[str, float]) -> sp.Expr:
    return expr.xreplace({sp.Symbol(k): sp.Float(v) for k, v in params.items()})


def flow(
    g: Generator,
    p: Mapping[str, float],
    a: float,
    params: Optional[Mapping[str, float]] = None,
    rtol: float = 1e-10,
    atol: float = 1e-10,
) -> Dict[str, float]:
    """
    Image of the point ``p`` under the one-parameter group of ``g`` at parameter ``a``.

    Args:
        g: Point generator (coordinates free of derivatives)
        p: Values of every group variable
        a: Group parameter
        params: Values of parameters appearing in the coordinates

    Raises:
        ValueError: coordinates contain jet variables or ``p`` misses a variable
        FlowError: the orbit cannot be continued to ``a``
    """
    params = dict(params or {})
    names = sorted(p)
    missing = [v for v in g.variables if v not in p]
    if missing:
        raise ValueError(f"point misses group variable(s) {missing}")
    coords = [_bind(g.coordinate(v), params) for v in names]
    for c in coords:
        jets = [s for s in c.free_symbols if (parts := jet_parts(s)) is not None and parts.order > 0]
        if jets:
            raise ValueError(f"flow of {g.label} needs a point generator, found {jets}")
    if a == 0:
        return {k: float(p[k]) for k in names}

    symbols = [sp.Symbol(n) for n in names]
    unbound = set().union(*(c.free_symbols for c in coords)) - set(symbols)
    if unbound:
        raise ValueError(f"unbound parameter(s) in {g.label}: {sorted(s.name for s in unbound)}")
    field_fn = lambdify(sp.Matrix(coords), symbols)

    def rhs(_a, y):
        return np.asarray(field_fn(*y), dtype=float).ravel()

    y0 = [float(p[k]) for k in names]
    try:
        traj = ode_solve(OdeProblem(rhs=rhs, y0=y0, interval=(0.0, float(a)), rtol=rtol, atol=atol))
    except IntegrationError as exc:
        raise FlowError(f"flow of {g.label} from {dict(p)} stopped at a={exc.last_t:.6g}") from exc
    return dict(zip(names, (float(v) for v in traj.y_end)))


@dataclass(frozen=True)
class BoundarySurface:
    """
    Data on a surface of the reduced space.

    Attributes:
        fixed: Variables held constant on the surface (z = 0, eps = 0, t = 0)
        profile: Unknown -> value, or callable of the free coordinates
        free: Coordinates that vary along the surface
    """

    fixed: Dict[str, float]
    profile: Dict[str, Union[float, Callable[..., float]]]
    free: Tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.free) > 1:
            raise ValueError(f"at most one free boundary coordinate is supported, got {self.free}")

    def unknown_values(self, free_values: Mapping[str, float]) -> Dict[str, float]:
        out: Dict[str, float] = {}
        for name, value in self.profile.items():
            out[name] = float(value(**free_values)) if callable(value) else float(value)
        return out


@dataclass
class _Relation:
    expr: sp.Expr
    symbols: List[sp.Symbol]
    fn: Callable

    def __call__(self, values: Mapping[str, float]) -> float:
        return float(self.fn(*[values[s.name] for s in self.symbols]))


def _relation(expr: Any, params: Mapping[str, float]) -> _Relation:
    expr = _bind(sp.sympify(expr), params)
    symbols = sorted(expr.free_symbols, key=lambda s: s.name)
    return _Relation(expr=expr, symbols=symbols, fn=sp.lambdify(symbols, expr, modules="math"))


@dataclass
class InvariantSolution:
    """Callable map from a point of the reduced space to the unknown functional values."""

    similarity: List[_Relation]
    dependent: List[Tuple[str, _Relation]]
    boundary: BoundarySurface
    unknowns: Tuple[str, ...]
    steps: int = 24
    residual_tol: float = 1e-6

    def _boundary_point(self, point: Mapping[str, float]) -> Dict[str, float]:
        values = {k: v for k, v in point.items() if k not in self.unknowns}
        values.update(self.boundary.fixed)
        if self.boundary.free:
            name = self.boundary.free[0]
            relation = next((r for r in self.similarity if any(s.name == name for s in r.symbols)), None)
            if relation is None:
                raise InvariantSolutionError(f"no invariant free of {self.unknowns} involves {name}")
            target = relation(point)

            def mismatch(b: float) -> float:
                return relation({**point, **values, name: b}) - target

            guess = float(point.get(name, 0.0))
            try:
                lo, hi = expand_bracket(mismatch, guess)
                values[name] = root_find(mismatch, (lo, hi)).root
            except NoSignChangeError as exc:
                raise InvariantSolutionError(f"similarity invariant cannot be matched on the boundary: {exc}") from None
        values.update(self.boundary.unknown_values({k: values[k] for k in self.boundary.free}))
        return values

    def __call__(self, point: Mapping[str, float]) -> Dict[str, float]:
        point = {k: float(v) for k, v in point.items()}
        return self._continue(self._boundary_point(point), point)

    def transport(self, start: Mapping[str, float], point: Mapping[str, float]) -> Dict[str, float]:
        """
        Carry known values from ``start`` (every reduced coordinate, unknowns included)
        to ``point`` along the invariants, without returning to the boundary.
        """
        start = {k: float(v) for k, v in start.items()}
        missing = [u for u in self.unknowns if u not in start]
        if missing:
            raise ValueError(f"start point misses unknown(s) {missing}")
        return self._continue(start, {k: float(v) for k, v in point.items()})

    def _continue(self, start: Dict[str, float], point: Dict[str, float]) -> Dict[str, float]:
        constants = [rel(start) for _, rel in self.dependent]
        moving = sorted((set(start) | set(point)) - set(self.unknowns))
        origin = {k: start.get(k, point.get(k)) for k in moving}
        end = {k: point.get(k, start.get(k)) for k in moving}
        current = {u: start[u] for u in self.unknowns}

        for step in range(1, self.steps + 1):
            s = step / self.steps
            values = {k: origin[k] + s * (end[k] - origin[k]) for k in moving}
            for (unknown, rel), c in zip(self.dependent, constants):

                def residual(u: float, _rel=rel, _c=c, _unknown=unknown) -> float:
                    return _rel({**values, **current, _unknown: u}) - _c

                try:
                    lo, hi = expand_bracket(residual, current[unknown])
                    result = root_find(residual, (lo, hi))
                except (NoSignChangeError, ZeroDivisionError, ValueError, OverflowError) as exc:
                    raise InvariantSolutionError(f"{unknown} lost its bracket at {values}: {exc}") from None
                if result.residual > self.residual_tol * (1.0 + abs(c)):
                    raise InvariantSolutionError(
                        f"{unknown} crossed a pole at {values} (residual {result.residual:.3g})"
                    )
                current[unknown] = result.root
        return dict(current)


def invariant_solution(
    g: Generator,
    invariants: Sequence[Any],
    boundary: BoundarySurface,
    unknowns: Sequence[str],
    params: Optional[Mapping[str, float]] = None,
    steps: int = 24,
) -> InvariantSolution:
    """
    Build the invariant solution defined by ``invariants`` and the boundary data.

    Invariants free of the unknowns act as similarity variables and locate the boundary
    point on the orbit; every other invariant keeps its boundary value and is solved
    for one unknown by continuation from the boundary.

    Args:
        g: Reduced generator (used to confirm the invariants)
        invariants: Expressions annihilated by ``g``
        boundary: Surface carrying the data
        unknowns: Names of the functional values to reconstruct
        params: Parameter values
        steps: Continuation steps from the boundary to the requested point
    """
    params = dict(params or {})
    for J in invariants:
        residual = sp.simplify(g.apply(J))
        if residual != 0:
            raise InvariantSolutionError(f"{J} is not an invariant of {g.label}: {residual}")

    unknown_syms = {sp.Symbol(u) for u in unknowns}
    similarity: List[_Relation] = []
    dependent: List[Tuple[str, _Relation]] = []
    solved: set = set()
    pending = [sp.sympify(J) for J in invariants]
    for J in list(pending):
        if not (J.free_symbols & unknown_syms):
            similarity.append(_relation(J, params))
            pending.remove(J)
    while pending:
        for J in pending:
            left = (J.free_symbols & unknown_syms) - solved
            if len(left) == 1:
                u = left.pop()
                dependent.append((u.name, _relation(J, params)))
                solved.add(u)
                pending.remove(J)
                break
        else:
            raise InvariantSolutionError(f"invariants {pending} do not determine the unknowns one at a time")
    if solved != unknown_syms:
        raise InvariantSolutionError(f"unknowns {sorted(s.name for s in unknown_syms - solved)} are not determined")
    return InvariantSolution(
        similarity=similarity,
        dependent=dependent,
        boundary=boundary,
        unknowns=tuple(unknowns),
        steps=steps,
    )
