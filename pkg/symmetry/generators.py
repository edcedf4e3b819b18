"""
Infinitesimal generators and their prolongations.

A Generator is the vector field sum_i xi^i d_i + sum_a eta^a d_{u^a}. Coordinates are
keyed by variable name. Prolongation extends the action to jet variables, either by
the canonical formula zeta_J = D_J kappa + xi^i u_{J,i} or by the recursion
zeta_{J,i} = D_i zeta_J - u_{J,j} D_i xi^j.
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import sympy as sp

from symbolic.expr_core import JetVar, as_symbol, jet, parse, simplify, to_text
from symbolic.jet_algebra import ModelSystem

logger = logging.getLogger(__name__)


def _coords(values: Mapping[Any, Any], scope: Sequence[str] = ()) -> Dict[str, sp.Expr]:
    out: Dict[str, sp.Expr] = {}
    for key, value in values.items():
        name = key if isinstance(key, str) else as_symbol(key).name
        expr = parse(value, scope) if isinstance(value, str) else sp.sympify(value)
        if expr != 0:
            out[name] = expr
    return out


def split_linear(expr: Any, gens: Iterable[sp.Symbol]) -> List[sp.Expr]:
    """
    Split ``expr`` into the coefficients of its distinct monomials in ``gens``.

    The numerator of ``expr`` is expanded and each term is separated into a part free of
    ``gens`` and a part depending on them; terms are grouped by the dependent part.
    Non-polynomial factors such as cosh(x) act as their own monomials.
    """
    gens = tuple(gens)
    numerator = sp.numer(sp.together(sp.expand(expr)))
    groups: Dict[sp.Expr, sp.Expr] = {}
    for term in sp.Add.make_args(sp.expand(numerator)):
        coefficient, monomial = term.as_independent(*gens, as_Add=False)
        groups[monomial] = groups.get(monomial, sp.Integer(0)) + coefficient
    return [c for c in groups.values() if c != 0]


@dataclass(frozen=True, eq=False)
class Generator:
    """
    A point (or Lie-Backlund) vector field.

    Attributes:
        xi: Independent-variable name -> coordinate
        eta: Dependent-variable name -> coordinate
        label: Display name (X1, R_par, ...)
    """

    xi: Dict[str, sp.Expr] = field(default_factory=dict)
    eta: Dict[str, sp.Expr] = field(default_factory=dict)
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "xi", _coords(self.xi))
        object.__setattr__(self, "eta", _coords(self.eta))

    @classmethod
    def from_strings(
        cls,
        xi: Optional[Mapping[str, str]] = None,
        eta: Optional[Mapping[str, str]] = None,
        label: str = "",
        scope: Sequence[str] = (),
    ) -> "Generator":
        return cls(xi=_coords(xi or {}, scope), eta=_coords(eta or {}, scope), label=label)

    def coordinate(self, variable: Any) -> sp.Expr:
        name = variable if isinstance(variable, str) else as_symbol(variable).name
        if name in self.xi:
            return self.xi[name]
        return self.eta.get(name, sp.Integer(0))

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(self.xi) + tuple(self.eta)

    def apply(self, e: Any) -> sp.Expr:
        """First-order action on a function of the group variables (no jets)."""
        e = sp.sympify(e)
        total = sp.Integer(0)
        for name, coord in {**self.xi, **self.eta}.items():
            total += coord * sp.diff(e, sp.Symbol(name))
        return total

    def __add__(self, other: "Generator") -> "Generator":
        xi = {k: self.xi.get(k, 0) + other.xi.get(k, 0) for k in {**self.xi, **other.xi}}
        eta = {k: self.eta.get(k, 0) + other.eta.get(k, 0) for k in {**self.eta, **other.eta}}
        return Generator(xi, eta, label=f"{self.label}+{other.label}".strip("+"))

    def __mul__(self, scalar: Any) -> "Generator":
        s = sp.sympify(scalar)
        return Generator(
            {k: v * s for k, v in self.xi.items()},
            {k: v * s for k, v in self.eta.items()},
            label=self.label,
        )

    __rmul__ = __mul__

    def __neg__(self) -> "Generator":
        return self * -1

    def __sub__(self, other: "Generator") -> "Generator":
        return self + (-other)

    def subs(self, bindings: Mapping[Any, Any]) -> "Generator":
        mapping = {as_symbol(k): sp.sympify(v) for k, v in bindings.items()}
        return Generator(
            {k: v.xreplace(mapping) for k, v in self.xi.items()},
            {k: v.xreplace(mapping) for k, v in self.eta.items()},
            label=self.label,
        )

    def simplified(self) -> "Generator":
        return Generator(
            {k: simplify(v) for k, v in self.xi.items()},
            {k: simplify(v) for k, v in self.eta.items()},
            label=self.label,
        )

    def is_zero(self) -> bool:
        return all(simplify(v) == 0 for v in list(self.xi.values()) + list(self.eta.values()))

    def equivalent(self, other: "Generator") -> bool:
        return (self - other).is_zero()

    def relabel(self, label: str) -> "Generator":
        return Generator(self.xi, self.eta, label=label)

    def __str__(self) -> str:
        parts = [f"({to_text(v)})*d_{k}" for k, v in list(self.xi.items()) + list(self.eta.items())]
        body = " + ".join(parts) if parts else "0"
        return f"{self.label}: {body}" if self.label else body

    __repr__ = __str__


@dataclass(frozen=True, eq=False)
class CanonicalGenerator:
    """Evolutionary representative kappa^a d_{u^a} of a generator."""

    kappa: Dict[str, sp.Expr]
    label: str = ""

    def apply(self, e: Any, sys: ModelSystem) -> sp.Expr:
        """Action of the prolonged evolutionary field: sum_J D_J kappa * d e / d u_J."""
        e = sp.sympify(e)
        total = sp.Integer(0)
        for sym, parts in sys.jets_in(e).items():
            k = self.kappa.get(parts.base)
            if k is None:
                continue
            total += sys.total_derivative_along(k, parts.derivs) * sp.diff(e, sym)
        return total


def _check_scope(g: Generator, sys: ModelSystem) -> None:
    independents = set(sys.scope)
    dependents = {d.name for d in sys.dependents}
    stray = [k for k in g.xi if k not in independents] + [k for k in g.eta if k not in dependents]
    if stray:
        raise ValueError(f"generator {g.label or g} uses variables outside {sys.name}: {stray}")


def canonical(g: Generator, sys: Optional[ModelSystem] = None) -> CanonicalGenerator:
    """kappa^a = eta^a - sum_i xi^i u^a_i over the independents u^a depends on."""
    if sys is not None:
        _check_scope(g, sys)
        dependents = [d.name for d in sys.dependents]
    else:
        dependents = list(g.eta)
    kappa: Dict[str, sp.Expr] = {}
    for dep in dependents:
        k = g.eta.get(dep, sp.Integer(0))
        for var, coord in g.xi.items():
            if sys is None or sys.depends_on(dep, var):
                k -= coord * jet(dep, var)
        kappa[dep] = k
    return CanonicalGenerator(kappa=kappa, label=g.label)


@dataclass(frozen=True, eq=False)
class ProlongedGenerator:
    """A generator together with its jet coordinates zeta_J up to ``order``."""

    base: Generator
    zeta: Dict[sp.Symbol, sp.Expr]
    order: int
    system: ModelSystem

    def coordinate(self, sym: Any) -> sp.Expr:
        sym = as_symbol(sym)
        if sym in self.zeta:
            return self.zeta[sym]
        return self.base.coordinate(sym.name)

    def apply(self, e: Any) -> sp.Expr:
        e = sp.sympify(e)
        total = self.base.apply(e)
        for sym, parts in self.system.jets_in(e).items():
            if parts.order == 0:
                continue
            if parts.order > self.order:
                raise ValueError(f"{sym} exceeds prolongation order {self.order}")
            total += self.zeta.get(sym, sp.Integer(0)) * sp.diff(e, sym)
        return total


def prolong(g: Generator, order: int, sys: ModelSystem, method: str = "direct") -> ProlongedGenerator:
    """
    Prolong ``g`` to all jet variables of order <= ``order``.

    Args:
        g: Generator on the variables of ``sys``
        order: Highest derivative order, >= 1
        sys: Host system (supplies variable dependencies and D_i)
        method: "direct" (canonical formula) or "recursion"
    """
    if order < 1:
        raise ValueError(f"prolongation order must be >= 1, got {order}")
    if method not in ("direct", "recursion"):
        raise ValueError(f"unknown prolongation method {method!r}")
    _check_scope(g, sys)
    kappa = canonical(g, sys).kappa
    zeta: Dict[sp.Symbol, sp.Expr] = {}

    for dep in sys.dependents:
        variables = [v for v in sys.scope if sys.depends_on(dep.name, v)]
        if method == "direct":
            derived: Dict[Tuple[str, ...], sp.Expr] = {(): kappa[dep.name]}
            for n in range(1, order + 1):
                for J in combinations_with_replacement(variables, n):
                    dk = sys.total_derivative(derived[J[:-1]], J[-1])
                    derived[J] = dk
                    z = dk
                    for var in variables:
                        z += g.xi.get(var, 0) * JetVar(dep.name, J + (var,)).symbol
                    zeta[JetVar(dep.name, J).symbol] = z
        else:
            previous: Dict[Tuple[str, ...], sp.Expr] = {(): g.eta.get(dep.name, sp.Integer(0))}
            for n in range(1, order + 1):
                current: Dict[Tuple[str, ...], sp.Expr] = {}
                for J in combinations_with_replacement(variables, n):
                    head, i = J[:-1], J[-1]
                    z = sys.total_derivative(previous[head], i)
                    for var in variables:
                        z -= JetVar(dep.name, head + (var,)).symbol * sys.total_derivative(g.xi.get(var, 0), i)
                    current[J] = z
                    zeta[JetVar(dep.name, J).symbol] = z
                previous = current
    logger.debug("prolonged %s to order %d (%d jet coordinates)", g.label, order, len(zeta))
    return ProlongedGenerator(base=g, zeta=zeta, order=order, system=sys)


@dataclass(frozen=True, eq=False)
class GeneratorFamily:
    """The linear span sum_j A_j g_j of a basis of generators."""

    basis: Tuple[Generator, ...]
    coefficients: Tuple[sp.Symbol, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(self.basis))
        if not self.coefficients:
            object.__setattr__(self, "coefficients", tuple(sp.Symbol(f"A{j + 1}") for j in range(len(self.basis))))
        if len(self.coefficients) != len(self.basis):
            raise ValueError("one coefficient symbol per basis generator is required")

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def variables(self) -> Tuple[str, ...]:
        seen: Dict[str, None] = {}
        for g in self.basis:
            for v in g.variables:
                seen[v] = None
        return tuple(seen)

    def combination(self, values: Optional[Sequence[Any]] = None, label: str = "") -> Generator:
        values = list(values) if values is not None else list(self.coefficients)
        total = Generator(label=label)
        for c, g in zip(values, self.basis):
            total = total + g * c
        return total.relabel(label)

    def _span_equations(self, target: Optional[Generator] = None) -> List[sp.Expr]:
        unknowns = set(self.coefficients)
        names = set(self.variables) | set(target.variables if target is not None else ())
        equations: List[sp.Expr] = []
        for var in sorted(names):
            expr = sum((c * b.coordinate(var) for c, b in zip(self.coefficients, self.basis)), sp.Integer(0))
            if target is not None:
                expr -= target.coordinate(var)
            gens = [s for s in sp.sympify(expr).free_symbols if s not in unknowns]
            equations.extend(split_linear(expr, gens))
        return equations

    def express(self, g: Generator) -> Optional[List[sp.Expr]]:
        """Constant coefficients c with sum_j c_j basis_j == g, or None if g is outside the span."""
        unknowns = list(self.coefficients)
        equations = self._span_equations(g)
        if not equations:
            return [sp.Integer(0)] * len(unknowns)
        solution = sp.linsolve(equations, unknowns)
        if not solution:
            return None
        values = list(next(iter(solution)))
        free = set().union(*(sp.sympify(v).free_symbols for v in values)) & set(unknowns)
        values = [sp.sympify(v).xreplace({s: 0 for s in free}) for v in values]
        if not self.combination(values).equivalent(g):
            return None
        return values

    def rank(self) -> int:
        """Rank of the basis as coordinate vectors over the constants."""
        unknowns = list(self.coefficients)
        equations = self._span_equations()
        if not equations:
            return 0
        values = next(iter(sp.linsolve(equations, unknowns)))
        free = set().union(*(sp.sympify(v).free_symbols for v in values)) & set(unknowns)
        return len(unknowns) - len(free)

    def __iter__(self):
        return iter(self.basis)

    def __len__(self) -> int:
        return len(self.basis)


def generator_to_section(g: Generator) -> Dict[str, str]:
    """Coordinates as ``xi.<var>`` / ``eta.<var>`` keys of a scenario section."""
    out = {f"xi.{k}": to_text(v) for k, v in g.xi.items()}
    out.update({f"eta.{k}": to_text(v) for k, v in g.eta.items()})
    return out


def generator_from_section(label: str, section: Mapping[str, str], scope: Sequence[str] = ()) -> Generator:
    xi: Dict[str, str] = {}
    eta: Dict[str, str] = {}
    for key, value in section.items():
        kind, _, var = key.partition(".")
        if kind == "xi" and var:
            xi[var] = value
        elif kind == "eta" and var:
            eta[var] = value
        else:
            raise ValueError(f"generator {label!r}: key {key!r} is neither xi.<var> nor eta.<var>")
    return Generator.from_strings(xi, eta, label=label, scope=scope)
