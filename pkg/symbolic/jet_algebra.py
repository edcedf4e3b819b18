"""
Total differentiation and frame reduction for model systems.

A ModelSystem stores its equations solved for one leading derivative each
(u_z = -eps*u*u_x for Hopf). The frame is the set of those solved forms together
with all their total derivatives; frame_reduce eliminates every jet variable that
is a derivative of a leading one.
"""

import logging
import threading
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import sympy as sp

from symbolic.expr_core import (
    JetVar,
    as_symbol,
    jet_parts,
    parse,
    register_dependent,
    simplify,
)

logger = logging.getLogger(__name__)


class FrameError(RuntimeError):
    """Frame reduction did not terminate within the configured depth."""


@dataclass(frozen=True)
class LinearFunctional:
    """
    A linear solution functional.

    kind == "point": the derivative ``target_{derivs}`` evaluated at ``point``
    (e.g. u_x at x = 0). kind == "moment": ``sum_s w_s * integral(weight * s d variable)``
    over the dependents listed in ``species``.
    """

    kind: str
    name: str
    target: str = ""
    derivs: Tuple[str, ...] = ()
    point: Tuple[Tuple[str, Any], ...] = ()
    variable: str = ""
    weight: Any = sp.Integer(1)
    species: Tuple[Tuple[str, Any], ...] = ()

    def __post_init__(self):
        if self.kind not in ("point", "moment"):
            raise ValueError(f"unknown functional kind {self.kind!r}")
        if self.kind == "point" and not (self.target and self.point):
            raise ValueError(f"point functional {self.name!r} needs a target and a point")
        if self.kind == "moment" and not (self.variable and self.species):
            raise ValueError(f"moment functional {self.name!r} needs a variable and species")

    @classmethod
    def point_eval(cls, name: str, target: str, derivs: Sequence[str] = (), at: Optional[Mapping[str, Any]] = None):
        at = at or {}
        return cls(
            kind="point",
            name=name,
            target=target,
            derivs=tuple(sorted(derivs)),
            point=tuple((k, sp.sympify(v)) for k, v in at.items()),
        )

    @classmethod
    def moment(cls, name: str, variable: str, weight: Any = 1, species: Optional[Mapping[str, Any]] = None):
        species = species or {}
        return cls(
            kind="moment",
            name=name,
            variable=variable,
            weight=sp.sympify(parse(weight) if isinstance(weight, str) else weight),
            species=tuple((k, sp.sympify(v)) for k, v in species.items()),
        )

    @property
    def symbol(self) -> sp.Symbol:
        return register_dependent(self.name)

    @property
    def point_variables(self) -> Tuple[str, ...]:
        return tuple(k for k, _ in self.point)

    def target_jet(self) -> JetVar:
        return JetVar(self.target, self.derivs)


@dataclass(frozen=True)
class BoundaryCondition:
    """``dependent = profile`` on the surface ``variable = value``."""

    variable: str
    value: Any
    dependent: str
    profile: Any

    def __post_init__(self):
        object.__setattr__(self, "value", sp.sympify(self.value))
        profile = parse(self.profile) if isinstance(self.profile, str) else sp.sympify(self.profile)
        object.__setattr__(self, "profile", profile)


DEFAULT_FRAME_DEPTH = 64
_frame_depth = DEFAULT_FRAME_DEPTH


def configure_frame_depth(depth: int) -> None:
    """Set the substitution bound given to systems built afterwards."""
    global _frame_depth
    if depth < 0:
        raise ValueError(f"frame depth must be >= 0, got {depth}")
    _frame_depth = int(depth)


def _default_depth() -> int:
    return _frame_depth


@dataclass(frozen=True, eq=False)
class ModelSystem:
    """
    A system of differential equations solved for leading derivatives.

    Attributes:
        independents: Independent variables (z, x, t, v, and eps when it is a group variable)
        dependents: Dependent variables (u; I, v; f, E)
        parameters: Constants that are not transformed (alpha, nu, Omega)
        leading: Map leading jet symbol -> solved right-hand side
        equations: Residual forms F = 0; default ``leading - rhs``
        boundary: Boundary conditions of the Cauchy problem
        nonlocal_constraints: (functional, required value) pairs
        dependencies: Dependent name -> independents it depends on; default all
        max_depth: Bound on frame substitution rounds
    """

    independents: Tuple[sp.Symbol, ...]
    dependents: Tuple[sp.Symbol, ...]
    leading: Dict[sp.Symbol, sp.Expr]
    parameters: Tuple[sp.Symbol, ...] = ()
    equations: Tuple[sp.Expr, ...] = ()
    boundary: Tuple[BoundaryCondition, ...] = ()
    nonlocal_constraints: Tuple[Tuple[LinearFunctional, sp.Expr], ...] = ()
    dependencies: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    name: str = "model"
    max_depth: int = field(default_factory=_default_depth)
    _rules: Dict[sp.Symbol, Optional[sp.Expr]] = field(default_factory=dict, init=False, repr=False)
    _rules_lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        names = [s.name for s in self.independents + self.dependents + self.parameters]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"{self.name}: names declared twice: {duplicates}")

        for dep in self.dependents:
            register_dependent(dep)
        deps = {d.name: tuple(self.dependencies.get(d.name, [s.name for s in self.independents])) for d in self.dependents}
        object.__setattr__(self, "dependencies", deps)

        for key, rhs in self.leading.items():
            parts = self.jet_of(key)
            if parts is None or parts.order == 0:
                raise ValueError(f"{self.name}: leading key {key} is not a derivative of a dependent")
            if key in sp.sympify(rhs).free_symbols:
                raise ValueError(f"{self.name}: leading form for {key} refers to itself")

        if not self.equations:
            object.__setattr__(self, "equations", tuple(k - v for k, v in self.leading.items()))
        for eq in self.equations:
            if simplify(sp.sympify(eq).xreplace(self.leading)) != 0:
                raise ValueError(f"{self.name}: equation {eq} is not solved by the leading forms")

    @classmethod
    def build(
        cls,
        independents: Iterable[str],
        dependents: Iterable[str],
        leading: Mapping[str, Any],
        parameters: Iterable[str] = (),
        **kwargs,
    ) -> "ModelSystem":
        """Construct from names and expression strings, e.g. ``{"u_z": "-eps*u*u_x"}``."""
        ind = tuple(sp.Symbol(n) for n in independents)
        dep = tuple(register_dependent(n) for n in dependents)
        par = tuple(sp.Symbol(n) for n in parameters)
        scope = [s.name for s in ind]

        def _expr(value: Any) -> sp.Expr:
            return parse(value, scope) if isinstance(value, str) else sp.sympify(value)

        lead = {_expr(k): _expr(v) for k, v in leading.items()}
        if "equations" in kwargs:
            kwargs["equations"] = tuple(_expr(e) for e in kwargs["equations"])
        for key in ("boundary", "nonlocal_constraints"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(independents=ind, dependents=dep, leading=lead, parameters=par, **kwargs)

    # -- scope ---------------------------------------------------------------

    @property
    def scope(self) -> Tuple[str, ...]:
        return tuple(s.name for s in self.independents)

    def parse(self, text: str) -> sp.Expr:
        return parse(text, self.scope)

    def jet_of(self, sym: Any) -> Optional[JetVar]:
        """The JetVar of ``sym`` if it is a jet of one of this system's dependents."""
        parts = jet_parts(sym)
        if parts is None or parts.base not in {d.name for d in self.dependents}:
            return None
        return parts

    def depends_on(self, base: str, variable: Union[str, sp.Symbol]) -> bool:
        var = variable if isinstance(variable, str) else variable.name
        return var in self.dependencies.get(base, ())

    def jets_in(self, e: Any) -> Dict[sp.Symbol, JetVar]:
        return {s: p for s in sp.sympify(e).free_symbols if (p := self.jet_of(s)) is not None}

    def is_leading(self, sym: sp.Symbol) -> bool:
        return self._rule(sym) is not None

    # -- calculus ------------------------------------------------------------

    def total_derivative(self, e: Any, i: Union[str, sp.Symbol]) -> sp.Expr:
        """D_i e = de/di + sum over jets u_J of u_{J,i} * de/du_J."""
        var = as_symbol(i)
        if var not in self.independents:
            raise ValueError(f"{var} is not an independent variable of {self.name}")
        e = sp.sympify(e)
        result = sp.diff(e, var)
        for sym, parts in self.jets_in(e).items():
            if not self.depends_on(parts.base, var):
                continue
            partial = sp.diff(e, sym)
            if partial != 0:
                result += parts.differentiate(var.name).symbol * partial
        return result

    def total_derivative_along(self, e: Any, derivs: Sequence[str]) -> sp.Expr:
        for d in derivs:
            e = self.total_derivative(e, d)
        return e

    def _rule(self, sym: sp.Symbol) -> Optional[sp.Expr]:
        with self._rules_lock:
            if sym in self._rules:
                return self._rules[sym]
        parts = self.jet_of(sym)
        rule = None
        if parts is not None and parts.order > 0:
            for key, rhs in self.leading.items():
                key_parts = jet_parts(key)
                if key_parts.base != parts.base:
                    continue
                extra = parts.without(key_parts.derivs)
                if extra is None:
                    continue
                if any(not self.depends_on(parts.base, d) for d in extra.derivs):
                    rule = sp.Integer(0)
                else:
                    rule = self.total_derivative_along(rhs, extra.derivs)
                break
        with self._rules_lock:
            return self._rules.setdefault(sym, rule)

    def frame_reduce(self, e: Any, simplify_result: bool = True) -> sp.Expr:
        """
        Eliminate every leading jet variable and its derivatives.

        Raises:
            FrameError: substitution rounds exceed ``max_depth``
        """
        e = sp.sympify(e)
        for depth in range(self.max_depth):
            subs = {s: r for s in e.free_symbols if (r := self._rule(s)) is not None}
            if not subs:
                logger.debug("%s: frame reduction finished after %d round(s)", self.name, depth)
                break
            e = e.xreplace(subs)
        else:
            raise FrameError(f"{self.name}: frame reduction exceeded depth {self.max_depth}")
        return simplify(e) if simplify_result else e

    def equation_residuals(self) -> Tuple[sp.Expr, ...]:
        return tuple(self.frame_reduce(eq) for eq in self.equations)
