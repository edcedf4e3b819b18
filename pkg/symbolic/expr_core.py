"""
Symbolic expressions over independent, dependent and jet variables.

Expressions are immutable sympy trees. This module adds:
- a restricted text grammar (parse / to_text) with jet variables u_x, u_xz, Diff(u, x, 2)
- a registry mapping jet symbols to (base, derivative multiset)
- a canonical rational normal form (simplify)
- numeric evaluation with domain diagnostics and random-point zero checks
"""

import keyword
import logging
import math
import re
import threading
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    rationalize,
    standard_transformations,
)
from sympy.printing.str import StrPrinter

logger = logging.getLogger(__name__)

FUNCTIONS: Dict[str, Any] = {
    "exp": sp.exp,
    "log": sp.log,
    "sqrt": sp.sqrt,
    "sin": sp.sin,
    "cos": sp.cos,
    "cosh": sp.cosh,
    "sinh": sp.sinh,
    "tanh": sp.tanh,
    "erf": sp.erf,
}

_TRANSFORMATIONS = standard_transformations + (convert_xor, rationalize)

_TOKEN_RE = re.compile(
    r"""
    (?P<number>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z][A-Za-z0-9]*(?:_[A-Za-z0-9]+)*)
  | (?P<op>[-+*/^(),])
  | (?P<space>\s+)
    """,
    re.VERBOSE,
)

Binding = Union[str, sp.Symbol, "JetVar"]


class ExprSyntaxError(ValueError):
    """Text does not conform to the expression grammar."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnknownFunctionError(ExprSyntaxError):
    """A call to a function outside the supported set."""


class UnboundSymbolError(KeyError):
    """Numeric evaluation requested with free symbols left unbound."""

    def __init__(self, names: Iterable[str]):
        self.names = tuple(sorted(names))
        super().__init__(self.names)

    def __str__(self) -> str:
        return f"unbound symbol(s): {', '.join(self.names)}"


class EvaluationDomainError(ArithmeticError):
    """Numeric evaluation left the domain of an elementary operation."""

    def __init__(self, subexpression: sp.Expr, reason: str):
        self.subexpression = subexpression
        self.reason = reason
        super().__init__(f"{reason} in subexpression {to_text(subexpression)}")


# ---------------------------------------------------------------------------
# Jet variables
# ---------------------------------------------------------------------------

_JETS: Dict[str, "JetVar"] = {}
_JETS_LOCK = threading.Lock()


@dataclass(frozen=True)
class JetVar:
    """A dependent variable with a sorted multiset of derivative directions."""

    base: str
    derivs: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "derivs", tuple(sorted(self.derivs)))

    @property
    def name(self) -> str:
        if not self.derivs:
            return self.base
        if all(len(d) == 1 for d in self.derivs):
            return f"{self.base}_{''.join(self.derivs)}"
        return f"{self.base}_{'_'.join(self.derivs)}"

    @property
    def order(self) -> int:
        return len(self.derivs)

    @property
    def symbol(self) -> sp.Symbol:
        """The sympy symbol standing for this jet variable (registered on first use)."""
        name = self.name
        with _JETS_LOCK:
            known = _JETS.get(name)
            if known != self:
                if known is not None:
                    logger.debug("jet name %s rebound from %s to %s", name, known, self)
                _JETS[name] = self
        return sp.Symbol(name)

    def differentiate(self, *variables: str) -> "JetVar":
        return JetVar(self.base, self.derivs + tuple(variables))

    def count(self, variable: str) -> int:
        return self.derivs.count(variable)

    def without(self, derivs: Sequence[str]) -> Optional["JetVar"]:
        """Remove a sub-multiset of derivatives; None if it is not contained."""
        remaining = list(self.derivs)
        for d in derivs:
            if d not in remaining:
                return None
            remaining.remove(d)
        return JetVar(self.base, tuple(remaining))


def _name(value: Union[str, sp.Symbol]) -> str:
    return value if isinstance(value, str) else value.name


def jet(base: Union[str, sp.Symbol], *derivs: Union[str, sp.Symbol]) -> sp.Symbol:
    """Return the symbol of ``base`` differentiated along ``derivs``.

    ``jet("u", "x", "z")`` and ``jet("u", "z", "x")`` give the same symbol ``u_xz``.
    A base that is itself a jet symbol is extended.
    """
    parts = jet_parts(base) if isinstance(base, sp.Symbol) else None
    if parts is None:
        parts = JetVar(_name(base))
    return parts.differentiate(*(_name(d) for d in derivs)).symbol


def jet_parts(sym: Any) -> Optional[JetVar]:
    """Registry lookup: the JetVar a symbol stands for, or None."""
    if not isinstance(sym, sp.Symbol):
        return None
    return _JETS.get(sym.name)


def register_dependent(name: Union[str, sp.Symbol]) -> sp.Symbol:
    return JetVar(_name(name)).symbol


def _split_suffix(part: str, scope: Sequence[str]) -> List[str]:
    if part in scope:
        return [part]
    names = sorted(scope, key=len, reverse=True)
    out: List[str] = []
    i = 0
    while i < len(part):
        for candidate in names:
            if part.startswith(candidate, i):
                out.append(candidate)
                i += len(candidate)
                break
        else:
            out.append(part[i])
            i += 1
    return out


def _identifier_symbol(name: str, scope: Sequence[str]) -> sp.Symbol:
    if "_" not in name or (name in _JETS and not scope):
        return sp.Symbol(name)
    base, *suffixes = name.split("_")
    derivs: List[str] = []
    for part in suffixes:
        derivs.extend(_split_suffix(part, scope))
    return JetVar(base, tuple(derivs)).symbol


# ---------------------------------------------------------------------------
# Grammar
# ---------------------------------------------------------------------------


def _position(text: str, pos: int) -> Tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    start = text.rfind("\n", 0, pos) + 1
    return line, pos - start + 1


def _scan(text: str) -> List[Tuple[str, int, bool]]:
    """Tokenize ``text``; return (identifier, position, is_call) triples."""
    names: List[Tuple[str, int, bool]] = []
    depth_stack: List[int] = []
    tokens: List[Tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", *_position(text, pos))
        kind = m.lastgroup
        if kind != "space":
            tokens.append((kind, m.group(), pos))
        pos = m.end()

    for idx, (kind, value, start) in enumerate(tokens):
        if kind == "op" and value == "(":
            depth_stack.append(start)
        elif kind == "op" and value == ")":
            if not depth_stack:
                raise ExprSyntaxError("unbalanced ')'", *_position(text, start))
            depth_stack.pop()
        elif kind == "name":
            if keyword.iskeyword(value):
                raise ExprSyntaxError(f"reserved word {value!r}", *_position(text, start))
            nxt = tokens[idx + 1] if idx + 1 < len(tokens) else None
            is_call = nxt is not None and nxt[0] == "op" and nxt[1] == "("
            names.append((value, start, is_call))
    if depth_stack:
        raise ExprSyntaxError("unbalanced '('", *_position(text, depth_stack[-1]))
    if not tokens:
        raise ExprSyntaxError("empty expression", 1, 1)
    return names


def _diff_call(base: Any, *spec: Any) -> sp.Symbol:
    if not isinstance(base, sp.Symbol):
        raise ExprSyntaxError("Diff expects a dependent variable as first argument")
    parts = jet_parts(base) or JetVar(base.name)
    derivs = list(parts.derivs)
    i = 0
    while i < len(spec):
        var = spec[i]
        if not isinstance(var, sp.Symbol):
            raise ExprSyntaxError(f"Diff expects variable names, got {var}")
        count = 1
        if i + 1 < len(spec) and getattr(spec[i + 1], "is_Integer", False):
            count = int(spec[i + 1])
            i += 1
        derivs.extend([var.name] * count)
        i += 1
    return JetVar(parts.base, tuple(derivs)).symbol


def parse(text: str, independents: Optional[Iterable[Union[str, sp.Symbol]]] = None) -> sp.Expr:
    """
    Parse an expression written in the project grammar.

    Args:
        text: Expression text, e.g. ``"u_x^2 + eps*u"`` or ``"cosh(x)^-2"``
        independents: Independent-variable names used to decode jet suffixes
            with multi-letter variables (``u_eps`` -> derivative along ``eps``)

    Returns:
        sympy expression with exact rational numbers
    """
    scope = [_name(s) for s in independents] if independents is not None else []
    names = _scan(text)

    local: Dict[str, Any] = {"Diff": _diff_call}
    for name, start, is_call in names:
        if is_call:
            if name not in FUNCTIONS and name != "Diff":
                raise UnknownFunctionError(f"unknown function {name!r}", *_position(text, start))
            if name in FUNCTIONS:
                local[name] = FUNCTIONS[name]
            continue
        if name in FUNCTIONS or name == "Diff":
            raise ExprSyntaxError(f"function {name!r} used without arguments", *_position(text, start))
        local[name] = _identifier_symbol(name, scope)

    flat = text.replace("\n", " ").replace("\r", " ")
    try:
        compile(flat.replace("^", "&"), "<expr>", "eval")
    except SyntaxError as exc:
        offset = max((exc.offset or 1) - 1, 0)
        raise ExprSyntaxError(f"invalid syntax: {exc.msg}", *_position(text, min(offset, len(text)))) from None

    try:
        result = parse_expr(flat, local_dict=local, transformations=_TRANSFORMATIONS)
    except ExprSyntaxError:
        raise
    except Exception as exc:  # sympy raises assorted errors for bad argument lists
        raise ExprSyntaxError(f"cannot build expression: {exc}") from None
    if not isinstance(result, sp.Expr):
        raise ExprSyntaxError(f"expected a single expression, got {type(result).__name__}")
    return result


class _GrammarPrinter(StrPrinter):
    def _print_Exp1(self, expr):
        return "exp(1)"

    def _print_Pow(self, expr, rational=False):
        return super()._print_Pow(expr, rational).replace("**", "^")


def to_text(e: Any) -> str:
    """Print an expression in the grammar accepted by ``parse``."""
    return _GrammarPrinter().doprint(sp.sympify(e)).replace("**", "^")


# ---------------------------------------------------------------------------
# Algebra
# ---------------------------------------------------------------------------


def as_symbol(key: Binding) -> sp.Symbol:
    if isinstance(key, JetVar):
        return key.symbol
    if isinstance(key, sp.Symbol):
        return key
    if isinstance(key, str):
        return _identifier_symbol(key, [])
    raise TypeError(f"cannot use {key!r} as a symbol")


def simplify(e: Any) -> sp.Expr:
    """Canonical normal form: one quotient of expanded, cancelled polynomials."""
    e = sp.sympify(e)
    try:
        return sp.cancel(sp.together(sp.expand(e)))
    except sp.PolynomialError:
        return sp.expand(e)


def is_symbolic_zero(e: Any) -> bool:
    reduced = simplify(e)
    if reduced == 0:
        return True
    # radicals and transcendental identities fall outside the rational rewrite set
    return sp.simplify(reduced) == 0


def substitute(e: Any, bindings: Mapping[Binding, Any]) -> sp.Expr:
    """Simultaneous substitution followed by ``simplify``."""
    mapping = {as_symbol(k): sp.sympify(v) for k, v in bindings.items()}
    return simplify(sp.sympify(e).xreplace(mapping))


def diff(e: Any, s: Binding) -> sp.Expr:
    """Partial derivative; every other jet variable is a constant."""
    return sp.diff(sp.sympify(e), as_symbol(s))


# ---------------------------------------------------------------------------
# Numerics
# ---------------------------------------------------------------------------


def _values_by_name(bindings: Mapping[Binding, Any]) -> Dict[str, float]:
    return {as_symbol(k).name: float(v) for k, v in bindings.items()}


def _ordered_symbols(e: sp.Expr) -> List[sp.Symbol]:
    return sorted(e.free_symbols, key=lambda s: s.name)


def _evaluate_raw(e: sp.Expr, values: Dict[str, float]) -> Any:
    syms = _ordered_symbols(e)
    fn = sp.lambdify(syms, e, modules="math")
    return fn(*[values[s.name] for s in syms])


def _find_offender(e: sp.Expr, values: Dict[str, float]) -> Tuple[sp.Expr, str]:
    for sub in sp.postorder_traversal(e):
        if sub.is_Atom:
            continue
        try:
            value = _evaluate_raw(sub, values)
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            return sub, str(exc) or type(exc).__name__
        if isinstance(value, complex) or (isinstance(value, float) and not math.isfinite(value)):
            return sub, "non-real value"
    return e, "domain error"


def evaluate(e: Any, bindings: Optional[Mapping[Binding, Any]] = None) -> float:
    """
    Evaluate an expression in double precision.

    Args:
        e: Expression (or text accepted by ``parse``)
        bindings: Values for every free symbol, keyed by symbol, name or JetVar

    Returns:
        Float value

    Raises:
        UnboundSymbolError: a free symbol has no value
        EvaluationDomainError: log of a negative number, division by zero, ...
    """
    e = parse(e) if isinstance(e, str) else sp.sympify(e)
    values = _values_by_name(bindings or {})
    missing = [s.name for s in e.free_symbols if s.name not in values]
    if missing:
        raise UnboundSymbolError(missing)
    try:
        result = _evaluate_raw(e, values)
    except (ValueError, ZeroDivisionError, OverflowError):
        sub, reason = _find_offender(e, values)
        raise EvaluationDomainError(sub, reason) from None
    if isinstance(result, complex):
        sub, reason = _find_offender(e, values)
        raise EvaluationDomainError(sub, reason)
    return float(result)


def lambdify(e: Any, symbols: Sequence[sp.Symbol]):
    """Vectorized numpy/scipy callable of ``e`` over ``symbols``."""
    return sp.lambdify(list(symbols), sp.sympify(e), modules=["numpy", "scipy"])


def numeric_residual(
    e: Any,
    samples: int = 100,
    rng: Optional[np.random.Generator] = None,
    ranges: Optional[Mapping[Binding, Tuple[float, float]]] = None,
    default_range: Tuple[float, float] = (0.3, 1.2),
) -> float:
    """
    Largest scaled magnitude of ``e`` over random points.

    Each point contributes |e| / (1 + sum of |terms|), so cancellation between large
    terms is measured relative to their size. Points where the expression is not
    finite are skipped; NaN is returned if no point survives.
    """
    e = sp.sympify(e)
    syms = _ordered_symbols(e)
    if not syms:
        value = complex(e.evalf())
        return abs(value) / (1.0 + abs(value)) if value != 0 else 0.0
    rng = rng if rng is not None else np.random.default_rng(20240601)
    bounds = {as_symbol(k).name: v for k, v in (ranges or {}).items()}
    columns = []
    for s in syms:
        lo, hi = bounds.get(s.name, default_range)
        columns.append(rng.uniform(lo, hi, size=samples))
    terms = e.args if isinstance(e, sp.Add) else (e,)
    value_fn = lambdify(e, syms)
    scale_fn = lambdify(sp.Add(*[sp.Abs(t) for t in terms]), syms)
    with np.errstate(all="ignore"):
        value = np.broadcast_to(np.asarray(value_fn(*columns), dtype=complex), (samples,))
        scale = np.broadcast_to(np.asarray(scale_fn(*columns), dtype=complex), (samples,))
    ok = np.isfinite(value) & np.isfinite(scale)
    if not ok.any():
        return float("nan")
    rel = np.abs(value[ok]) / (1.0 + np.abs(scale[ok]))
    return float(rel.max())


def numeric_zero(e: Any, tol: float = 1e-10, **kwargs) -> bool:
    residual = numeric_residual(e, **kwargs)
    return bool(np.isfinite(residual) and residual <= tol)
