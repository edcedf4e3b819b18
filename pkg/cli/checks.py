"""
Verification batteries.

Each scenario kind contributes a list of named checks. A check returns a residual
magnitude (and optionally a detail string) and passes when the residual is within its
tolerance. Checks run on a thread pool; records come back in submission order.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple, Union

import numpy as np

from cli.report import CheckRecord
from scenarios.config import NumericsSettings, ScenarioFile
from symbolic.expr_core import evaluate, is_symbolic_zero, numeric_residual, to_text
from symmetry.flows import flow
from symmetry.generators import Generator
from symmetry.invariance import check_invariance, determining_system, verify_invariant

logger = logging.getLogger(__name__)

Outcome = Union[float, Tuple[float, str]]

SUITES = ("symbolic", "numeric", "all")


@dataclass(frozen=True)
class Check:
    """
    A named verification.

    Attributes:
        name: Dotted name, e.g. "invariance.X1"
        kind: "symbolic" or "numeric"
        tolerance: Largest accepted residual
        run: Zero-argument callable returning the residual or (residual, detail)
    """

    name: str
    kind: str
    tolerance: float
    run: Callable[[], Outcome]


def _execute(check: Check) -> CheckRecord:
    start = time.perf_counter()
    try:
        outcome = check.run()
        residual, detail = outcome if isinstance(outcome, tuple) else (outcome, "")
        residual = float(residual)
        if math.isnan(residual):
            residual = math.inf
    except Exception as exc:
        logger.debug("check %s raised", check.name, exc_info=True)
        residual, detail = math.inf, f"{type(exc).__name__}: {exc}"
    elapsed = (time.perf_counter() - start) * 1000.0
    record = CheckRecord(check.name, check.kind, residual, check.tolerance, elapsed, detail)
    logger.info("%s %s: residual %.3g (tol %.1g)", "PASS" if record.passed else "FAIL", check.name, residual, check.tolerance)
    return record


def run_checks(checks: Sequence[Check], threads: int = 1) -> List[CheckRecord]:
    """Run ``checks`` on ``threads`` workers; the result keeps the input order."""
    if threads <= 1 or len(checks) <= 1:
        return [_execute(c) for c in checks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_execute, checks))


# ---------------------------------------------------------------------------
# Residual helpers
# ---------------------------------------------------------------------------


def _invariance(sys, g: Generator, form: str = "point") -> Outcome:
    result = check_invariance(sys, g, form=form)
    if result.status == "symbolic":
        return 0.0, "symbolic zero"
    residual = result.numeric_max if result.status == "numeric-only" else max(result.numeric_max, 1.0)
    return residual, result.status


def _zero(expr) -> Outcome:
    if is_symbolic_zero(expr):
        return 0.0, "symbolic zero"
    return numeric_residual(expr), f"residual {to_text(expr)}"


def _same_generator(actual: Generator, expected: Generator) -> Outcome:
    if actual.equivalent(expected):
        return 0.0, str(actual)
    return 1.0, f"got {actual}, expected {expected}"


def _detq(sys, settings) -> Outcome:
    result = determining_system(
        sys,
        settings.degree,
        ansatz=settings.ansatz,
        constant=settings.constant,
        lift=settings.lift,
        parameter_values=settings.parameter_values,
    )
    detail = f"dimension {result.dimension}"
    if settings.expected_dim is None:
        return 0.0, detail
    return float(abs(result.dimension - settings.expected_dim)), f"{detail}, expected {settings.expected_dim}"


def _declared_checks(sf: ScenarioFile, sys) -> List[Check]:
    return [
        Check(f"invariance.{label}", "symbolic", 1e-10, lambda g=g: _invariance(sys, g))
        for label, g in sf.generators.items()
    ]


def _group_law(g: Generator, point: Dict[str, float], a: float, b: float, numerics: NumericsSettings) -> float:
    tolerances = {"rtol": numerics.rtol, "atol": numerics.atol}
    once = flow(g, point, a + b, **tolerances)
    twice = flow(g, flow(g, point, a, **tolerances), b, **tolerances)
    return max(abs(once[k] - twice[k]) for k in once)


# ---------------------------------------------------------------------------
# Hopf
# ---------------------------------------------------------------------------


def hopf_checks(sf: ScenarioFile) -> List[Check]:
    from numerics.characteristics import hopf_axis_slope, hopf_characteristics, hopf_singularity
    from scenarios.hopf import (
        AXIS_SLOPE,
        Z,
        hopf_axis_closed_form,
        hopf_axis_generator,
        hopf_axis_invariants,
        hopf_axis_solution,
        hopf_boundary,
        hopf_exact,
        hopf_generators,
        hopf_instantiated_family,
        hopf_rg_generators,
        hopf_rg_transformation,
        hopf_system,
    )
    from symmetry.restriction import restrict_on_solution

    s = sf.scenario
    sys = hopf_system()
    numerics = sf.numerics
    odd = abs(float(s.value(0.0))) <= 1e-12
    z_global = s.singularity()
    z_top = 0.9 * z_global if math.isfinite(z_global) else 10.0
    zs = np.linspace(0.0, z_top, 10)

    def detq_span() -> Outcome:
        family = determining_system(
            sys, sf.detq.degree, sf.detq.ansatz, sf.detq.constant, sf.detq.lift, sf.detq.parameter_values
        ).family
        missing = [label for label, g in hopf_generators().items() if family.express(g) is None]
        return float(len(missing)), f"not spanned: {missing}" if missing else "X1..X4 spanned"

    def restriction() -> Outcome:
        restricted = restrict_on_solution(hopf_instantiated_family(s), sys, hopf_boundary(s))
        missing = [label for label, g in hopf_rg_generators(s).items() if restricted.express(g) is None]
        detail = f"restricted dimension {restricted.dimension}"
        return float(len(missing)), f"{detail}; missing {missing}" if missing else detail

    def axis_generator() -> Outcome:
        ux0 = AXIS_SLOPE.symbol
        expected = Generator({"eps": 1}, {"ux0": -Z * ux0**2}, label="R4")
        return _same_generator(hopf_axis_generator(s), expected)

    def characteristics() -> float:
        lo, hi = s.x_range
        xs = np.linspace(max(0.5 * lo, -2.0), min(0.5 * hi, 2.0), 9)
        worst = 0.0
        for z in zs:
            numeric = hopf_characteristics(s, z, xs, xtol=numerics.root_xtol)
            exact = np.array([hopf_exact(s, z, x) for x in xs])
            worst = max(worst, float(np.max(np.abs(numeric - exact))))
        return worst

    def axis_slope() -> float:
        return max(abs(hopf_axis_slope(s, z) - hopf_axis_closed_form(s, z)) for z in zs)

    def singularity() -> Outcome:
        expected = s.singularity(0.0)
        found = hopf_singularity(s, x0=0.0)
        if math.isinf(expected) and math.isinf(found):
            return 0.0, "no singularity"
        return abs(found - expected) / expected, f"z*={found:.12g}"

    def axis_solution() -> float:
        solution = hopf_axis_solution(s)
        return max(
            abs(solution({"z": z, "eps": s.eps})["ux0"] - hopf_axis_closed_form(s, z)) for z in zs[1:]
        )

    def group_law() -> float:
        rng = np.random.default_rng(11)
        r3 = hopf_rg_generators(s)["R3"]
        admitted = [hopf_generators()[label] for label in ("X1", "X3", "X4")]
        worst = 0.0
        for _ in range(numerics.samples):
            z, x, eps, u = rng.uniform(0.1, 1.0, size=4)
            point = {"z": z, "x": x, "eps": eps, "u": u}
            a, b = rng.uniform(-0.5, 0.5, size=2)
            for g in [r3] + admitted:
                worst = max(worst, _group_law(g, point, a, b, numerics))
            closed = hopf_rg_transformation(point, a)
            moved = flow(r3, point, a, rtol=numerics.rtol, atol=numerics.atol)
            worst = max(worst, max(abs(moved[k] - closed[k]) for k in closed))
        return worst

    checks = [
        Check(f"invariance.{label}", "symbolic", 1e-10, lambda g=g: _invariance(sys, g))
        for label, g in hopf_generators().items()
    ]
    checks += [
        Check("detq.dimension", "symbolic", 0.0, lambda: _detq(sys, sf.detq)),
        Check("restriction.R1_R3", "symbolic", 0.0, restriction),
    ]
    if sf.detq.lift:
        checks.insert(-1, Check("detq.span", "symbolic", 0.0, detq_span))
    if odd:
        checks += [
            Check("axis.R4", "symbolic", 0.0, axis_generator),
            Check("invariant.J0", "symbolic", 1e-10, lambda: _zero(verify_invariant(hopf_axis_generator(s), hopf_axis_invariants()[1]))),
        ]
    checks += _declared_checks(sf, sys)
    checks.append(Check("characteristics.exact", "numeric", 1e-8, characteristics))
    if odd:
        checks += [
            Check("characteristics.axis_slope", "numeric", 1e-6, axis_slope),
            Check("singularity.axis", "numeric", 1e-6, singularity),
            Check("axis.invariant_solution", "numeric", 1e-8, axis_solution),
        ]
    checks.append(Check("flow.group_law", "numeric", 1e-8, group_law))
    return checks


# ---------------------------------------------------------------------------
# Optics
# ---------------------------------------------------------------------------


def optics_checks(sf: ScenarioFile) -> List[Check]:
    from numerics.optics_grid import grid_convergence, optics_grid_solve
    from numerics.soliton import soliton_axis_ode
    from scenarios.optics import (
        axis_invariants,
        optics_axis_closed_form,
        optics_axis_generator,
        optics_axis_solution,
        optics_system,
        parabolic_generator,
        soliton_axis_jets,
        soliton_kappa_intensity,
    )

    s = sf.scenario
    parabolic = s.profile == "parabolic"
    closed = (parabolic and s.nu == 1) or (not parabolic and s.nu == 0)
    z_end = min(s.z_fraction, 0.9) * s.z_sing if s.alpha > 0 else 1.0
    numerics = sf.numerics
    nodes = numerics.grid_nodes or None

    def kappa_intensity() -> Outcome:
        return _zero(optics_axis_generator(s).eta["I0"] - soliton_kappa_intensity())

    def kappa_eikonal() -> float:
        eta = optics_axis_generator(s).eta["W0"]
        return max(abs(evaluate(eta, soliton_axis_jets(s.alpha, i))) for i in (1.2, 1.5, 1.8))

    def grid_axis() -> Outcome:
        history = optics_grid_solve(s, z_end, nodes=nodes, z_eval=[z_end], estimate_error=True)
        exact, _ = optics_axis_closed_form(s, z_end)
        error = abs(history.I0[-1] - exact) / exact
        return error, f"I0={history.I0[-1]:.12g}, coarse-grid difference {history.error_estimate[-1]:.3g}"

    def grid_order() -> Outcome:
        study = grid_convergence(s, z_end, optics_axis_closed_form(s, z_end)[0])
        outside = max(max(1.5 - p, p - 2.5) for p in study.orders)
        detail = f"nodes {study.nodes}, errors {study.errors}, orders {study.orders}"
        return max(0.0, outside, study.errors[-1] - 1e-3), detail

    def axis_solution() -> float:
        solution = optics_axis_solution(s)
        worst = 0.0
        for z in np.linspace(0.0, z_end, 8)[1:]:
            values = solution({"z": z})
            i0, w0 = optics_axis_closed_form(s, z)
            worst = max(worst, abs(values["I0"] - i0) / i0, abs(values["W0"] - w0) / (1.0 + abs(w0)))
        return worst

    def group_law() -> float:
        rng = np.random.default_rng(13)
        g = parabolic_generator(s.alpha)
        worst = 0.0
        for _ in range(numerics.samples):
            z, x, v, i = rng.uniform(0.05, 0.4, size=4)
            a, b = rng.uniform(-0.2, 0.2, size=2)
            worst = max(worst, _group_law(g, {"z": z, "x": x, "v": v, "I": i}, a, b, numerics))
        return worst

    checks: List[Check] = []
    if parabolic:
        if s.nu == 1:
            checks.append(Check("invariance.R_par", "symbolic", 1e-10, lambda: _invariance(optics_system(nu=1), parabolic_generator())))
        for label, J in zip(("J1", "J2"), axis_invariants()):
            checks.append(Check(f"invariant.{label}", "symbolic", 1e-10, lambda J=J: _zero(verify_invariant(optics_axis_generator(s), J))))
    elif s.nu == 0:
        checks.append(Check("axis.kappa_I0", "symbolic", 1e-10, kappa_intensity))
    checks += _declared_checks(sf, optics_system(nu=s.nu))
    if not parabolic and s.nu == 0 and s.alpha > 0:
        checks.append(Check("axis.kappa_W0_on_solution", "numeric", 1e-8, kappa_eikonal))
    if closed:
        checks.append(Check("grid.axis_intensity", "numeric", 1e-3, grid_axis))
        if s.alpha > 0:
            checks.append(Check("grid.convergence_order", "numeric", 0.0, grid_order))
    if not parabolic and s.nu == 0 and s.alpha > 0:
        axis = {}

        def solved():
            if "run" not in axis:
                axis["run"] = soliton_axis_ode(s, rtol=numerics.rtol, atol=numerics.atol)
            return axis["run"]

        checks += [
            Check("soliton_ode.implicit_residual", "numeric", 1e-7,
                  lambda: float(np.max(np.abs(solved().implicit_residual(np.linspace(0.0, 0.9 * s.z_sing, numerics.samples)))))),
            Check("soliton_ode.blowup_location", "numeric", 1e-3,
                  lambda: (abs(solved().z_blowup - s.z_sing) / s.z_sing, f"z={solved().z_blowup:.10g}")),
            Check("soliton_ode.blowup_intensity", "numeric", 1e-3,
                  lambda: (abs(solved().I_blowup - 2.0), f"I0={solved().I_blowup:.10g}")),
        ]
    if parabolic and s.nu == 1:
        checks += [
            Check("axis.invariant_solution", "numeric", 1e-8, axis_solution),
            Check("flow.group_law", "numeric", 1e-8, group_law),
        ]
    return checks


# ---------------------------------------------------------------------------
# Plasma
# ---------------------------------------------------------------------------

PLASMA_POINTS = ((0.0, 0.3), (0.5, 0.7), (2.0, 1.5))


def plasma_checks(sf: ScenarioFile) -> List[Check]:
    from scenarios.plasma import (
        DENSITY,
        E_FIELD,
        OMEGA,
        T,
        X,
        density_generator,
        density_invariants,
        derive_field_coordinate,
        distribution_invariants,
        field_coordinate_residual,
        field_from_moments,
        plasma_density,
        plasma_field,
        plasma_spectrum,
        plasma_spectrum_asymptote,
        projective_generator,
        quasineutrality_residuals,
        solve_potential,
        spectrum_energies,
        vlasov_residual,
        vlasov_system,
    )

    s = sf.scenario
    ions = [q.name for q in s.species]
    numerics = sf.numerics

    def field_coordinate() -> Outcome:
        eta = derive_field_coordinate()
        residual, _ = _zero(eta + 3 * OMEGA**2 * T * E_FIELD)
        return residual, f"eta^E = {to_text(eta)}"

    def moment_generator() -> Outcome:
        n = DENSITY.symbol
        expected = Generator({"t": 1 + OMEGA**2 * T**2, "x": OMEGA**2 * T * X}, {n.name: -OMEGA**2 * T * n}, label="R7")
        return _same_generator(density_generator(), expected)

    def potential() -> float:
        chis = np.sqrt(np.linspace(0.0, s.chi2_max, 31))
        return max(abs(solve_potential(s, chi, xtol=numerics.root_xtol).residual) for chi in chis) / s.n_c0

    def closed_vs_quadrature() -> float:
        worst = 0.0
        for name in ions + ["cold"]:
            for t, x in PLASMA_POINTS:
                closed = plasma_density(s, name, t, x)
                worst = max(worst, abs(plasma_density(s, name, t, x, "quadrature") - closed) / closed)
        return worst

    def self_similar() -> float:
        worst = 0.0
        for name in ions:
            base = plasma_density(s, name, 0.0, 0.5, "quadrature")
            for t in (1.0 / s.omega, 10.0 / s.omega, 100.0 / s.omega):
                st = s.stretch(t)
                scaled = plasma_density(s, name, t, 0.5 * st, "quadrature") * st
                worst = max(worst, abs(scaled - base) / base)
        return worst

    def moments() -> float:
        return max(max(abs(v) for v in quasineutrality_residuals(s, t, x)) for t, x in PLASMA_POINTS) / s.n_c0

    def vlasov() -> float:
        rng = np.random.default_rng(17)
        worst = 0.0
        names = ions + ["cold"]
        for k in range(1000):
            name = names[k % len(names)]
            c = s.component(name)
            t = rng.uniform(0.0, 3.0) / s.omega
            st = s.stretch(t)
            x = rng.uniform(0.05, 1.5) * st
            width = (c.temperature / c.mass) ** 0.5 / st
            v = s.omega**2 * t * x / st**2 + rng.uniform(-3.0, 3.0) * width
            residual, scale = vlasov_residual(s, name, t + 1e-3, x, v)
            worst = max(worst, abs(residual) / (scale + 1e-300))
        return worst

    def field_moments() -> float:
        worst = 0.0
        for t, x in PLASMA_POINTS:
            exact = plasma_field(s, t, x)
            worst = max(worst, abs(field_from_moments(s, t, x) - exact) / (abs(exact) + 1e-12))
        return worst

    def field_eta() -> float:
        return max(abs(r) / (scale + 1e-300) for r, scale in (field_coordinate_residual(s, t, x) for t, x in PLASMA_POINTS if t > 0))

    def spectrum() -> Outcome:
        worst = {}
        for omega_t in (100.0, 300.0):
            t = omega_t / s.omega
            errors = []
            for name in ions:
                for energy in spectrum_energies(s, name, 100.0):
                    limit = plasma_spectrum_asymptote(s, name, energy)
                    value = plasma_spectrum(s, name, t, energy, epsabs=numerics.quad_epsabs)
                    errors.append(abs(value - limit) / limit)
            worst[omega_t] = max(errors)
        detail = f"worst relative error {worst[100.0]:.3g} at Omega*t=100, {worst[300.0]:.3g} at 300"
        if worst[300.0] >= worst[100.0]:
            return max(worst[300.0], 1.0), f"no convergence: {detail}"
        return worst[300.0], detail

    def group_law() -> float:
        rng = np.random.default_rng(19)
        g = projective_generator(s.omega)
        worst = 0.0
        for _ in range(numerics.samples):
            t, x, v, e = rng.uniform(0.05, 0.5, size=4)
            a, b = rng.uniform(-0.2, 0.2, size=2) / s.omega
            point = {"t": t / s.omega, "x": x, "v": v, "E": e}
            worst = max(worst, _group_law(g, point, a, b, numerics))
        return worst

    J3, J4 = distribution_invariants()
    _, scaled_density = density_invariants()
    checks = [
        Check("invariance.R6", "symbolic", 1e-10, lambda: _invariance(vlasov_system(), projective_generator())),
        Check("coordinate.eta_E", "symbolic", 1e-10, field_coordinate),
        Check("moment.R7", "symbolic", 0.0, moment_generator),
        Check("invariant.J3", "symbolic", 1e-10, lambda: _zero(verify_invariant(projective_generator(), J3))),
        Check("invariant.J4", "symbolic", 1e-10, lambda: _zero(verify_invariant(projective_generator(), J4))),
        Check("invariant.n_scaled", "symbolic", 1e-10, lambda: _zero(verify_invariant(density_generator(), scaled_density))),
    ]
    checks += _declared_checks(sf, vlasov_system())
    checks += [
        Check("vlasov.residual", "numeric", 1e-6, vlasov),
        Check("potential.quasineutrality", "numeric", 1e-10, potential),
        Check("potential.axis_root", "numeric", 1e-12, lambda: abs(solve_potential(s, 0.0, xtol=numerics.root_xtol).script_e)),
        Check("density.closed_vs_quadrature", "numeric", 1e-8, closed_vs_quadrature),
        Check("density.self_similar", "numeric", 1e-8, self_similar),
        Check("moments.charge_current", "numeric", 1e-9, moments),
        Check("field.moments", "numeric", 1e-5, field_moments),
        Check("field.eta_E", "numeric", 1e-6, field_eta),
        Check("spectrum.asymptote", "numeric", 2e-2, spectrum),
        Check("flow.group_law", "numeric", 1e-8, group_law),
    ]
    return checks


# ---------------------------------------------------------------------------
# Declared model
# ---------------------------------------------------------------------------


def model_checks(sf: ScenarioFile) -> List[Check]:
    if sf.model is None:
        return []
    checks = [Check("detq.dimension", "symbolic", 0.0, lambda: _detq(sf.model, sf.detq))]
    checks += _declared_checks(sf, sf.model)
    return checks


BATTERIES = {
    "hopf": hopf_checks,
    "optics": optics_checks,
    "plasma": plasma_checks,
    "model": model_checks,
}


def build_checks(sf: ScenarioFile, suite: str = "all") -> List[Check]:
    """Checks for the scenario kind, filtered by suite, with tolerance overrides applied."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}, expected one of {SUITES}")
    checks = BATTERIES[sf.kind](sf)
    if suite != "all":
        checks = [c for c in checks if c.kind == suite]
    out = []
    for c in checks:
        if c.name in sf.tolerances:
            c = Check(c.name, c.kind, sf.tolerances[c.name], c.run)
        out.append(c)
    logger.debug("%d %s check(s) for %s", len(out), suite, sf.path)
    return out
