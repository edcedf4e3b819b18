"""
Scenario files and runtime settings.

A scenario file is an INI file with one problem section ([hopf], [optics], [plasma]
or [model]) plus optional [species.*], [generator.*], [detq], [numerics] and
[tolerances] sections. Runtime settings come from the environment (a .env file is
loaded first).
"""

import configparser
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

PROBLEM_SECTIONS = ("hopf", "optics", "plasma", "model")


class ScenarioError(ValueError):
    """A scenario file or scenario value is invalid."""


class SingularityError(RuntimeError):
    """The requested point lies at or beyond the solution singularity."""


@dataclass(frozen=True)
class RuntimeSettings:
    """Process-wide settings read from the environment."""

    threads: int
    report_path: str
    log_level: str
    frame_depth: int

    @classmethod
    def from_env(cls) -> "RuntimeSettings":
        load_dotenv()
        return cls(
            threads=int(os.getenv("RGSYM_THREADS", str(min(4, os.cpu_count() or 1)))),
            report_path=os.getenv("RGSYM_REPORT_PATH", ".rgsym/last_report.json"),
            log_level=os.getenv("RGSYM_LOG_LEVEL", "WARNING").upper(),
            frame_depth=int(os.getenv("RGSYM_FRAME_DEPTH", "64")),
        )


@dataclass(frozen=True)
class NumericsSettings:
    rtol: float = 1e-10
    atol: float = 1e-10
    root_xtol: float = 1e-14
    quad_epsabs: float = 1e-10
    grid_nodes: int = 0
    samples: int = 50

    def __post_init__(self):
        for name in ("rtol", "atol", "root_xtol", "quad_epsabs"):
            if getattr(self, name) <= 0:
                raise ScenarioError(f"[numerics] {name} must be positive")
        if self.samples < 1:
            raise ScenarioError("[numerics] samples must be >= 1")


@dataclass(frozen=True)
class DetqSettings:
    """Ansatz options for the determining system."""

    degree: int = 1
    ansatz: str = "full"
    constant: Tuple[str, ...] = ()
    lift: bool = False
    expected_dim: Optional[int] = None
    parameter_values: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.degree < 0:
            raise ScenarioError(f"[detq] degree must be >= 0, got {self.degree}")
        if self.ansatz not in ("full", "diagonal"):
            raise ScenarioError(f"[detq] ansatz must be full or diagonal, got {self.ansatz!r}")


@dataclass(frozen=True, eq=False)
class ScenarioFile:
    """
    A loaded scenario.

    Attributes:
        path: Source file
        kind: "hopf", "optics", "plasma" or "model"
        scenario: HopfScenario / OpticsScenario / PlasmaScenario, None for kind "model"
        model: ModelSystem declared in [model], if any
        generators: Generators declared in [generator.*] sections
        detq: Determining-system options
        numerics: Solver tolerances
        tolerances: Per-check tolerance overrides
    """

    path: str
    kind: str
    scenario: Any = None
    model: Any = None
    generators: Dict[str, Any] = field(default_factory=dict)
    detq: DetqSettings = field(default_factory=DetqSettings)
    numerics: NumericsSettings = field(default_factory=NumericsSettings)
    tolerances: Dict[str, float] = field(default_factory=dict)


def _float(section: configparser.SectionProxy, key: str, default: Optional[float] = None) -> float:
    raw = section.get(key)
    if raw is None:
        if default is None:
            raise ScenarioError(f"[{section.name}] missing key {key!r}")
        return default
    try:
        return float(raw)
    except ValueError:
        raise ScenarioError(f"[{section.name}] {key} = {raw!r} is not a number") from None


def _int(section: configparser.SectionProxy, key: str, default: int) -> int:
    raw = section.get(key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError(f"[{section.name}] {key} = {raw!r} is not an integer") from None


def _names(raw: Optional[str]) -> Tuple[str, ...]:
    if not raw:
        return ()
    return tuple(n.strip() for n in raw.replace(",", " ").split() if n.strip())


def _assignments(raw: Optional[str]) -> Dict[str, float]:
    out: Dict[str, float] = {}
    for item in _names(raw):
        name, _, value = item.partition("=")
        if not value:
            raise ScenarioError(f"expected name=value, got {item!r}")
        out[name.strip()] = float(value)
    return out


def read_config(path: str) -> configparser.ConfigParser:
    if not Path(path).exists():
        raise ScenarioError(f"scenario file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ScenarioError(f"{path}: {exc}") from None
    return parser


def _build_model(section: configparser.SectionProxy, parser: configparser.ConfigParser):
    from symbolic.expr_core import ExprSyntaxError
    from symbolic.jet_algebra import ModelSystem

    independents = _names(section.get("independents"))
    dependents = _names(section.get("dependents"))
    if not independents or not dependents:
        raise ScenarioError("[model] needs independents and dependents")
    leading = {k.split(".", 1)[1]: v for k, v in section.items() if k.startswith("equation.")}
    if not leading:
        raise ScenarioError("[model] declares no equation.<leading-jet> entries")
    dependencies = {k.split(".", 1)[1]: _names(v) for k, v in section.items() if k.startswith("depends.")}
    try:
        return ModelSystem.build(
            independents,
            dependents,
            leading,
            parameters=_names(section.get("parameters")),
            dependencies=dependencies,
            name=section.get("name", "model"),
        )
    except (ExprSyntaxError, ValueError) as exc:
        raise ScenarioError(f"[model] {exc}") from None


def load_scenario(path: str) -> ScenarioFile:
    """
    Load and validate a scenario file.

    Raises:
        ScenarioError: missing file, unknown layout or invalid values
    """
    from scenarios.hopf import HopfScenario
    from scenarios.optics import OpticsScenario
    from scenarios.plasma import PlasmaScenario
    from symbolic.expr_core import ExprSyntaxError
    from symmetry.generators import generator_from_section

    parser = read_config(path)
    present = [s for s in PROBLEM_SECTIONS if parser.has_section(s)]
    if len(present) != 1:
        raise ScenarioError(f"{path}: expected exactly one of {PROBLEM_SECTIONS}, found {present or 'none'}")
    kind = present[0]

    model = _build_model(parser["model"], parser) if parser.has_section("model") else None
    if kind == "hopf":
        scenario = HopfScenario.from_section(parser["hopf"])
    elif kind == "optics":
        scenario = OpticsScenario.from_section(parser["optics"])
    elif kind == "plasma":
        species = {name.split(".", 1)[1]: parser[name] for name in parser.sections() if name.startswith("species.")}
        scenario = PlasmaScenario.from_sections(parser["plasma"], species)
    else:
        scenario = None

    scope = [s.name for s in model.independents] if model is not None else ["z", "x", "t", "v", "eps"]
    generators: Dict[str, Any] = {}
    for name in parser.sections():
        if not name.startswith("generator."):
            continue
        label = name.split(".", 1)[1]
        try:
            generators[label] = generator_from_section(label, dict(parser[name]), scope)
        except (ExprSyntaxError, ValueError) as exc:
            raise ScenarioError(f"[{name}] {exc}") from None

    detq = DetqSettings()
    if parser.has_section("detq"):
        sec = parser["detq"]
        expected = sec.get("expected_dim")
        detq = DetqSettings(
            degree=_int(sec, "degree", 1),
            ansatz=sec.get("ansatz", "full"),
            constant=_names(sec.get("constant")),
            lift=sec.getboolean("lift", fallback=False),
            expected_dim=int(expected) if expected else None,
            parameter_values=_assignments(sec.get("parameter_values")),
        )

    numerics = NumericsSettings()
    if parser.has_section("numerics"):
        sec = parser["numerics"]
        numerics = NumericsSettings(
            rtol=_float(sec, "rtol", 1e-10),
            atol=_float(sec, "atol", 1e-10),
            root_xtol=_float(sec, "root_xtol", 1e-14),
            quad_epsabs=_float(sec, "quad_epsabs", 1e-10),
            grid_nodes=_int(sec, "grid_nodes", 0),
            samples=_int(sec, "samples", 50),
        )

    tolerances: Dict[str, float] = {}
    if parser.has_section("tolerances"):
        sec = parser["tolerances"]
        tolerances = {k: _float(sec, k) for k in sec}

    logger.debug("loaded %s scenario from %s (%d generator(s))", kind, path, len(generators))
    return ScenarioFile(
        path=str(path),
        kind=kind,
        scenario=scenario,
        model=model,
        generators=generators,
        detq=detq,
        numerics=numerics,
        tolerances=tolerances,
    )
