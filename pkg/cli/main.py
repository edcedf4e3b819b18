"""
Command-line driver.

    python -m cli verify data/scenarios/hopf.scn --suite all
    python -m cli detq data/scenarios/hopf.scn --degree 1 --out basis.ini
    python -m cli figure fig2 data/scenarios/optics.scn --out fig2.csv
    python -m cli report --json report.json

Exit codes: 0 when every check passes, 1 on a failed check or solver failure,
2 on usage, parse or scenario errors.
"""

import argparse
import configparser
import logging
import sys
from pathlib import Path
from typing import List, Optional

from cli.checks import SUITES, build_checks, run_checks
from cli.figures import fig2_table, fig3_table, write_table
from cli.report import RunReport
from numerics.roots import NoSignChangeError, QuadratureError
from scenarios.config import RuntimeSettings, ScenarioError, SingularityError, load_scenario
from symbolic.expr_core import ExprSyntaxError
from symbolic.jet_algebra import configure_frame_depth
from symmetry.generators import generator_to_section
from symmetry.invariance import DeterminingSystemError, determining_system

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _detq_system(sf):
    if sf.kind == "hopf":
        from scenarios.hopf import hopf_system

        return hopf_system()
    if sf.kind == "optics":
        from scenarios.optics import optics_system

        return optics_system(nu=sf.scenario.nu)
    if sf.kind == "model":
        return sf.model
    raise ScenarioError(f"{sf.path}: detq needs a purely differential scenario, got {sf.kind!r}")


def cmd_verify(args, settings: RuntimeSettings) -> int:
    sf = load_scenario(args.scenario)
    checks = build_checks(sf, args.suite)
    print(f"Running {len(checks)} check(s) on {settings.threads} thread(s)...")
    report = RunReport(scenario=args.scenario, suite=args.suite, records=run_checks(checks, settings.threads))
    report.save(settings.report_path)
    if args.json:
        report.save(args.json)
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_detq(args, settings: RuntimeSettings) -> int:
    sf = load_scenario(args.scenario)
    options = sf.detq
    degree = options.degree if args.degree is None else args.degree
    result = determining_system(
        _detq_system(sf),
        degree,
        ansatz=options.ansatz,
        constant=options.constant,
        lift=options.lift,
        parameter_values=options.parameter_values,
    )
    print("=" * 60)
    print(f"Determining system: {len(result.equations)} equation(s), {len(result.unknowns)} unknown(s)")
    print("=" * 60)
    for g in result.family:
        print(f"  {g.label}: {g}")
    print(f"dimension {result.dimension}")

    if args.out:
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        for g in result.family:
            parser[f"generator.{g.label}"] = generator_to_section(g)
        target = Path(args.out)
        target.parent.mkdir(parents=True, exist_ok=True)
        with target.open("w", encoding="utf-8") as handle:
            parser.write(handle)
        print(f"  → basis written to {target}")

    if options.expected_dim is not None and args.degree in (None, options.degree):
        if result.dimension != options.expected_dim:
            print(f"[FAIL] expected dimension {options.expected_dim}, found {result.dimension}")
            return EXIT_FAILED
        print("[PASS] dimension matches the scenario")
    return EXIT_OK


def cmd_figure(args, settings: RuntimeSettings) -> int:
    sf = load_scenario(args.scenario)
    if args.figure == "fig2":
        if sf.kind != "optics":
            raise ScenarioError(f"fig2 needs an optics scenario, got {sf.kind!r}")
        frame = fig2_table(alpha=sf.scenario.alpha)
    else:
        if sf.kind != "plasma":
            raise ScenarioError(f"fig3 needs a plasma scenario, got {sf.kind!r}")
        frame = fig3_table(sf.scenario)
    target = write_table(frame, args.out or f"{args.figure}.csv")
    print(f"[PASS] {args.figure}: {len(frame)} rows written to {target}")
    return EXIT_OK


def cmd_report(args, settings: RuntimeSettings) -> int:
    source = args.from_path or settings.report_path
    if not Path(source).exists():
        print(f"[ERROR] no report at {source}; run verify first")
        return EXIT_USAGE
    report = RunReport.load(source)
    if args.json:
        report.save(args.json)
    print(report.summary())
    return EXIT_OK if report.passed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rgsym", description="Renormgroup symmetry toolkit")
    parser.add_argument("--verbose", "-v", action="store_true", help="Log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", help="Run the verification battery of a scenario")
    verify.add_argument("scenario", help="Scenario file")
    verify.add_argument("--suite", choices=SUITES, default="all")
    verify.add_argument("--json", help="Also write the report here")
    verify.set_defaults(handler=cmd_verify)

    detq = commands.add_parser("detq", help="Solve the determining equations")
    detq.add_argument("scenario", help="Scenario file")
    detq.add_argument("--degree", type=int, help="Override the ansatz degree of [detq]")
    detq.add_argument("--out", help="Write the basis as [generator.*] sections")
    detq.set_defaults(handler=cmd_detq)

    figure = commands.add_parser("figure", help="Write a figure table as CSV")
    figure.add_argument("figure", choices=("fig2", "fig3"))
    figure.add_argument("scenario", help="Scenario file")
    figure.add_argument("--out", help="CSV path (default <figure>.csv)")
    figure.set_defaults(handler=cmd_figure)

    report = commands.add_parser("report", help="Print the last verify report")
    report.add_argument("--json", help="Write the report here")
    report.add_argument("--from", dest="from_path", help="Report to read (default RGSYM_REPORT_PATH)")
    report.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = RuntimeSettings.from_env()
    configure_frame_depth(settings.frame_depth)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else settings.log_level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args, settings)
    except (ScenarioError, ExprSyntaxError, DeterminingSystemError) as exc:
        print(f"[ERROR] {exc}")
        return EXIT_USAGE
    except (SingularityError, NoSignChangeError, QuadratureError, RuntimeError) as exc:
        logger.debug("command failed", exc_info=True)
        print(f"[ERROR] {type(exc).__name__}: {exc}")
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
