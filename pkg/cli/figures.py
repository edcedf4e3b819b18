"""
Figure tables: beam-axis curves and the plasma density profiles.
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from scenarios.optics import OpticsScenario, optics_axis_closed_form
from scenarios.plasma import PlasmaScenario, solve_potential

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


def fig2_table(alpha: float = 0.1, rows: int = 200, end: float = 0.995) -> pd.DataFrame:
    """
    Axis intensity and eikonal slope of the parabolic (cylindrical) and soliton (plane)
    beams against z / z_sing, each normalized by its own singularity coordinate.
    """
    parabolic = OpticsScenario(alpha=alpha, nu=1, profile="parabolic", name="parabolic")
    soliton = OpticsScenario(alpha=alpha, nu=0, profile="soliton", name="soliton")
    fractions = np.linspace(0.0, end, rows)
    table = {"z_over_zsing": fractions}
    for label, s in (("parabolic", parabolic), ("soliton", soliton)):
        values = [optics_axis_closed_form(s, f * s.z_sing) for f in fractions]
        table[f"I0_{label}"] = [v[0] for v in values]
        table[f"W0_{label}"] = [v[1] for v in values]
    frame = pd.DataFrame(table)
    return frame[["z_over_zsing", "I0_parabolic", "W0_parabolic", "I0_soliton", "W0_soliton"]]


def fig3_table(s: PlasmaScenario) -> pd.DataFrame:
    """Densities at t = 0 against chi^2, normalized by the cold electron density n_c0."""
    chi2 = np.linspace(0.0, s.chi2_max, s.chi2_points)
    records = []
    for value in chi2:
        solution = solve_potential(s, float(np.sqrt(value)))
        row = {"chi_squared": value}
        for q in s.species:
            row[f"N_{q.name}"] = q.n0 / s.n_c0 * solution.densities[q.name]
        row["n_cold_electron"] = solution.densities["cold"]
        row["n_hot_electron"] = s.n_h0 / s.n_c0 * solution.densities["hot"]
        records.append(row)
    return pd.DataFrame.from_records(records)


def write_table(frame: pd.DataFrame, path: str) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(target, index=False, float_format=FLOAT_FORMAT)
    logger.debug("wrote %d row(s) to %s", len(frame), target)
    return target
