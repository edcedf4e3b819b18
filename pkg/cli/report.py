"""
Check records and the machine-readable run report.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckRecord:
    """
    Outcome of one check.

    Attributes:
        name: Dotted check name, e.g. "invariance.X1"
        kind: "symbolic" or "numeric"
        residual: Residual magnitude (inf when the check raised)
        tolerance: Largest accepted residual
        runtime_ms: Wall time of the check
        detail: Free-form note (derived coordinates, error messages)
    """

    name: str
    kind: str
    residual: float
    tolerance: float
    runtime_ms: float = 0.0
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(math.isfinite(self.residual) and self.residual <= self.tolerance)

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["residual"] = self.residual if math.isfinite(self.residual) else None
        out["passed"] = self.passed
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CheckRecord":
        residual = data.get("residual")
        return cls(
            name=data["name"],
            kind=data["kind"],
            residual=math.inf if residual is None else float(residual),
            tolerance=float(data["tolerance"]),
            runtime_ms=float(data.get("runtime_ms", 0.0)),
            detail=data.get("detail", ""),
        )


@dataclass
class RunReport:
    """All records of one verify run, in submission order."""

    scenario: str
    suite: str = "all"
    records: List[CheckRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def failures(self) -> List[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario,
            "suite": self.suite,
            "passed": self.passed,
            "records": [r.to_dict() for r in self.records],
        }

    def to_frame(self) -> pd.DataFrame:
        columns = ["name", "kind", "residual", "tolerance", "passed", "runtime_ms", "detail"]
        return pd.DataFrame([r.to_dict() for r in self.records], columns=columns)

    def save(self, path: str) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")
        logger.debug("report with %d record(s) written to %s", len(self.records), target)
        return target

    @classmethod
    def load(cls, path: str) -> "RunReport":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            scenario=data["scenario"],
            suite=data.get("suite", "all"),
            records=[CheckRecord.from_dict(r) for r in data.get("records", [])],
        )

    def summary(self, width: Optional[int] = 60) -> str:
        lines = ["=" * width, f"Scenario: {self.scenario} (suite: {self.suite})", "=" * width]
        for r in self.records:
            flag = "[PASS]" if r.passed else "[FAIL]"
            lines.append(f"{flag} {r.name:<36} {r.residual:10.3g} <= {r.tolerance:.1g}  ({r.runtime_ms:.0f} ms)")
            if r.detail:
                lines.append(f"       {r.detail}")
        lines.append("-" * width)
        lines.append(f"{len(self.records) - len(self.failures)}/{len(self.records)} checks passed")
        return "\n".join(lines)
