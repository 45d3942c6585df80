import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TypedDict

import pandas as pd
import xxhash

from .. import ARTIFACT_VERSION
from .run_config import RunConfig, RunConfigJson

logger = logging.getLogger(__name__)

# 17 significant digits round-trip every double
FLOAT_FORMAT = "%.17g"


class TaskRecordJson(TypedDict):
    """JSON representation of one task outcome."""

    task: str
    max_residual: float | None
    tolerance: float
    passed: bool
    worst_point: list[float] | None
    error: str | None


class ProvenanceJson(TypedDict):
    """Where a report came from."""

    config: RunConfigJson
    version: str
    checksums: dict[str, str]


class VerificationReportJson(TypedDict):
    """JSON representation of a verification report."""

    tasks: list[TaskRecordJson]
    passed: bool
    provenance: ProvenanceJson


@dataclass(frozen=True)
class TaskRecord:
    """The outcome of one verification task."""

    name: str
    max_residual: float
    tolerance: float
    worst_point: tuple[float, float] | None = None
    error: str | None = None

    @property
    def passed(self) -> bool:
        """A task passes iff it raised nothing and its residual is within tolerance."""
        return self.error is None and math.isfinite(self.max_residual) and self.max_residual <= self.tolerance

    @staticmethod
    def failure(name: str, tolerance: float, error: Exception) -> "TaskRecord":
        """Record a task that raised instead of producing a residual."""
        point = getattr(error, "point", getattr(error, "base_point", None))
        return TaskRecord(name, math.inf, tolerance, point, f"{type(error).__name__}: {error}")

    def to_dict(self) -> TaskRecordJson:
        """
        Convert the record into a Python dictionary.

        Returns:
            TaskRecordJson: The record encoded in a dict.
        """
        return {
            "task": self.name,
            "max_residual": self.max_residual if math.isfinite(self.max_residual) else None,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "worst_point": list(self.worst_point) if self.worst_point is not None else None,
            "error": self.error,
        }


@dataclass
class VerificationReport:
    """Per-task records of a run together with its provenance."""

    config: RunConfig
    records: list[TaskRecord] = field(default_factory=list)
    checksums: dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        """Whether every requested task passed."""
        return all(record.passed for record in self.records)

    def add(self, record: TaskRecord) -> None:
        """Append a record and log its outcome."""
        self.records.append(record)
        if record.passed:
            logger.info(
                "Task %s passed (max residual %.3e <= %.1e)", record.name, record.max_residual, record.tolerance
            )
        else:
            logger.warning("Task %s failed: residual %s, error %s", record.name, record.max_residual, record.error)

    def to_dict(self) -> VerificationReportJson:
        """
        Convert the report into a Python dictionary.

        Returns:
            VerificationReportJson: The report encoded in a dict.
        """
        return {
            "tasks": [record.to_dict() for record in self.records],
            "passed": self.passed,
            "provenance": {
                "config": self.config.to_dict(),
                "version": ARTIFACT_VERSION,
                "checksums": dict(sorted(self.checksums.items())),
            },
        }

    def to_json(self) -> str:
        """
        Serialize the report into a JSON string.

        Returns:
            str: The report encoded in a JSON string.
        """
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        """Render the report as an aligned plain-text table."""
        lines = [f"ncqm_brackets {ARTIFACT_VERSION} verification report", ""]
        width = max((len(record.name) for record in self.records), default=4)
        for record in self.records:
            status = "PASS" if record.passed else "FAIL"
            residual = f"{record.max_residual:.3e}" if math.isfinite(record.max_residual) else "n/a"
            line = f"{record.name:<{width}}  {status}  max residual {residual}  tolerance {record.tolerance:.1e}"
            if record.worst_point is not None:
                line += f"  at ({record.worst_point[0]:.6g}, {record.worst_point[1]:.6g})"
            lines.append(line)
            if record.error is not None:
                lines.append(f"{'':<{width}}  error: {record.error}")
        lines += ["", f"overall: {'PASS' if self.passed else 'FAIL'}"]
        for name, digest in sorted(self.checksums.items()):
            lines.append(f"xxh64 {name} {digest}")
        return "\n".join(lines) + "\n"

    def write(self, output_dir: Path) -> None:
        """Write report.json and report.txt."""
        (output_dir / "report.json").write_text(self.to_json(), encoding="utf-8")
        (output_dir / "report.txt").write_text(self.to_text(), encoding="utf-8")


def write_table(frame: pd.DataFrame, path: Path) -> str:
    """
    Write a table as CSV with 17 significant digits.

    Args:
        frame (pd.DataFrame): The table.
        path (Path): The destination file.

    Returns:
        str: The xxHash64 hex digest of the written bytes.
    """
    text = frame.to_csv(float_format=FLOAT_FORMAT, index=False, lineterminator="\n")
    data = text.encode("utf-8")
    path.write_bytes(data)
    digest = xxhash.xxh64(data).hexdigest()
    logger.info("Wrote %s (%d rows, xxh64 %s)", path.name, len(frame), digest)
    return digest
