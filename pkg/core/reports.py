import json
import os
import tempfile
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import pandas as pd

from config.settings import ARTIFACT_VERSION, PRNG_NAME, REPORT_SCHEMA_VERSION
from core.error_handler import (
    DataValidationError,
    KindMismatch,
    get_logger,
    validate_dataframe,
)
from utils.formatting import to_jsonable

logger = get_logger(__name__)

PLOT_KINDS = ("tail", "speed", "growth", "scaling")

# payload key holding the rows, and the CSV columns, per plot kind
PLOT_COLUMNS = {
    "tail": ("survival", ["t", "survival"]),
    "speed": ("rows", ["n", "lambda_hat", "stderr"]),
    "growth": ("records", ["n", "M_n"]),
    "scaling": ("rows", ["word_length", "nonsolution_length", "attempts"]),
}


# ============================================================
#                   REPORT
# ============================================================

@dataclass
class Report:
    """One command run: config snapshot, payload and provenance."""

    command: str
    config: Dict[str, Any]
    payload: Dict[str, Any]
    duration_s: float = 0.0
    kind: Optional[str] = None
    artifact_version: str = ARTIFACT_VERSION
    schema_version: int = REPORT_SCHEMA_VERSION
    prng: str = PRNG_NAME

    def __post_init__(self):
        self.config = to_jsonable(self.config)
        self.payload = to_jsonable(self.payload)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "kind": self.kind,
            "config": self.config,
            "payload": self.payload,
            "duration_s": self.duration_s,
            "artifact_version": self.artifact_version,
            "schema_version": self.schema_version,
            "prng": self.prng,
        }


def canonical_payload(report: Report) -> bytes:
    """Payload bytes used for reproducibility checks; duration is excluded."""
    return json.dumps(report.payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    handle, temp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="") as out:
            out.write(text)
        os.replace(temp_path, path)
    except Exception:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise


def default_report_path(report: Report, output_dir: str) -> str:
    seed = report.config.get("seed", "noseed")
    name = report.command.replace(" ", "-")
    return os.path.join(output_dir, f"{name}-{seed}.json")


def save_report(report: Report, path: str) -> str:
    """Write the report as sorted JSON via temp file and rename."""
    _atomic_write(path, json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n")
    logger.info(f"Saved {report.command} report to {path}")
    return path


def load_report(path: str) -> Report:
    """
    Read a report written by save_report.

    Raises:
        DataValidationError: If the file is not a report of this schema version
    """
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    if data.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise DataValidationError(
            f"{path} has schema version {data.get('schema_version')}, expected {REPORT_SCHEMA_VERSION}"
        )
    missing = [key for key in ("command", "config", "payload") if key not in data]
    if missing:
        raise DataValidationError(f"{path} is missing report fields {missing}")
    return Report(
        command=data["command"],
        config=data["config"],
        payload=data["payload"],
        duration_s=data.get("duration_s", 0.0),
        kind=data.get("kind"),
        artifact_version=data.get("artifact_version", ARTIFACT_VERSION),
        schema_version=data["schema_version"],
        prng=data.get("prng", PRNG_NAME),
    )


# ============================================================
#                   PLOT DATA
# ============================================================

def plot_frame(report: Report, kind: str) -> pd.DataFrame:
    """
    The plot table of a report, in deterministic row order.

    Raises:
        KindMismatch: If the report is not of this kind
        DataValidationError: If the payload lacks the expected columns
    """
    if kind not in PLOT_KINDS:
        raise KindMismatch(f"Unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")
    if report.kind != kind:
        raise KindMismatch(f"Report of kind {report.kind!r} cannot produce {kind!r} plot data")
    key, columns = PLOT_COLUMNS[kind]
    df = pd.DataFrame(report.payload.get(key, []))
    validate_dataframe(df, f"{kind} plot data", required_columns=columns, min_rows=1)
    return df[columns].sort_values(columns[0], kind="stable").reset_index(drop=True)


def emit_plot_data(report: Report, kind: str, path: Optional[str] = None, output_dir: str = ".") -> str:
    """
    Write the plot table of a report as CSV.

    Returns:
        Path of the written file
    """
    df = plot_frame(report, kind)
    path = path or os.path.join(output_dir, f"{report.command.replace(' ', '-')}-{kind}.csv")
    _atomic_write(path, df.to_csv(index=False))
    logger.info(f"Wrote {len(df)} {kind} rows to {path}")
    return path
