"""
Utility functions for report serialisation and validation.
"""

import os
import re
import json
import logging
from datetime import datetime
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from .config import REPORTS_DIR, REQUIRED_REPORT_FIELDS
from .data_processor import concat_tables, values_table

logger = logging.getLogger(__name__)


def get_timestamp() -> str:
    """Get current timestamp as string."""
    return datetime.now().strftime("%Y-%m-%d %H:%M:%S")


def to_jsonable(value: Any) -> Any:
    """Complex numbers become {"re", "im"}; numpy scalars and arrays become Python values."""
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, pd.DataFrame):
        return [to_jsonable(r) for r in value.to_dict(orient="records")]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value


def validate_report_structure(report: Dict[str, Any]) -> Tuple[bool, List[str]]:
    """Check that a report carries every provenance field."""
    missing_fields = [f for f in REQUIRED_REPORT_FIELDS if f not in report]
    return len(missing_fields) == 0, missing_fields


def default_report_path(subcommand: str, fmt: str = "json") -> str:
    safe_name = re.sub(r"[^a-zA-Z0-9_-]+", "_", subcommand)[:50]
    stamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    return os.path.join(REPORTS_DIR, f"{safe_name}_{stamp}.{fmt}")


def dump_report(report: Dict[str, Any], fmt: str = "json", tables: Dict[str, pd.DataFrame] = None) -> str:
    """Render a report as JSON text or as concatenated CSV tables."""
    if fmt == "json":
        return json.dumps(to_jsonable(report), ensure_ascii=False, indent=2)
    if fmt == "csv":
        named = {"values": values_table(report.get("values", {}))}
        named.update(tables or {})
        return concat_tables(named).to_csv(index=False)
    raise ValueError(f"unknown report format '{fmt}', expected json or csv")


def save_report(report: Dict[str, Any], path: str, fmt: str = "json", tables: Dict[str, pd.DataFrame] = None) -> str:
    """Write a validated report to disk and return the path."""
    is_valid, missing = validate_report_structure(report)
    if not is_valid:
        raise ValueError(f"report is missing fields: {missing}")

    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(dump_report(report, fmt, tables))
    logger.info(f"Report saved to: {path}")
    return path


def create_error_report(
    argv: List[str],
    subcommand: str,
    error_msg: str,
    seed: Optional[int] = None,
    samples: Optional[int] = None,
    workers: Optional[int] = None,
    tolerance: Optional[float] = None,
) -> Dict[str, Any]:
    """Minimal report for a run that failed before producing values."""
    return {
        "command": " ".join(argv),
        "subcommand": subcommand,
        "seed": seed,
        "samples": samples,
        "workers": workers,
        "tolerance": tolerance,
        "values": {},
        "verdicts": {"run": "error"},
        "error": error_msg,
        "timestamp": get_timestamp(),
        "wall_clock_sec": 0.0,
    }
