"""
Tabulation helpers: residual sweeps, per-face breakdowns and verdicts.
"""

from typing import Any, Dict, Iterable, List, Sequence

import numpy as np
import pandas as pd


def classify_verdict(max_abs_residual: float, tolerance: float, fail_threshold: float) -> str:
    """pass at or below tolerance, fail above fail_threshold, inconclusive in between."""
    if not np.isfinite(max_abs_residual):
        return "inconclusive"
    if max_abs_residual <= tolerance:
        return "pass"
    if max_abs_residual > fail_threshold:
        return "fail"
    return "inconclusive"


def split_complex(df: pd.DataFrame) -> pd.DataFrame:
    """Replace complex columns by <name>_re / <name>_im float columns."""
    out = {}
    for col in df.columns:
        values = df[col]
        is_complex = values.map(lambda v: isinstance(v, (complex, np.complexfloating)))
        numeric = values.map(lambda v: isinstance(v, (int, float, complex, np.number)) and not isinstance(v, bool))
        if is_complex.any() and numeric.all():
            arr = values.to_numpy(dtype=complex)
            out[f"{col}_re"] = arr.real
            out[f"{col}_im"] = arr.imag
        elif is_complex.any():
            out[col] = values.map(str)
        else:
            out[col] = values
    return pd.DataFrame(out, index=df.index)


def residual_table(rows: Iterable[Sequence]) -> pd.DataFrame:
    """One line per checked basis: family, label, both sides and the residual."""
    df = pd.DataFrame.from_records(
        [tuple(r) for r in rows], columns=["family", "label", "lhs", "rhs", "residual"]
    )
    df["abs_residual"] = df["residual"].map(abs).astype(float)
    return df


def face_breakdown(terms: Iterable[Sequence]) -> pd.DataFrame:
    df = pd.DataFrame.from_records(
        [tuple(t) for t in terms],
        columns=["vertex_ids", "klain_value", "angle", "angle_stderr", "volume", "contribution", "method"],
    )
    df["vertex_ids"] = df["vertex_ids"].map(lambda ids: " ".join(str(i) for i in ids))
    return df


def summarize_residuals(df: pd.DataFrame) -> Dict[str, float]:
    """Max absolute residual per basis family plus the overall max."""
    if df.empty:
        return {"overall": 0.0}
    summary = df.groupby("family")["abs_residual"].max().to_dict()
    summary["overall"] = float(df["abs_residual"].max())
    return {k: float(v) for k, v in summary.items()}


def method_counts(df: pd.DataFrame) -> Dict[str, int]:
    """How many faces took each angle branch."""
    if df.empty:
        return {}
    return {k: int(v) for k, v in df["method"].value_counts().items()}


def concat_tables(tables: Dict[str, pd.DataFrame]) -> pd.DataFrame:
    """Stack named tables into one CSV-ready frame with a leading `table` column."""
    frames: List[pd.DataFrame] = []
    for name, df in tables.items():
        flat = split_complex(df.reset_index(drop=True))
        flat.insert(0, "table", name)
        frames.append(flat)
    if not frames:
        return pd.DataFrame(columns=["table"])
    return pd.concat(frames, ignore_index=True, sort=False)


def values_table(values: Dict[str, Any]) -> pd.DataFrame:
    """Scalar entries of a report's values as key/value rows; nested entries are skipped."""
    scalars = (bool, int, float, complex, str, np.generic)
    rows = [{"key": k, "value": v} for k, v in values.items() if isinstance(v, scalars)]
    return pd.DataFrame(rows, columns=["key", "value"])
