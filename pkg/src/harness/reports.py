"""
CSV and JSON outputs of the harness.

All CSV files are written with pandas using "\\n" line endings and fixed
column order, so identical inputs give identical bytes.
"""

import json
import logging
import platform
import subprocess
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import pandas as pd

from src.analysis.complexity import complexity_table, storage_table
from src.schema.errors import EmptyInputError
from src.schema.records import BER_CSV_COLUMNS, CURVE_CSV_COLUMNS, BerRecord, CurvePoint

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

COMPLEXITY_FILE = "complexity.csv"
STORAGE_FILE = "storage.csv"
STORAGE_EVALUATED_FILE = "storage_evaluated.csv"


def _write_csv(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def _read_csv(path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc


def dump_tables(out_dir, k: int = 4, traceback_n: Optional[int] = None) -> Dict[str, Path]:
    """
    Write the complexity table and the storage table.

    The storage table is symbolic in the traceback length N; when
    traceback_n is given a second storage table evaluated at N is written.
    """
    out_dir = Path(out_dir)
    written = {
        "complexity": _write_csv(complexity_table(k), out_dir / COMPLEXITY_FILE),
        "storage": _write_csv(storage_table(k), out_dir / STORAGE_FILE),
    }
    if traceback_n is not None:
        written["storage_evaluated"] = _write_csv(storage_table(k, traceback_n), out_dir / STORAGE_EVALUATED_FILE)
    return written


def records_frame(records: Iterable[BerRecord]) -> pd.DataFrame:
    rows = [r.model_dump(include=set(BER_CSV_COLUMNS)) for r in records]
    return pd.DataFrame(rows, columns=BER_CSV_COLUMNS)


def write_records(records: List[BerRecord], path) -> Path:
    """BER records CSV; elapsed time is left to the run summary."""
    if not records:
        raise EmptyInputError("no BER records to write")
    return _write_csv(records_frame(records), path)


def _native(row: dict) -> dict:
    return {key: value.item() if hasattr(value, "item") else value for key, value in row.items()}


def read_records(path) -> List[BerRecord]:
    frame = _read_csv(path)
    return [BerRecord(**_native(row)) for row in frame.to_dict(orient="records")]


def curve_points(records: List[BerRecord]) -> List[CurvePoint]:
    """One series per (scheme, detector), series in first-seen order, points by ascending Eb/N0."""
    if not records:
        raise EmptyInputError("no records to turn into curves")
    series_order: Dict[str, int] = {}
    for r in records:
        series_order.setdefault(r.series, len(series_order))
    ordered = sorted(records, key=lambda r: (series_order[r.series], r.ebn0_db))
    return [CurvePoint(series=r.series, ebn0_db=r.ebn0_db, ber=r.ber, ci_low=r.ci_low, ci_high=r.ci_high)
            for r in ordered]


def emit_curves(records: List[BerRecord], path) -> Path:
    """Plot-data CSV with columns series, ebn0_db, ber, ci_low, ci_high."""
    points = curve_points(records)
    frame = pd.DataFrame([p.model_dump() for p in points], columns=CURVE_CSV_COLUMNS)
    return _write_csv(frame, path)


def parse_curves(path) -> List[CurvePoint]:
    """Read a curve CSV written by emit_curves."""
    frame = _read_csv(path)
    missing = [c for c in CURVE_CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise EmptyInputError(f"{path}: missing curve columns {missing}")
    return [CurvePoint(**_native(row)) for row in frame[CURVE_CSV_COLUMNS].to_dict(orient="records")]


def git_version() -> str:
    """git-describe style version of the working tree, 'unknown' outside a repository."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True, text=True, check=True, cwd=Path(__file__).resolve().parents[2],
        )
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.CalledProcessError):
        logger.warning("git version unavailable; recording 'unknown'")
        return "unknown"


def write_run_summary(path, config, records: List[BerRecord], wall_seconds: float) -> Path:
    """JSON summary: config echo, version, per-point and total wall time."""
    summary = {
        "version": git_version(),
        "python": platform.python_version(),
        "config": config.model_dump(mode="json"),
        "points": [
            {"series": r.series, "ebn0_db": r.ebn0_db, "bits": r.bits, "errors": r.errors,
             "frames": r.frames, "early_stop": r.early_stop, "elapsed_seconds": r.elapsed_seconds}
            for r in records
        ],
        "wall_seconds": wall_seconds,
    }
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(summary, indent=2) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    logger.info(f"Wrote run summary to {path}")
    return path
