"""Result files: time series CSV, event log JSON, summary JSON, comparison and sweep tables."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import TYPE_CHECKING

import polars as pl

if TYPE_CHECKING:
    from ufls.engine.result import RunMetrics, SimulationResult

logger = logging.getLogger(__name__)

EVENTS_SCHEMA_VERSION = 1
FLOAT_PRECISION = 6

TIMESERIES_FILE = "timeseries.csv"
EVENTS_FILE = "events.json"
SUMMARY_FILE = "summary.json"


def timeseries_frame(result: SimulationResult) -> pl.DataFrame:
    ts = result.series
    return pl.DataFrame(
        {
            "t": ts.t,
            "S_a": ts.s[:, 0],
            "S_b": ts.s[:, 1],
            "S_c": ts.s[:, 2],
            "f_star": ts.f_star,
            "V_a": ts.v_pcc[:, 0],
            "V_b": ts.v_pcc[:, 1],
            "V_c": ts.v_pcc[:, 2],
            "PUF": ts.puf,
            "VUF": ts.vuf,
        }
    ).with_columns(pl.col("PUF", "VUF").fill_nan(None))


def events_document(result: SimulationResult) -> dict:
    return {
        "schema_version": EVENTS_SCHEMA_VERSION,
        "scenario": result.name,
        "seed": result.seed,
        "events": [e.to_dict() for e in sorted(result.events)],
    }


def _fixed_json(value: object, depth: int = 0) -> str:
    """JSON text with every float written to FLOAT_PRECISION decimals."""
    if isinstance(value, dict):
        if not value:
            return "{}"
        pad = "  " * (depth + 1)
        body = ",\n".join(f"{pad}{json.dumps(str(k))}: {_fixed_json(v, depth + 1)}" for k, v in value.items())
        return "{\n" + body + "\n" + "  " * depth + "}"
    if isinstance(value, float):
        return f"{value:.{FLOAT_PRECISION}f}"
    return json.dumps(value)


def summary_text(metrics: RunMetrics) -> str:
    return _fixed_json(metrics.model_dump()) + "\n"


def write_outputs(result: SimulationResult, out_dir: Path) -> dict[str, Path]:
    """Write the three per-run files into ``out_dir`` (created if missing)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "timeseries": out_dir / TIMESERIES_FILE,
        "events": out_dir / EVENTS_FILE,
        "summary": out_dir / SUMMARY_FILE,
    }
    timeseries_frame(result).write_csv(paths["timeseries"], float_precision=FLOAT_PRECISION)
    paths["events"].write_text(json.dumps(events_document(result), indent=2) + "\n", encoding="utf-8")
    paths["summary"].write_text(summary_text(result.metrics), encoding="utf-8")
    logger.info("wrote %s outputs to %s", result.name, out_dir)
    return paths


def read_summary(path: Path) -> RunMetrics:
    from ufls.engine.result import RunMetrics

    return RunMetrics.model_validate_json(Path(path).read_text(encoding="utf-8"))


def read_events(path: Path) -> list[dict]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("schema_version") != EVENTS_SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported events schema {doc.get('schema_version')!r}")
    return doc["events"]


def write_comparison(frame: pl.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.write_csv(path, float_precision=FLOAT_PRECISION)
    return path


def write_sweep(frame: pl.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.write_csv(path, float_precision=FLOAT_PRECISION)
    logger.info("wrote %d sweep row(s) to %s", frame.height, path)
    return path
