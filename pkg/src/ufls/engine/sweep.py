"""Parameter sweeps: one run per point of a Cartesian override grid."""

from __future__ import annotations

import itertools
import logging
from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Any

import numpy as np
import polars as pl
from tqdm import tqdm

from ufls.engine.result import RunMetrics
from ufls.errors import ProfileError, ScenarioError, SimulationError
from ufls.io.scenario import load_scenario

logger = logging.getLogger(__name__)

METRIC_COLUMNS = [name for name in RunMetrics.model_fields if name != "group_energy_mwh"]


def parse_grid_axis(item: str) -> tuple[str, list[str]]:
    """Split ``key=v1,v2,v3`` into a dotted key and its raw values; ``key=`` is an empty axis."""
    key, sep, raw = item.partition("=")
    values = [v.strip() for v in raw.split(",") if v.strip()]
    if not sep or not key.strip():
        raise ScenarioError(f"sweep axis {item!r}: expected key=v1,v2,...")
    return key.strip(), values


def expand_grid(axes: Mapping[str, Sequence[str]]) -> list[dict[str, str]]:
    keys = list(axes)
    return [dict(zip(keys, combo, strict=True)) for combo in itertools.product(*(axes[k] for k in keys))]


def row_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _run_point(path: str, overrides: list[str], seed: int) -> dict[str, Any]:
    """Run one grid point; validation and envelope failures come back as row fields."""
    from ufls.engine.simulation import run

    try:
        scenario = load_scenario(Path(path), overrides=overrides, seed=seed)
        result = run(scenario)
    except (ScenarioError, ProfileError) as exc:
        return {"status": "invalid", "error": str(exc)}
    except SimulationError as exc:
        return {"status": "failed", "error": str(exc)}
    metrics = result.metrics.model_dump()
    metrics.pop("group_energy_mwh", None)
    return {"status": "ok", "error": None, **metrics}


def run_sweep(
    scenario_path: Path,
    axes: Mapping[str, Sequence[str]],
    overrides: Sequence[str] = (),
    seed: int = 0,
    jobs: int = 1,
    progress: bool = False,
) -> pl.DataFrame:
    """Run every grid point and return one metrics row per point, ordered by index.

    Points whose scenario fails validation or whose run breaks its envelope are
    kept with ``status`` set to ``invalid`` or ``failed`` and an ``error`` message.
    The content does not depend on ``jobs``.
    """
    points = expand_grid(axes)
    logger.info("sweep over %d point(s) with %d job(s)", len(points), jobs)
    rows: dict[int, dict[str, Any]] = {}

    def args(index: int, point: dict[str, str]) -> tuple[str, list[str], int]:
        return str(scenario_path), [*overrides, *(f"{k}={v}" for k, v in point.items())], row_seed(seed, index)

    with tqdm(total=len(points), desc="sweep", unit="run", disable=not progress) as bar:
        if jobs <= 1:
            for index, point in enumerate(points):
                rows[index] = {"index": index, "seed": row_seed(seed, index), **point, **_run_point(*args(index, point))}
                bar.update(1)
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = {pool.submit(_run_point, *args(i, p)): (i, p) for i, p in enumerate(points)}
                for future in as_completed(futures):
                    index, point = futures[future]
                    rows[index] = {"index": index, "seed": row_seed(seed, index), **point, **future.result()}
                    bar.update(1)

    columns = ["index", "seed", *axes, "status", "error", *METRIC_COLUMNS]
    if not rows:
        return pl.DataFrame(schema={c: pl.Utf8 for c in columns})
    ordered = [{c: rows[i].get(c) for c in columns} for i in sorted(rows)]
    return pl.DataFrame(ordered, infer_schema_length=None)
