"""Run metrics and side-by-side comparison of two runs."""

from __future__ import annotations

import math
from collections.abc import Iterable

import numpy as np
import polars as pl

from ufls.core.phases import NOMINAL_FREQUENCY
from ufls.engine.result import RunMetrics, SimulationResult, TimeSeries
from ufls.errors import TopologyError
from ufls.events import EventKind, EventRecord

KWH_PER_MWH = 1000.0
SECONDS_PER_HOUR = 3600.0

COMPARISON_ROWS = [
    ("energy_served_mwh", "Load served (MWh)"),
    ("max_freq_deviation", "Max frequency deviation (Hz)"),
    ("max_pcc_voltage_deviation", "Max PCC voltage deviation (p.u.)"),
    ("puf_mean", "PUF mean"),
    ("puf_max", "PUF max"),
    ("vuf_mean", "VUF mean (%)"),
    ("vuf_max", "VUF max (%)"),
    ("ufls_event_count", "UFLS events"),
    ("device_count_participating", "Devices tripped"),
    ("ufls_device_count", "UFLS devices"),
]


def _energy_mwh(power_pu: np.ndarray, base_kva: float, dt: float) -> float:
    return float(np.sum(power_pu) * base_kva * dt / SECONDS_PER_HOUR / KWH_PER_MWH)


def _stats(values: np.ndarray) -> tuple[float | None, float | None]:
    defined = values[np.isfinite(values)]
    if defined.size == 0:
        return None, None
    return float(defined.mean()), float(defined.max())


def accumulate_metrics(
    series: TimeSeries,
    events: Iterable[EventRecord] = (),
    ufls_device_count: int = 0,
) -> RunMetrics:
    """Energy served, extreme deviations and unbalance statistics over the horizon."""
    events = list(events)
    energy = _energy_mwh(series.s.sum(axis=1), series.base_kva, series.dt) if len(series) else 0.0
    max_df = float(np.max(np.abs(NOMINAL_FREQUENCY - series.f_star))) if len(series) else 0.0
    max_dv = float(np.max(np.abs(1.0 - series.v_pcc))) if len(series) else 0.0
    puf_mean, puf_max = _stats(series.puf)
    vuf_mean, vuf_max = _stats(series.vuf)
    groups = {
        gid: _energy_mwh(series.group_served[:, j], series.base_kva, series.dt)
        for j, gid in enumerate(series.group_ids)
    }
    return RunMetrics(
        energy_served_mwh=energy,
        max_freq_deviation=max_df,
        max_pcc_voltage_deviation=max_dv,
        puf_mean=puf_mean,
        puf_max=puf_max,
        vuf_mean=vuf_mean,
        vuf_max=vuf_max,
        ufls_event_count=sum(1 for e in events if e.kind is EventKind.TRIGGER_SET),
        device_count_participating=len({e.subject for e in events if e.kind is EventKind.DEVICE_TRIP}),
        ufls_device_count=ufls_device_count,
        group_energy_mwh=groups,
    )


def _delta(a: float | None, b: float | None) -> float | None:
    if a is None or b is None:
        return None
    return b - a


def compare_runs(
    a: SimulationResult,
    b: SimulationResult,
    baseline: SimulationResult | None = None,
) -> pl.DataFrame:
    """Side-by-side metrics of two runs on the same topology, plus served energy per load group.

    With a ``baseline`` (typically the same network without reserve control),
    PUF and VUF changes of each run relative to it are added.

    Raises:
        TopologyError: If the runs do not share a topology fingerprint.
    """
    for other in (b, baseline):
        if other is not None and other.topology_fingerprint != a.topology_fingerprint:
            raise TopologyError(
                f"cannot compare {a.name!r} with {other.name!r}: topologies differ "
                f"({a.topology_fingerprint} vs {other.topology_fingerprint})"
            )

    rows: list[dict] = []
    ma, mb = a.metrics.model_dump(), b.metrics.model_dump()
    for key, label in COMPARISON_ROWS:
        va = None if ma[key] is None else float(ma[key])
        vb = None if mb[key] is None else float(mb[key])
        rows.append({"metric": key, "label": label, "a": va, "b": vb, "delta": _delta(va, vb)})

    if baseline is not None:
        mz = baseline.metrics
        for key, label in (("puf_mean", "PUF vs no-UFLS baseline"), ("vuf_mean", "VUF vs no-UFLS baseline")):
            base = getattr(mz, key)
            va = _delta(base, getattr(a.metrics, key))
            vb = _delta(base, getattr(b.metrics, key))
            rows.append({"metric": f"{key}_vs_baseline", "label": label, "a": va, "b": vb, "delta": _delta(va, vb)})

    for gid in a.series.group_ids:
        va = a.metrics.group_energy_mwh.get(gid, 0.0)
        vb = b.metrics.group_energy_mwh.get(gid, 0.0)
        rows.append(
            {"metric": f"energy_served_mwh.{gid}", "label": f"Load served {gid} (MWh)", "a": va, "b": vb, "delta": vb - va}
        )

    for row in rows:
        for col in ("a", "b", "delta"):
            if row[col] is not None and not math.isfinite(row[col]):
                row[col] = None
    return pl.DataFrame(
        rows,
        schema={"metric": pl.Utf8, "label": pl.Utf8, "a": pl.Float64, "b": pl.Float64, "delta": pl.Float64},
        orient="row",
    )
