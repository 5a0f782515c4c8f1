"""Result types produced by a simulation run."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict

from ufls.events import EventRecord


class RunMetrics(BaseModel):
    """Headline figures of one run."""

    model_config = ConfigDict(frozen=True)

    energy_served_mwh: float
    max_freq_deviation: float
    max_pcc_voltage_deviation: float
    puf_mean: float | None = None
    puf_max: float | None = None
    vuf_mean: float | None = None
    vuf_max: float | None = None
    ufls_event_count: int = 0
    device_count_participating: int = 0
    ufls_device_count: int = 0
    group_energy_mwh: dict[str, float] = {}


@dataclass(frozen=True)
class TimeSeries:
    """Per-step series of a run; every array has one row per step."""

    t: np.ndarray
    s: np.ndarray  # (n, 3) p.u.
    f_star: np.ndarray
    v_pcc: np.ndarray  # (n, 3) magnitudes, p.u.
    puf: np.ndarray
    vuf: np.ndarray
    dt: float
    base_kva: float
    group_ids: tuple[str, ...] = ()
    group_served: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))  # (n, groups) p.u.
    device_ids: tuple[str, ...] = ()
    device_on: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=bool))  # (n, devices)

    def __len__(self) -> int:
        return len(self.t)

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in (self.t, self.s, self.f_star, self.v_pcc, self.puf, self.vuf, self.group_served, self.device_on):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()


@dataclass(frozen=True)
class SimulationResult:
    name: str
    series: TimeSeries
    events: tuple[EventRecord, ...]
    metrics: RunMetrics
    scenario_fingerprint: str
    topology_fingerprint: str
    seed: int
    # sectionalizer id -> load group id, for reading event subjects
    sectionalizer_groups: dict[str, str] = field(default_factory=dict)

    def summary_line(self) -> str:
        """Frozen one-line summary: name, trigger episodes, energy served, max frequency deviation."""
        m = self.metrics
        return (
            f"{self.name}: events={m.ufls_event_count} "
            f"energy_served={m.energy_served_mwh:.6f} MWh "
            f"max_df={m.max_freq_deviation:.6f} Hz"
        )
