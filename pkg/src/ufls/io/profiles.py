"""Load profiles: CSV ingestion, synthetic generation and zero-order-hold lookup.

A profile is a series of ``(t, kVA)`` samples. Between samples the last value is
held (zero-order hold); the first sample must be at or before any queried time.
"""

from __future__ import annotations

import hashlib
import io
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np
import polars as pl

from ufls.errors import ProfileError
from ufls.models.scenario import SynthSpec


@dataclass(frozen=True)
class LoadProfileSet:
    """Per-profile-id sample times and powers (kVA)."""

    series: Mapping[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    def __contains__(self, profile_id: str) -> bool:
        return profile_id in self.series

    def __len__(self) -> int:
        return len(self.series)

    @property
    def ids(self) -> list[str]:
        return list(self.series)

    def value_at(self, profile_id: str, t: float) -> float:
        return float(self.sample(profile_id, np.array([t]))[0])

    def sample(self, profile_id: str, times: np.ndarray) -> np.ndarray:
        """Held values of one profile at each of ``times``."""
        try:
            t_s, p_s = self.series[profile_id]
        except KeyError:
            raise ProfileError(f"unknown profile {profile_id!r}") from None
        idx = np.searchsorted(t_s, times, side="right") - 1
        if len(idx) and idx.min() < 0:
            first = float(np.asarray(times)[idx < 0][0])
            raise ProfileError(
                f"profile {profile_id!r} has no sample at or before t = {first:g} s "
                f"(first sample at {t_s[0]:g} s)"
            )
        return p_s[idx]


def _validate_series(profile_id: str, times: np.ndarray, values: np.ndarray) -> None:
    if np.any(np.diff(times) <= 0):
        row = int(np.flatnonzero(np.diff(times) <= 0)[0]) + 1
        raise ProfileError(f"time column is not strictly increasing at data row {row + 1}")
    if np.any(values < 0):
        row = int(np.flatnonzero(values < 0)[0])
        raise ProfileError(f"negative power {values[row]:g} for {profile_id!r} at data row {row + 1}")


def load_profiles(csv_text: str) -> LoadProfileSet:
    """Parse a profile CSV: first column time (s), one column per profile id (kVA).

    Raises:
        ProfileError: On ragged rows, missing or non-numeric values, non-increasing
            time or negative power. Row numbers count data rows from 1.
    """
    try:
        df = pl.read_csv(
            io.BytesIO(csv_text.encode("utf-8")),
            infer_schema_length=0,
            truncate_ragged_lines=False,
        )
    except pl.exceptions.PolarsError as exc:
        raise ProfileError(f"malformed profile CSV (ragged rows?): {exc}") from exc
    if df.width < 2:
        raise ProfileError("profile CSV needs a time column and at least one profile column")

    missing = df.select(pl.any_horizontal(pl.all().is_null()).arg_true()).to_series()
    if len(missing):
        raise ProfileError(f"ragged row: missing value at data row {int(missing[0]) + 1}")

    try:
        df = df.select(pl.all().str.strip_chars().cast(pl.Float64))
    except pl.exceptions.PolarsError as exc:
        raise ProfileError(f"non-numeric value in profile CSV: {exc}") from exc

    time_col, *profile_cols = df.columns
    times = df[time_col].to_numpy()
    out = {}
    for name in profile_cols:
        values = df[name].to_numpy()
        _validate_series(name, times, values)
        out[name] = (times.copy(), values.copy())
    return LoadProfileSet(out)


def _stream(seed: int, name: str) -> np.random.Generator:
    digest = hashlib.blake2b(name.encode("utf-8"), digest_size=8).digest()
    return np.random.default_rng(np.random.SeedSequence([seed, int.from_bytes(digest, "big")]))


def _shape_values(points: Iterable[tuple[float, float]], times: np.ndarray) -> np.ndarray:
    pts = np.asarray(list(points), dtype=float)
    return np.interp(times, pts[:, 0], pts[:, 1])


def synth_profiles(spec: SynthSpec, horizon: float | None = None) -> LoadProfileSet:
    """Deterministic ramp-plus-noise profiles sampled every ``spec.interval`` seconds.

    Each series is ``base * shape(t) + base * growth * t / 3600``, scaled by
    ``1 + noise * N(0, 1)`` per sample and clipped at zero. A crossing target
    rescales the growth of its series so that their noise-free sum equals
    ``level_kva`` at the target time; series without growth are given a rate
    proportional to their base.
    """
    end = spec.horizon if spec.horizon is not None else horizon
    if end is None:
        raise ValueError("synthetic profiles need a horizon")
    times = np.arange(0.0, end + spec.interval / 2, spec.interval)

    def shape_at(name: str | None, t: np.ndarray) -> np.ndarray:
        if name is None:
            return np.ones_like(t)
        return _shape_values(spec.shapes[name], t)

    growth = {name: s.growth_per_hour for name, s in spec.series.items()}
    for target in spec.crossings:
        members = [spec.series[name] for name in target.series]
        t_star = np.array([target.time])
        level_now = sum(float(m.base_kva * shape_at(m.shape, t_star)[0]) for m in members)
        rates = [growth[name] or 1.0 for name in target.series]
        slope = sum(m.base_kva * r for m, r in zip(members, rates, strict=True)) * target.time / 3600.0
        if slope == 0.0:
            continue
        k = (target.level_kva - level_now) / slope
        for name, rate in zip(target.series, rates, strict=True):
            growth[name] = k * rate

    out = {}
    for name, s in spec.series.items():
        values = s.base_kva * shape_at(s.shape, times) + s.base_kva * growth[name] * times / 3600.0
        if spec.noise > 0.0:
            values = values * (1.0 + spec.noise * _stream(spec.seed, name).standard_normal(len(times)))
        out[name] = (times.copy(), np.clip(values, 0.0, None))
    return LoadProfileSet(out)
