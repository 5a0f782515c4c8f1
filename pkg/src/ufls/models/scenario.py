from __future__ import annotations

import hashlib
import json
from enum import Enum
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ufls.core.phases import FrequencyHz, Phase, PhaseTriplet
from ufls.reserve.params import PerPhaseMode, ReserveParams, SectionalizerMode
from ufls.shedder.device import UflsParams, max_tripping_delay_bound


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DeviceKind(str, Enum):
    NON_CONTROLLABLE = "non_controllable"
    APPLIANCE = "appliance"
    SMART_METER = "smart_meter"

    @property
    def controllable(self) -> bool:
        return self is not DeviceKind.NON_CONTROLLABLE


# ---------------------------------------------------------------------------
# Grid
# ---------------------------------------------------------------------------


class DutyCycle(_Strict):
    """Native on/off controller of an appliance (thermostat-like)."""

    period: float = Field(gt=0)
    on_fraction: float = Field(ge=0, le=1)
    offset: float = 0.0

    def on_mask(self, times: np.ndarray) -> np.ndarray:
        phase = np.mod(np.asarray(times, dtype=float) + self.offset, self.period)
        return phase < self.on_fraction * self.period


class LoadDevice(_Strict):
    id: str
    group: str
    phase: Phase
    kind: DeviceKind = DeviceKind.NON_CONTROLLABLE
    rated_kva: float = Field(gt=0)
    # demand follows the profile when given, otherwise rated_kva
    profile: str | None = None
    native_controller: DutyCycle | None = None
    f_th: FrequencyHz | None = None
    count: int = Field(default=1, ge=1)


class LoadGroup(_Strict):
    id: str
    sectionalizer: str
    parent: str | None = None


class TieSwitch(_Strict):
    id: str
    between: tuple[str, str]


class Topology(_Strict):
    groups: list[LoadGroup] = Field(default_factory=list)
    tie_switches: list[TieSwitch] = Field(default_factory=list)

    def group(self, group_id: str) -> LoadGroup:
        for g in self.groups:
            if g.id == group_id:
                return g
        raise KeyError(group_id)

    @property
    def sectionalizer_ids(self) -> list[str]:
        return [g.sectionalizer for g in self.groups]

    @property
    def tie_ids(self) -> list[str]:
        return [t.id for t in self.tie_switches]

    def upstream_chain(self, group_id: str) -> list[LoadGroup]:
        """Groups from ``group_id`` up to the root, inclusive."""
        chain = []
        seen = set()
        current: str | None = group_id
        while current is not None:
            if current in seen:
                raise ValueError(f"load group parents form a cycle through {current!r}")
            seen.add(current)
            group = self.group(current)
            chain.append(group)
            current = group.parent
        return chain


class MotorLoad(_Strict):
    rated_kva: float = Field(default=400.0, gt=0)
    surge_multiplier: float = Field(default=6.0, ge=1)
    surge_duration: float = Field(default=6.0, gt=0)
    running_fraction: float = Field(default=1.0, ge=0)
    start_time: float = Field(default=50.0, ge=0)
    group: str
    phase: Phase = Phase.ABC

    @field_validator("phase")
    @classmethod
    def _three_phase_only(cls, v: Phase) -> Phase:
        if not v.is_three_phase:
            raise ValueError("motor loads are three-phase")
        return v


class FeederElectrical(_Strict):
    bess_rating_kva: float = Field(default=3000.0, gt=0)
    # (r, x) per phase a, b, c
    feeder_impedance_pu: tuple[tuple[float, float], tuple[float, float], tuple[float, float]] = (
        (0.01, 0.05),
        (0.01, 0.05),
        (0.01, 0.05),
    )
    voltage_sag_gain: float = Field(default=0.03, ge=0)
    voltage_time_constant: float = Field(default=0.2, gt=0)

    @field_validator("feeder_impedance_pu", mode="before")
    @classmethod
    def _expand_impedance(cls, v: Any) -> Any:
        if isinstance(v, dict):
            return tuple(v[p] for p in ("a", "b", "c"))
        if isinstance(v, list | tuple) and len(v) == 2 and all(isinstance(x, int | float) for x in v):
            return (tuple(v),) * 3
        return v

    @property
    def impedance(self) -> PhaseTriplet[complex]:
        a, b, c = (complex(r, x) for r, x in self.feeder_impedance_pu)
        return PhaseTriplet(a, b, c)


class Schedule(_Strict):
    # switch id -> closing time (s)
    switch_close: dict[str, float] = Field(default_factory=dict)


# ---------------------------------------------------------------------------
# UFLS and reserve settings
# ---------------------------------------------------------------------------


class PhaseSetpoints(_Strict):
    a: FrequencyHz = 59.85
    b: FrequencyHz = 59.55
    c: FrequencyHz = 59.25

    def __getitem__(self, phase: Phase) -> float:
        return getattr(self, phase.value)


class SectionalizerSettings(_Strict):
    tau1: float = Field(default=0.02, ge=0)
    tau2: float = Field(default=900.0, ge=0)
    tau_rand_max: float = Field(default=0.0, ge=0)
    dwell: float = Field(default=1.0, gt=0)
    # load group id -> trigger setpoint
    setpoints: dict[str, FrequencyHz] = Field(default_factory=dict)


class UflsSettings(_Strict):
    scheme: Literal["sectionalizer", "per_phase", "none"] = "per_phase"
    deadband: float = Field(default=0.05, gt=0)
    tau1_max: float = Field(default=10.0, ge=0)
    tau2: float = Field(default=900.0, ge=0)
    tau_rand_max: float = Field(default=180.0, ge=0)
    sensor_noise: float = Field(default=0.0, ge=0)
    phase_setpoints: PhaseSetpoints = Field(default_factory=PhaseSetpoints)
    sectionalizer: SectionalizerSettings = Field(default_factory=SectionalizerSettings)


class ReserveSettings(_Strict):
    s_pr: float = Field(default=0.1, ge=0, lt=1)
    s_th_low: float = Field(default=0.87, gt=0)
    ds_th: float = Field(default=0.5, gt=0)
    tau_trigger_normal: float = Field(default=0.02, ge=0)
    tau_trigger_motor: float = Field(default=10.0, ge=0)
    tau_th_rec: float = Field(default=0.02, ge=0)
    tau_th_f: float = Field(default=1.0, ge=0)
    f_ramp: float = Field(default=0.5, gt=0)
    rocolp_window: float | None = Field(default=None, gt=0)
    rocolp_basis: Literal["total", "phase"] = "total"

    @model_validator(mode="after")
    def _thresholds_ordered(self) -> ReserveSettings:
        s_th_up = 1.0 - self.s_pr
        if not self.s_th_low < s_th_up:
            raise ValueError(f"s_th_low ({self.s_th_low}) must be below s_th_up = 1 - s_pr ({s_th_up:g})")
        return self


# ---------------------------------------------------------------------------
# Profiles
# ---------------------------------------------------------------------------


class SynthSeries(_Strict):
    base_kva: float = Field(ge=0)
    shape: str | None = None
    # linear growth as a fraction of base per hour
    growth_per_hour: float = 0.0


class CrossingTarget(_Strict):
    """Rescale the growth of ``series`` so their sum reaches ``level_kva`` at ``time``."""

    series: list[str] = Field(min_length=1)
    time: float = Field(gt=0)
    level_kva: float = Field(gt=0)


class SynthSpec(_Strict):
    interval: float = Field(default=1.0, gt=0)
    horizon: float | None = Field(default=None, gt=0)
    noise: float = Field(default=0.0, ge=0)
    seed: int = 0
    # shape name -> [[t, multiplier], ...] linearly interpolated, held flat outside
    shapes: dict[str, list[tuple[float, float]]] = Field(default_factory=dict)
    series: dict[str, SynthSeries] = Field(default_factory=dict)
    crossings: list[CrossingTarget] = Field(default_factory=list)

    @field_validator("shapes")
    @classmethod
    def _shape_times_increase(cls, v: dict[str, list[tuple[float, float]]]) -> dict:
        for name, points in v.items():
            if not points:
                raise ValueError(f"shape {name!r} has no points")
            times = [p[0] for p in points]
            if any(b <= a for a, b in zip(times, times[1:], strict=False)):
                raise ValueError(f"shape {name!r} times must be strictly increasing")
        return v


class ProfileSource(_Strict):
    csv: str | None = None
    synth: SynthSpec | None = None

    @model_validator(mode="after")
    def _one_source(self) -> ProfileSource:
        if self.csv is not None and self.synth is not None:
            raise ValueError("give either profiles.csv or profiles.synth, not both")
        return self


# ---------------------------------------------------------------------------
# Scenario
# ---------------------------------------------------------------------------


def _expand_batch(device: LoadDevice) -> list[LoadDevice]:
    if device.count == 1:
        return [device]
    width = max(2, len(str(device.count)))
    return [
        device.model_copy(update={"id": f"{device.id}_{i:0{width}d}", "count": 1})
        for i in range(1, device.count + 1)
    ]


def _digest(payload: Any) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


class ScenarioConfig(_Strict):
    """A fully described simulation: network, fleet, controllers and run settings."""

    name: str = "scenario"
    description: str = ""
    seed: int = 0
    horizon: float = Field(gt=0)
    dt: float = Field(default=0.01, gt=0)
    electrical: FeederElectrical = Field(default_factory=FeederElectrical)
    topology: Topology = Field(default_factory=Topology)
    schedule: Schedule = Field(default_factory=Schedule)
    motor: MotorLoad | None = None
    devices: list[LoadDevice] = Field(default_factory=list)
    ufls: UflsSettings = Field(default_factory=UflsSettings)
    reserve: ReserveSettings = Field(default_factory=ReserveSettings)
    profiles: ProfileSource = Field(default_factory=ProfileSource)

    @field_validator("devices")
    @classmethod
    def _expand_batches(cls, v: list[LoadDevice]) -> list[LoadDevice]:
        return [d for device in v for d in _expand_batch(device)]

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))

    # -- derived runtime parameters --------------------------------------

    def reserve_params(self) -> ReserveParams:
        scheme = self.ufls.scheme
        if scheme == "sectionalizer":
            setpoints = tuple(sorted(self.ufls.sectionalizer.setpoints.values(), reverse=True))
            mode = SectionalizerMode(setpoints=setpoints, dwell=self.ufls.sectionalizer.dwell)
        else:
            sp = self.ufls.phase_setpoints
            mode = PerPhaseMode(f_a=sp.a, f_b=sp.b, f_c=sp.c)
        return ReserveParams(**self.reserve.model_dump(), mode=mode, enabled=scheme != "none")

    def ufls_devices(self) -> list[tuple[str, UflsParams]]:
        """(device id, UFLS parameters) of every device carrying a UFLS controller, sorted by id."""
        u = self.ufls
        out: list[tuple[str, UflsParams]] = []
        if u.scheme == "sectionalizer":
            sect = u.sectionalizer
            for group in self.topology.groups:
                if group.id not in sect.setpoints:
                    continue
                out.append(
                    (
                        group.sectionalizer,
                        UflsParams(
                            f_th=sect.setpoints[group.id],
                            deadband=u.deadband,
                            fixed_tau1=sect.tau1,
                            tau2=sect.tau2,
                            tau_rand_max=sect.tau_rand_max,
                            phase=Phase.ABC,
                        ),
                    )
                )
        elif u.scheme == "per_phase":
            sp = u.phase_setpoints
            for device in self.devices:
                if not device.kind.controllable:
                    continue
                if device.phase.is_three_phase:
                    f_th = device.f_th if device.f_th is not None else sp.a
                    bands = (f_th,) if device.f_th is not None else (sp.a, sp.b, sp.c)
                else:
                    f_th = device.f_th if device.f_th is not None else sp[device.phase]
                    bands = ()
                out.append(
                    (
                        device.id,
                        UflsParams(
                            f_th=f_th,
                            deadband=u.deadband,
                            tau1_max=u.tau1_max,
                            tau2=u.tau2,
                            tau_rand_max=u.tau_rand_max,
                            phase=device.phase,
                            band_setpoints=bands if device.phase.is_three_phase else (),
                        ),
                    )
                )
        return sorted(out, key=lambda item: item[0])

    # -- fingerprints -----------------------------------------------------

    def fingerprint(self) -> str:
        """Content hash of the resolved configuration."""
        return _digest(self.model_dump(mode="json"))

    def topology_fingerprint(self) -> str:
        """Hash of the network and fleet layout, independent of control settings."""
        payload = {
            "groups": [g.model_dump(mode="json") for g in self.topology.groups],
            "ties": [t.model_dump(mode="json") for t in self.topology.tie_switches],
            "devices": [
                [d.id, d.group, d.phase.value, d.kind.value, d.rated_kva] for d in self.devices
            ],
            "motor": None if self.motor is None else [self.motor.group, self.motor.rated_kva],
        }
        return _digest(payload)

    # -- semantic checks --------------------------------------------------

    def problems(self) -> list[str]:
        """Cross-reference and bound violations, in a stable order. Empty when valid."""
        errors: list[str] = []
        errors += self._topology_problems()
        errors += self._reference_problems()
        errors += self._bound_problems()
        if self.horizon < self.dt:
            errors.append(f"horizon: {self.horizon} s is shorter than dt = {self.dt} s")
        return errors

    def _topology_problems(self) -> list[str]:
        errors = []
        group_ids = [g.id for g in self.topology.groups]
        for dup in sorted({g for g in group_ids if group_ids.count(g) > 1}):
            errors.append(f"topology.groups: duplicate group id {dup!r}")
        switch_ids = self.topology.sectionalizer_ids + self.topology.tie_ids
        for dup in sorted({s for s in switch_ids if switch_ids.count(s) > 1}):
            errors.append(f"topology: duplicate switch id {dup!r}")
        known = set(group_ids)
        roots = [g.id for g in self.topology.groups if g.parent is None]
        if self.topology.groups and len(roots) != 1:
            errors.append(f"topology.groups: expected exactly one root group, found {roots}")
        for g in self.topology.groups:
            if g.parent is not None and g.parent not in known:
                errors.append(f"topology.groups.{g.id}.parent: unknown group {g.parent!r}")
        if not errors:
            for g in self.topology.groups:
                try:
                    self.topology.upstream_chain(g.id)
                except ValueError as exc:
                    errors.append(f"topology.groups.{g.id}: {exc}")
                    break
        for tie in self.topology.tie_switches:
            for end in tie.between:
                if end not in known:
                    errors.append(f"topology.tie_switches.{tie.id}: unknown group {end!r}")
        return errors

    def _reference_problems(self) -> list[str]:
        errors = []
        groups = {g.id for g in self.topology.groups}
        device_ids = [d.id for d in self.devices]
        for dup in sorted({d for d in device_ids if device_ids.count(d) > 1}):
            errors.append(f"devices: duplicate device id {dup!r}")
        for d in self.devices:
            if d.group not in groups:
                errors.append(f"devices.{d.id}.group: unknown group {d.group!r}")
        switches = set(self.topology.sectionalizer_ids) | set(self.topology.tie_ids)
        for device_id in sorted(switches.intersection(device_ids)):
            errors.append(f"devices.{device_id}: id clashes with switch {device_id!r}")
        sectionalizers = set(self.topology.sectionalizer_ids)
        ties = set(self.topology.tie_ids)
        for switch_id in self.schedule.switch_close:
            if switch_id in ties:
                errors.append(f"schedule.switch_close.{switch_id}: tie switch must stay open")
            elif switch_id not in sectionalizers:
                errors.append(f"schedule.switch_close.{switch_id}: unknown switch")
        if self.motor is not None and self.motor.group not in groups:
            errors.append(f"motor.group: unknown group {self.motor.group!r}")
        for group_id in self.ufls.sectionalizer.setpoints:
            if group_id not in groups:
                errors.append(f"ufls.sectionalizer.setpoints.{group_id}: unknown group")
        values = list(self.ufls.sectionalizer.setpoints.values())
        if len(set(values)) != len(values):
            errors.append("ufls.sectionalizer.setpoints: setpoints must be distinct")
        if self.ufls.scheme == "sectionalizer" and not values:
            errors.append("ufls.sectionalizer.setpoints: sectionalizer scheme needs at least one setpoint")
        synth = self.profiles.synth
        if synth is not None:
            for d in self.devices:
                if d.profile is not None and d.profile not in synth.series:
                    errors.append(f"devices.{d.id}.profile: unknown profile {d.profile!r}")
            for name, series in synth.series.items():
                if series.shape is not None and series.shape not in synth.shapes:
                    errors.append(f"profiles.synth.series.{name}.shape: unknown shape {series.shape!r}")
            for i, target in enumerate(synth.crossings):
                for name in target.series:
                    if name not in synth.series:
                        errors.append(f"profiles.synth.crossings.{i}: unknown series {name!r}")
        elif self.profiles.csv is None:
            for d in self.devices:
                if d.profile is not None:
                    errors.append(f"devices.{d.id}.profile: no profile source configured")
        return errors

    def configured_setpoints(self) -> list[float]:
        sp = self.ufls.phase_setpoints
        values = [sp.a, sp.b, sp.c, *self.ufls.sectionalizer.setpoints.values()]
        values += [d.f_th for d in self.devices if d.f_th is not None]
        return values

    def _bound_problems(self) -> list[str]:
        f_min = min(self.configured_setpoints())
        try:
            bound = max_tripping_delay_bound(f_min)
        except ValueError as exc:
            return [f"ufls: lowest setpoint {f_min} Hz is outside the tripping-delay bound range ({exc})"]
        errors = []
        if self.ufls.tau1_max >= bound:
            errors.append(
                f"ufls.tau1_max: {self.ufls.tau1_max:g} s violates the tripping-delay bound "
                f"{bound:.4g} s for lowest setpoint {f_min} Hz"
            )
        if self.ufls.sectionalizer.tau1 >= bound:
            errors.append(
                f"ufls.sectionalizer.tau1: {self.ufls.sectionalizer.tau1:g} s violates the "
                f"tripping-delay bound {bound:.4g} s for lowest setpoint {f_min} Hz"
            )
        return errors
