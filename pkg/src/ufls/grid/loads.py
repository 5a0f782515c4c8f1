"""Device and motor demand, and per-phase aggregation at the BESS terminals."""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from ufls.core.phases import PhaseTriplet
from ufls.grid.topology import GridTopology, connected_devices
from ufls.io.profiles import LoadProfileSet
from ufls.models.scenario import LoadDevice, MotorLoad


def motor_demand(motor: MotorLoad, t: float, base_kva: float) -> PhaseTriplet[float]:
    """Per-phase motor demand in p.u.: surge window first, then running load."""
    if t < motor.start_time:
        return PhaseTriplet.uniform(0.0)
    if t < motor.start_time + motor.surge_duration:
        kva = motor.rated_kva * motor.surge_multiplier
    else:
        kva = motor.rated_kva * motor.running_fraction
    return PhaseTriplet.uniform(kva / 3.0 / base_kva)


def device_demand(device: LoadDevice, profiles: LoadProfileSet, t: float) -> float:
    """Demand of one device in kVA at time ``t`` (before any on/off gating)."""
    if device.profile is None:
        return device.rated_kva
    return profiles.value_at(device.profile, t)


def demand_block(devices: tuple[LoadDevice, ...], profiles: LoadProfileSet, times: np.ndarray) -> np.ndarray:
    """``(len(times), n_devices)`` demand in kVA, one profile lookup per profile id."""
    out = np.empty((len(times), len(devices)))
    cache: dict[str, np.ndarray] = {}
    for j, d in enumerate(devices):
        if d.profile is None:
            out[:, j] = d.rated_kva
            continue
        if d.profile not in cache:
            cache[d.profile] = profiles.sample(d.profile, times)
        out[:, j] = cache[d.profile]
    return out


def native_block(devices: tuple[LoadDevice, ...], times: np.ndarray) -> np.ndarray:
    """``(len(times), n_devices)`` native controller state ``s``; always on without a duty cycle."""
    out = np.ones((len(times), len(devices)), dtype=bool)
    for j, d in enumerate(devices):
        if d.native_controller is not None:
            out[:, j] = d.native_controller.on_mask(times)
    return out


def aggregate_phase_power(
    topology: GridTopology,
    switch_states: Mapping[str, bool],
    device_on_flags: Mapping[str, bool],
    profiles: LoadProfileSet,
    t: float,
) -> PhaseTriplet[float]:
    """Per-phase power (p.u. of the BESS rating) drawn by connected, effectively-on devices plus the motor.

    Devices missing from ``device_on_flags`` count as off.
    """
    live = connected_devices(topology, switch_states)
    kva = np.zeros(len(topology.devices))
    for i, d in enumerate(topology.devices):
        if d.id in live and device_on_flags.get(d.id, False):
            kva[i] = device_demand(d, profiles, t)
    per_phase = kva @ topology.phase_weights / topology.base_kva if len(kva) else np.zeros(3)
    s = PhaseTriplet.from_array(per_phase.tolist())

    motor = topology.motor
    if motor is not None and motor.group in topology.group_ids:
        if all(switch_states[x] for x in topology.chain(motor.group)):
            m = motor_demand(motor, t, topology.base_kva)
            s = PhaseTriplet(s.a + m.a, s.b + m.b, s.c + m.c)
    return s
