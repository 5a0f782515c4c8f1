"""Device-level UFLS state machine.

A device waits in ``armed`` until the sensed frequency enters its trigger band,
times the tripping delay in ``timing_trip``, drops its load for the fixed
recovery time (``shed``) and then for its random recovery delay
(``recovering``), and finally re-arms with freshly drawn delays. Leaving the band
while timing resets the tripping timer to zero.

A step runs the timers first (:func:`advance_device`) and then applies the
sensed frequency (:func:`sense_device`), so a trip or reconnection changes the
load in the step where it happens. Timers keep the part of a step that elapsed
after the event starting them: band entry is located by interpolating between
the last two sensed values, and a trip hands its overshoot to the off timer.

The same parameterisation covers sectionalizers (fixed tripping delay, no random
recovery), smart meters and appliances.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ufls.core.phases import NOMINAL_FREQUENCY, FrequencyHz, Phase

# Tolerance on timer and band comparisons so dt-multiples land on the intended step.
TIMER_EPS = 1e-9
BAND_EPS = 1e-9

BOUND_F_MIN = 57.0
BOUND_F_MAX = 60.0


class DeviceMode(str, Enum):
    ARMED = "armed"
    TIMING_TRIP = "timing_trip"
    SHED = "shed"
    RECOVERING = "recovering"


class UflsParams(BaseModel):
    """UFLS settings of one device."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    f_th: FrequencyHz
    deadband: float = Field(default=0.05, gt=0)
    tau1_max: float = Field(default=10.0, ge=0)
    fixed_tau1: float | None = Field(default=None, ge=0)
    tau2: float = Field(default=900.0, ge=0)
    tau_rand_max: float = Field(default=180.0, ge=0)
    phase: Phase = Phase.A
    # three-phase devices respond in any of these bands
    band_setpoints: tuple[FrequencyHz, ...] = ()

    @model_validator(mode="after")
    def _band_setpoints_only_for_three_phase(self) -> UflsParams:
        if self.band_setpoints and not self.phase.is_three_phase:
            raise ValueError("band_setpoints apply to three-phase devices only")
        return self

    def setpoints(self) -> tuple[float, ...]:
        if self.phase.is_three_phase and self.band_setpoints:
            return tuple(self.band_setpoints)
        return (self.f_th,)


@dataclass(frozen=True, slots=True)
class UflsDeviceState:
    """Snapshot of one device's controller."""

    tau1_drawn: float
    tau_rand_drawn: float
    mode: DeviceMode = DeviceMode.ARMED
    t1: float = 0.0
    t2: float = 0.0
    u: bool = True
    s: bool = True
    # last sensed frequency, for locating band entry inside a step
    f_prev: float = NOMINAL_FREQUENCY

    @classmethod
    def initial(cls, params: UflsParams, rng: np.random.Generator, s: bool = True) -> UflsDeviceState:
        tau1, tau_rand = draw_delays(params, rng)
        return cls(tau1_drawn=tau1, tau_rand_drawn=tau_rand, s=s)


def device_rng(seed: int, device_id: str) -> np.random.Generator:
    """Random stream owned by one device, independent of the rest of the fleet."""
    digest = hashlib.blake2b(device_id.encode("utf-8"), digest_size=8).digest()
    return np.random.default_rng(np.random.SeedSequence([seed, int.from_bytes(digest, "big")]))


def draw_delays(params: UflsParams, rng: np.random.Generator) -> tuple[float, float]:
    """Draw (tripping delay, random recovery delay) for the next event."""
    if params.fixed_tau1 is not None:
        tau1 = float(params.fixed_tau1)
    else:
        tau1 = float(rng.uniform(0.0, params.tau1_max))
    tau_rand = float(rng.uniform(0.0, params.tau_rand_max))
    return tau1, tau_rand


def max_tripping_delay_bound(f_min: float) -> float:
    """Longest admissible tripping delay for a lowest setpoint ``f_min`` (seconds).

    Raises:
        ValueError: If f_min is outside [57, 60] Hz.
    """
    if not BOUND_F_MIN <= f_min <= BOUND_F_MAX:
        raise ValueError(f"f_min must be within [{BOUND_F_MIN}, {BOUND_F_MAX}] Hz, got {f_min}")
    return 10.0 ** (1.7373 * f_min - 100.116)


def band_match(f: float, params: UflsParams) -> bool:
    return any(abs(f - sp) <= params.deadband + BAND_EPS for sp in params.setpoints())


def effective_on(s: bool, u: bool) -> bool:
    """Power flows only when the native controller and the UFLS command both allow it."""
    return s and u


def entry_age(f: float, f_prev: float, params: UflsParams, dt: float) -> float:
    """Time since the sensed frequency crossed into the band, interpolated inside the step.

    Zero when ``f_prev`` was already in a band or the frequency did not move.
    """
    if band_match(f_prev, params):
        return 0.0
    sp = next(sp for sp in params.setpoints() if abs(f - sp) <= params.deadband + BAND_EPS)
    edge = sp + params.deadband if f_prev > f else sp - params.deadband
    span = abs(f - f_prev)
    if span == 0.0:
        return 0.0
    return dt * min(1.0, max(0.0, abs(f - edge) / span))


def _trip(state: UflsDeviceState, t1: float) -> UflsDeviceState:
    # the overshoot past tau1 is already part of the off period
    return replace(state, mode=DeviceMode.SHED, u=False, t1=t1, t2=max(0.0, t1 - state.tau1_drawn))


def advance_device(
    state: UflsDeviceState,
    params: UflsParams,
    dt: float,
    rng: np.random.Generator,
) -> UflsDeviceState:
    """Run the timers of one device over ``dt``: trips and reconnections happen here."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")

    mode = state.mode
    if mode is DeviceMode.ARMED:
        return state

    if mode is DeviceMode.TIMING_TRIP:
        t1 = state.t1 + dt
        if t1 >= state.tau1_drawn - TIMER_EPS:
            return _trip(state, t1)
        return replace(state, t1=t1)

    # shed or recovering: the command stays off while t2 runs
    t2 = state.t2 + dt
    if t2 >= params.tau2 + state.tau_rand_drawn - TIMER_EPS:
        tau1, tau_rand = draw_delays(params, rng)
        return replace(
            state,
            mode=DeviceMode.ARMED,
            u=True,
            t1=0.0,
            t2=0.0,
            tau1_drawn=tau1,
            tau_rand_drawn=tau_rand,
        )
    if t2 >= params.tau2 - TIMER_EPS and state.tau_rand_drawn > 0.0:
        return replace(state, mode=DeviceMode.RECOVERING, t2=t2)
    return replace(state, t2=t2)


def sense_device(state: UflsDeviceState, params: UflsParams, f: float, dt: float) -> UflsDeviceState:
    """Apply the sensed frequency ``f``: band entry starts the tripping timer, band exit resets it."""
    mode = state.mode
    if mode is DeviceMode.ARMED:
        if not band_match(f, params):
            return replace(state, f_prev=f)
        t1 = entry_age(f, state.f_prev, params, dt)
        entered = replace(state, mode=DeviceMode.TIMING_TRIP, t1=t1, f_prev=f)
        if t1 >= state.tau1_drawn - TIMER_EPS:
            return _trip(entered, t1)
        return entered

    if mode is DeviceMode.TIMING_TRIP and not band_match(f, params):
        return replace(state, mode=DeviceMode.ARMED, t1=0.0, f_prev=f)
    return replace(state, f_prev=f)


def step_device(
    state: UflsDeviceState,
    params: UflsParams,
    f: float,
    dt: float,
    rng: np.random.Generator,
) -> UflsDeviceState:
    """Advance one device by ``dt`` given the sensed frequency ``f``."""
    return sense_device(advance_device(state, params, dt, rng), params, f, dt)
