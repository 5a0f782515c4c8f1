"""Supervisory frequency reference of the grid-forming BESS.

When a phase loads the battery above ``s_th_up`` for long enough, the controller
lowers the frequency reference toward a UFLS setpoint so that devices listening
for that band shed load. A step in load power of at least ``ds_th`` (motor
start, cold-load pickup) switches the trigger delay to the long motor timer so
short surges ride through. Once every phase sits below ``s_th_low`` for
``tau_th_rec`` and the reference has settled, the controller re-initialises and
ramps back to nominal.

Timers run on sub-step time. ``age`` tells a step how long before its end the
load took its current value, and a timer started by that change begins at
``age``. An expiring timer leaves its overshoot in ``carry``; the ramp toward a
new setpoint only covers that final part of the step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ufls.core.phases import NOMINAL_FREQUENCY, Phase, PhaseTriplet
from ufls.events import EventKind, EventLog
from ufls.reserve.params import PerPhaseMode, ReserveParams, SectionalizerMode

TIMER_EPS = 1e-9
SLEW_EPS = 1e-12

_ZERO = PhaseTriplet(0.0, 0.0, 0.0)


@dataclass(frozen=True, slots=True)
class BessControllerState:
    """Snapshot of the reserve controller between steps."""

    f_star: float = NOMINAL_FREQUENCY
    f_set: float = NOMINAL_FREQUENCY
    lpr: bool = False
    tr: bool = False
    t_trigger: float = 0.0
    trigger_delay: float = 0.0
    t_rec: float | None = None
    t_f: float = 0.0
    active_phase: Phase | None = None
    pending_phase: Phase | None = None
    sectionalizer_stage: int = 0
    t_stage: float | None = None
    unrecoverable: bool = False
    # time elapsed since the latest setpoint decision of this step
    carry: float = 0.0
    # most recent samples, oldest first, at most one window long
    history: tuple[PhaseTriplet, ...] = ()

    @property
    def prev_s(self) -> PhaseTriplet:
        return self.history[-1] if self.history else _ZERO

    @property
    def settled(self) -> bool:
        return self.f_star == self.f_set


def classify_step(delta_s: float, params: ReserveParams) -> float:
    """Trigger delay for a load step of ``delta_s`` p.u."""
    if delta_s < params.ds_th:
        return params.tau_trigger_normal
    return params.tau_trigger_motor


def load_step(history: tuple[PhaseTriplet, ...], s: PhaseTriplet, window: int, basis: str) -> float:
    """Change of BESS loading over the last ``window`` steps."""
    ref = history[-window] if len(history) >= window else _ZERO
    if basis == "total":
        return abs(s.total() - ref.total())
    return max(abs(x - y) for x, y in zip(s, ref, strict=True))


def _slew(f: float, target: float, rate: float, duration: float) -> tuple[float, float | None]:
    """Move ``f`` toward ``target`` for ``duration``; also returns the time spent settled, if it lands."""
    step = rate * duration
    diff = target - f
    if abs(diff) <= step + SLEW_EPS:
        return target, max(0.0, (step - abs(diff)) / rate)
    return f + math.copysign(step, diff), None


def _settle_age(state: BessControllerState, params: ReserveParams, dt: float) -> float | None:
    """How long the reference will have been settled at the end of this step, None if it will not be."""
    if state.settled:
        return math.inf
    return _slew(state.f_star, state.f_set, params.f_ramp, dt)[1]


def step_trigger(
    state: BessControllerState,
    s: PhaseTriplet,
    params: ReserveParams,
    dt: float,
    t: float = 0.0,
    log: EventLog | None = None,
    age: float = 0.0,
) -> BessControllerState:
    """Update low-reserve detection, the trigger flag and the recovery path."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    window = params.window_steps(dt)
    delta_s = load_step(state.history, s, window, params.rocolp_basis)
    history = (*state.history, s)[-window:]

    lpr = any(x > params.s_th_up for x in s)
    if lpr:
        delay = classify_step(delta_s, params)
        if state.lpr:
            t_trigger = state.t_trigger + dt
            delay = max(delay, state.trigger_delay)
        else:
            t_trigger = age
    else:
        t_trigger = 0.0
        delay = params.tau_trigger_normal

    tr = state.tr
    carry = 0.0
    if lpr and not tr and t_trigger >= delay - TIMER_EPS:
        tr = True
        carry = max(0.0, t_trigger - delay)
        if log is not None:
            log.emit(t, EventKind.TRIGGER_SET, "bess", delay)

    t_rec = None
    if state.tr:
        if all(x < params.s_th_low for x in s):
            t_rec = age if state.t_rec is None else state.t_rec + dt
        settle = _settle_age(state, params, dt) if t_rec is not None else None
        if t_rec is not None and t_rec >= params.tau_th_rec - TIMER_EPS and settle is not None:
            if log is not None:
                log.emit(t, EventKind.TRIGGER_CLEAR, "bess", t_rec)
            carry = max(0.0, min(t_rec - params.tau_th_rec, settle))
            return BessControllerState(f_star=state.f_star, f_set=state.f_set, carry=carry, history=history)

    return replace(
        state,
        lpr=lpr,
        tr=tr,
        t_trigger=t_trigger,
        trigger_delay=delay,
        t_rec=t_rec,
        carry=carry,
        history=history,
    )


def _candidate_phase(s: PhaseTriplet, state: BessControllerState, params: ReserveParams) -> Phase:
    candidate: Phase | None = None
    for phase in Phase.singles():
        if s[phase] > params.s_th_up and (candidate is None or s[phase] > s[candidate]):
            candidate = phase
    if candidate is not None:
        return candidate
    if s.max() >= params.s_th_low:
        return s.argmax()
    return state.active_phase if state.active_phase is not None else s.argmax()


def select_target_phase(
    s: PhaseTriplet,
    state: BessControllerState,
    params: ReserveParams,
    dt: float,
    age: float = 0.0,
) -> BessControllerState:
    """Pick the phase whose setpoint the reference should follow, with a change dwell."""
    candidate = _candidate_phase(s, state, params)
    if state.active_phase is None:
        return replace(state, active_phase=candidate, pending_phase=None, t_f=0.0)
    if candidate is state.active_phase:
        return replace(state, pending_phase=None, t_f=0.0)

    t_f = age if candidate is not state.pending_phase else state.t_f + dt
    if t_f >= params.tau_th_f - TIMER_EPS:
        carry = max(0.0, t_f - params.tau_th_f)
        return replace(state, active_phase=candidate, pending_phase=None, t_f=0.0, carry=carry)
    return replace(state, pending_phase=candidate, t_f=t_f)


def advance_stage(
    s: PhaseTriplet,
    state: BessControllerState,
    params: ReserveParams,
    dt: float,
    t: float = 0.0,
    log: EventLog | None = None,
    age: float = 0.0,
) -> BessControllerState:
    """Move to the next sectionalizer setpoint while reserve stays violated at a settled stage."""
    mode = params.mode
    assert isinstance(mode, SectionalizerMode)
    stage = state.sectionalizer_stage
    at_stage = state.f_star == mode.setpoints[stage]
    if not (at_stage and s.max() >= params.s_th_low):
        return replace(state, t_stage=None)

    t_stage = age if state.t_stage is None else state.t_stage + dt
    if t_stage < mode.dwell - TIMER_EPS:
        return replace(state, t_stage=t_stage)
    if stage + 1 < len(mode.setpoints):
        if log is not None:
            log.emit(t, EventKind.STAGE_ADVANCE, f"stage_{stage + 1}", mode.setpoints[stage + 1])
        carry = max(0.0, t_stage - mode.dwell)
        return replace(state, sectionalizer_stage=stage + 1, t_stage=None, carry=carry)
    if not state.unrecoverable and log is not None:
        log.emit(t, EventKind.RESERVE_UNRECOVERABLE, f"stage_{stage}", s.max())
    return replace(state, t_stage=t_stage, unrecoverable=True)


def select_setpoint(state: BessControllerState, params: ReserveParams) -> float:
    if not state.tr:
        return NOMINAL_FREQUENCY
    mode = params.mode
    if isinstance(mode, PerPhaseMode):
        if state.active_phase is None:
            return NOMINAL_FREQUENCY
        return mode.setpoint(state.active_phase)
    return mode.setpoints[min(state.sectionalizer_stage, len(mode.setpoints) - 1)]


def ramp_reference(f_star: float, f_set: float, params: ReserveParams, dt: float) -> float:
    """Move ``f_star`` toward ``f_set`` by at most ``f_ramp * dt``, landing exactly on it."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return _slew(f_star, f_set, params.f_ramp, dt)[0]


def _setpoint_subject(state: BessControllerState, params: ReserveParams) -> str:
    if not state.tr:
        return "nominal"
    if isinstance(params.mode, PerPhaseMode):
        return f"phase_{state.active_phase.value}" if state.active_phase else "nominal"
    return f"stage_{state.sectionalizer_stage}"


def step_bess(
    state: BessControllerState,
    s: PhaseTriplet,
    params: ReserveParams,
    dt: float,
    t: float = 0.0,
    log: EventLog | None = None,
    age: float = 0.0,
) -> tuple[BessControllerState, float]:
    """One supervisory step; returns the new state and the frequency reference to broadcast.

    ``age`` is how long before ``t`` the loading ``s`` took its current value,
    when that happened inside this step.
    """
    if not params.enabled:
        return state, state.f_star

    age = min(max(age, 0.0), dt)
    state = step_trigger(state, s, params, dt, t, log, age)
    if state.tr:
        if isinstance(params.mode, PerPhaseMode):
            state = select_target_phase(s, state, params, dt, age)
        else:
            state = advance_stage(s, state, params, dt, t, log, age)

    f_set = select_setpoint(state, params)
    if f_set != state.f_set:
        if log is not None:
            log.emit(t, EventKind.SETPOINT_CHANGE, _setpoint_subject(state, params), f_set)
        carry = min(state.carry, dt)
        f_mid, _ = _slew(state.f_star, state.f_set, params.f_ramp, dt - carry)
        f_star, settled_for = _slew(f_mid, f_set, params.f_ramp, carry)
    else:
        f_star, settled_for = _slew(state.f_star, f_set, params.f_ramp, dt)

    landed = settled_for is not None and f_star != state.f_star
    if landed and state.tr and isinstance(params.mode, SectionalizerMode) and s.max() >= params.s_th_low:
        # the stage dwell counts from the moment the reference reached the stage
        state = replace(state, t_stage=settled_for)
    return replace(state, f_set=f_set, f_star=f_star), f_star
