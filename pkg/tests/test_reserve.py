"""Unit and property tests for ufls.reserve: the BESS power-reserve controller."""

import pytest

from ufls.core.phases import NOMINAL_FREQUENCY, Phase, PhaseTriplet
from ufls.events import EventKind, EventLog
from ufls.reserve import (
    BessControllerState,
    PerPhaseMode,
    ReserveParams,
    SectionalizerMode,
    classify_step,
    ramp_reference,
    select_setpoint,
    select_target_phase,
    step_bess,
    step_trigger,
    upper_threshold,
)

DT = 0.01


def _s(a: float, b: float, c: float) -> PhaseTriplet[float]:
    return PhaseTriplet(a, b, c)


def _drive(params, loads, state=None, log=None, dt=DT):
    """Feed (load, steps) segments through step_bess; return final state and the f_star trace."""
    state = state or BessControllerState()
    trace = []
    t = 0.0
    for s, steps in loads:
        for _ in range(steps):
            state, f = step_bess(state, s, params, dt, t, log)
            trace.append(f)
            t += dt
    return state, trace


class TestUpperThreshold:
    """Tests for upper_threshold()."""

    @pytest.mark.parametrize(("s_pr", "expected"), [(0.1, 0.9), (0.0, 1.0), (0.25, 0.75)])
    def test_values(self, s_pr, expected):
        """The upper threshold should be 1 - s_pr."""
        assert upper_threshold(s_pr) == pytest.approx(expected)

    def test_out_of_range(self):
        """s_pr outside [0, 1) should raise ValueError."""
        with pytest.raises(ValueError):
            upper_threshold(1.0)


class TestReserveParams:
    """Tests for ReserveParams validation."""

    def test_low_threshold_below_upper(self):
        """s_th_low at or above s_th_up should be rejected."""
        with pytest.raises(ValueError):
            ReserveParams(s_pr=0.1, s_th_low=0.9)

    def test_sectionalizer_setpoints_decreasing(self):
        """Sectionalizer setpoints should have to decrease strictly."""
        with pytest.raises(ValueError):
            SectionalizerMode(setpoints=(59.55, 59.85))

    def test_window_steps(self):
        """The load-step window should default to one step."""
        assert ReserveParams().window_steps(DT) == 1
        assert ReserveParams(rocolp_window=0.1).window_steps(DT) == 10


class TestClassifyStep:
    """Tests for classify_step()."""

    @pytest.mark.parametrize(("delta", "expected"), [(0.1, 0.02), (0.6, 10.0), (0.5, 10.0)])
    def test_delays(self, delta, expected):
        """Steps at or above ds_th should select the motor delay."""
        assert classify_step(delta, ReserveParams()) == expected


class TestStepTrigger:
    """Tests for step_trigger()."""

    def test_below_threshold(self):
        """(0.85, 0.8, 0.8) should leave lpr and tr false."""
        state = step_trigger(BessControllerState(history=(_s(0.85, 0.8, 0.8),)), _s(0.85, 0.8, 0.8), ReserveParams(), DT)
        assert not state.lpr
        assert not state.tr

    def test_slow_ramp_triggers_after_normal_delay(self):
        """S_a held at 0.92 after a small step should set tr after 0.02 s."""
        params = ReserveParams()
        log = EventLog()
        state = BessControllerState(history=(_s(0.88, 0.8, 0.8),))
        steps = 0
        while not state.tr:
            state = step_trigger(state, _s(0.92, 0.8, 0.8), params, DT, steps * DT, log)
            steps += 1
            assert steps < 100
        # t_trigger runs 0, 0.01, 0.02 from the first overloaded step
        assert steps == 3
        assert [e.kind for e in log.records] == [EventKind.TRIGGER_SET]
        assert log.records[0].detail == pytest.approx(0.02)

    def test_short_surge_never_triggers(self):
        """A jump to 0.95 held for 6 s then released should not set tr (motor delay 10 s)."""
        params = ReserveParams()
        log = EventLog()
        state, _ = _drive(params, [(_s(0.3, 0.3, 0.3), 100), (_s(0.95, 0.6, 0.6), 600), (_s(0.3, 0.3, 0.3), 1500)], log=log)
        assert not state.tr
        assert log.of_kind(EventKind.TRIGGER_SET) == []

    def test_long_surge_triggers_once(self):
        """The same jump held past 10 s should trigger exactly once."""
        params = ReserveParams()
        log = EventLog()
        _drive(params, [(_s(0.3, 0.3, 0.3), 100), (_s(0.95, 0.6, 0.6), 1200), (_s(0.3, 0.3, 0.3), 500)], log=log)
        triggers = log.of_kind(EventKind.TRIGGER_SET)
        assert len(triggers) == 1
        assert triggers[0].t == pytest.approx(1.0 + 10.0, abs=DT)

    def test_per_phase_basis(self):
        """With the per-phase basis a 0.267 p.u. motor step stays a normal step."""
        params = ReserveParams(rocolp_basis="phase")
        state = BessControllerState(history=(_s(0.66, 0.5, 0.5),))
        state = step_trigger(state, _s(0.927, 0.767, 0.767), params, DT)
        assert state.trigger_delay == pytest.approx(0.02)

    def test_total_basis(self):
        """With the total basis the same motor step selects the motor delay."""
        state = BessControllerState(history=(_s(0.66, 0.5, 0.5),))
        state = step_trigger(state, _s(0.927, 0.767, 0.767), ReserveParams(), DT)
        assert state.trigger_delay == pytest.approx(10.0)


class TestSelectTargetPhase:
    """Tests for select_target_phase()."""

    def test_candidate_is_most_loaded_above_threshold(self):
        """(0.92, 0.85, 0.95) should pick phase C."""
        state = select_target_phase(_s(0.92, 0.85, 0.95), BessControllerState(tr=True), ReserveParams(), DT)
        assert state.active_phase is Phase.C

    def test_change_after_dwell(self):
        """A candidate flip from B to A should take effect only after 1 s."""
        params = ReserveParams()
        state = BessControllerState(tr=True, active_phase=Phase.B)
        steps = 0
        while state.active_phase is Phase.B:
            state = select_target_phase(_s(0.95, 0.91, 0.5), state, params, DT)
            steps += 1
            assert steps < 1000
        assert (steps - 1) * DT == pytest.approx(1.0, abs=1e-9)

    def test_fast_oscillation_never_switches(self):
        """A candidate alternating A/C faster than 1 s should leave the active phase alone."""
        params = ReserveParams()
        state = BessControllerState(tr=True, active_phase=Phase.B)
        for k in range(2000):
            s = _s(0.95, 0.91, 0.5) if (k // 40) % 2 == 0 else _s(0.5, 0.91, 0.95)
            state = select_target_phase(s, state, params, DT)
        assert state.active_phase is Phase.B

    def test_holds_argmax_between_thresholds(self):
        """With no phase above s_th_up but one above s_th_low, the argmax stays the target."""
        state = select_target_phase(_s(0.88, 0.5, 0.5), BessControllerState(tr=True), ReserveParams(), DT)
        assert state.active_phase is Phase.A


class TestSelectSetpoint:
    """Tests for select_setpoint()."""

    def test_nominal_when_not_triggered(self):
        """tr = false should give 60 Hz."""
        assert select_setpoint(BessControllerState(), ReserveParams()) == NOMINAL_FREQUENCY

    def test_per_phase(self):
        """Active phase C should give 59.25 Hz."""
        state = BessControllerState(tr=True, active_phase=Phase.C)
        assert select_setpoint(state, ReserveParams()) == 59.25

    def test_sectionalizer_stages(self):
        """Stage 0 then stage 1 should give 59.85 then 59.55 Hz."""
        params = ReserveParams(mode=SectionalizerMode(setpoints=(59.85, 59.55, 59.25)))
        assert select_setpoint(BessControllerState(tr=True, sectionalizer_stage=0), params) == 59.85
        assert select_setpoint(BessControllerState(tr=True, sectionalizer_stage=1), params) == 59.55


class TestRampReference:
    """Tests for ramp_reference()."""

    def test_settled(self):
        """f_star equal to f_set should not move."""
        assert ramp_reference(59.85, 59.85, ReserveParams(), DT) == 59.85

    def test_single_step(self):
        """60 toward 59.85 at 0.5 Hz/s with dt 0.1 should give 59.95."""
        assert ramp_reference(60.0, 59.85, ReserveParams(), 0.1) == pytest.approx(59.95)

    def test_full_descent_time(self):
        """60 to 59.25 should take exactly 1.5 s and land on the setpoint."""
        f = 60.0
        steps = 0
        while f != 59.25:
            f = ramp_reference(f, 59.25, ReserveParams(), DT)
            steps += 1
        assert steps == 150


class TestStepBess:
    """Tests for step_bess() and the controller properties."""

    def test_steady_load_stays_nominal(self):
        """A steady load below thresholds should keep f_star at 60 Hz."""
        _, trace = _drive(ReserveParams(), [(_s(0.6, 0.5, 0.4), 2000)])
        assert set(trace) == {NOMINAL_FREQUENCY}

    def test_disabled_controller(self):
        """A disabled controller should never leave nominal."""
        _, trace = _drive(ReserveParams(enabled=False), [(_s(0.95, 0.95, 0.95), 500)])
        assert set(trace) == {NOMINAL_FREQUENCY}

    def test_phase_follow_then_recover(self):
        """S_a max then S_c max then all low: f_A, then f_C after the dwell, then 60 Hz."""
        params = ReserveParams()
        log = EventLog()
        state, trace = _drive(
            params,
            [
                (_s(0.85, 0.6, 0.85), 10),
                (_s(0.95, 0.6, 0.92), 300),
                (_s(0.80, 0.6, 0.92), 500),
                (_s(0.80, 0.6, 0.80), 600),
            ],
            log=log,
        )
        subjects = [e.subject for e in log.of_kind(EventKind.SETPOINT_CHANGE)]
        assert subjects == ["phase_a", "phase_c", "nominal"]
        assert min(trace) == pytest.approx(59.25)
        assert trace[-1] == NOMINAL_FREQUENCY
        assert not state.tr

    def test_slew_bound(self):
        """Every step should move f_star by at most f_ramp * dt."""
        params = ReserveParams()
        _, trace = _drive(params, [(_s(0.85, 0.6, 0.85), 10), (_s(0.95, 0.6, 0.92), 300), (_s(0.6, 0.6, 0.6), 800)])
        trace = [NOMINAL_FREQUENCY, *trace]
        assert all(abs(b - a) <= params.f_ramp * DT + 1e-12 for a, b in zip(trace, trace[1:], strict=False))

    def test_recovery_waits_for_low_threshold(self):
        """Loads between s_th_low and s_th_up should keep the trigger set."""
        params = ReserveParams()
        state, trace = _drive(params, [(_s(0.6, 0.6, 0.6), 5), (_s(0.95, 0.6, 0.6), 50), (_s(0.88, 0.6, 0.6), 3000)])
        assert state.tr
        assert trace[-1] == 59.85

    def test_hysteresis_constant_loads(self):
        """Constant loads between 0.87 and 0.90 should produce no trigger/recover cycles."""
        params = ReserveParams()
        for level in (0.871, 0.88, 0.89, 0.9):
            log = EventLog()
            _drive(params, [(_s(level, level - 0.1, level - 0.2), 3000)], log=log)
            assert log.of_kind(EventKind.TRIGGER_SET, EventKind.TRIGGER_CLEAR) == []

    def test_hysteresis_after_settle(self):
        """After one trigger, a constant load between the thresholds should not cycle."""
        params = ReserveParams()
        log = EventLog()
        _drive(params, [(_s(0.85, 0.6, 0.6), 5), (_s(0.95, 0.6, 0.6), 100), (_s(0.88, 0.6, 0.6), 5000)], log=log)
        assert len(log.of_kind(EventKind.TRIGGER_SET)) == 1
        assert log.of_kind(EventKind.TRIGGER_CLEAR) == []

    def test_recovery_after_settling(self):
        """Recovery should wait for f_star to reach the committed setpoint."""
        params = ReserveParams()
        log = EventLog()
        # overload for four steps only; the ramp to 59.25 needs 1.5 s
        _drive(params, [(_s(0.5, 0.5, 0.85), 5), (_s(0.5, 0.5, 0.95), 4), (_s(0.5, 0.5, 0.5), 400)], log=log)
        clear = log.of_kind(EventKind.TRIGGER_CLEAR)
        assert len(clear) == 1
        trigger = log.of_kind(EventKind.TRIGGER_SET)[0]
        assert clear[0].t - trigger.t >= 1.5 - 1e-6

    def test_sectionalizer_stage_advance(self):
        """Reserve still violated at the first stage should step 59.85 -> 59.55."""
        params = ReserveParams(mode=SectionalizerMode(setpoints=(59.85, 59.55)))
        log = EventLog()
        state, trace = _drive(params, [(_s(0.6, 0.6, 0.6), 5), (_s(0.95, 0.6, 0.6), 300)], log=log)
        assert [e.subject for e in log.of_kind(EventKind.STAGE_ADVANCE)] == ["stage_1"]
        assert [e.detail for e in log.of_kind(EventKind.SETPOINT_CHANGE)] == [59.85, 59.55]
        assert min(trace) == 59.55
        assert state.sectionalizer_stage == 1

    def test_sectionalizer_unrecoverable(self):
        """Exhausting the last stage should report reserve_unrecoverable once."""
        params = ReserveParams(mode=SectionalizerMode(setpoints=(59.85,)))
        log = EventLog()
        state, _ = _drive(params, [(_s(0.85, 0.6, 0.6), 5), (_s(0.95, 0.6, 0.6), 1000)], log=log)
        assert len(log.of_kind(EventKind.RESERVE_UNRECOVERABLE)) == 1
        assert state.unrecoverable

    def test_per_phase_mode_setpoints(self):
        """Custom per-phase setpoints should be followed."""
        params = ReserveParams(mode=PerPhaseMode(f_a=59.9, f_b=59.6, f_c=59.3))
        _, trace = _drive(params, [(_s(0.85, 0.6, 0.6), 5), (_s(0.95, 0.6, 0.6), 300)])
        assert trace[-1] == 59.9


class TestSubStepTiming:
    """Tests for timers started and ended inside a step."""

    def test_onset_age_starts_trigger_timer(self):
        """An overload that began 4 ms before the step end should trigger 4 ms early and ramp only 4 ms."""
        params = ReserveParams()
        state = BessControllerState(history=(_s(0.85, 0.6, 0.6),))
        s = _s(0.95, 0.6, 0.6)
        state, f = step_bess(state, s, params, DT, age=0.004)
        assert state.t_trigger == pytest.approx(0.004)
        assert f == NOMINAL_FREQUENCY
        state, f = step_bess(state, s, params, DT)
        assert not state.tr
        state, f = step_bess(state, s, params, DT)
        assert state.tr
        assert state.carry == pytest.approx(0.004)
        assert f == pytest.approx(NOMINAL_FREQUENCY - params.f_ramp * 0.004, abs=1e-12)

    def test_stage_dwell_counts_from_landing(self):
        """Landing half a step early should advance the stage half a step early."""
        params = ReserveParams(mode=SectionalizerMode(setpoints=(59.99, 59.5)))
        s = _s(0.95, 0.6, 0.6)
        log = EventLog()
        state = BessControllerState(f_star=59.9925, f_set=59.99, lpr=True, tr=True, history=(s,))
        state, f = step_bess(state, s, params, DT, log=log)
        assert f == 59.99
        assert state.t_stage == pytest.approx(0.005)
        steps = 0
        while not log.of_kind(EventKind.STAGE_ADVANCE):
            state, f = step_bess(state, s, params, DT, log=log)
            steps += 1
            assert steps < 200
        assert steps == 100
        # the new setpoint is followed for the half step after the dwell ran out
        assert f == pytest.approx(59.99 - params.f_ramp * 0.005, abs=1e-9)

    def test_clear_in_settling_step(self):
        """Recovery should clear in the step where the reference lands and ramp back for the rest of it."""
        params = ReserveParams()
        log = EventLog()
        low = _s(0.5, 0.5, 0.5)
        state = BessControllerState(f_star=59.8525, f_set=59.85, tr=True, t_rec=0.05, active_phase=Phase.A, history=(low,))
        state, f = step_bess(state, low, params, DT, log=log)
        assert len(log.of_kind(EventKind.TRIGGER_CLEAR)) == 1
        assert not state.tr
        assert f == pytest.approx(59.8525, abs=1e-9)

    def test_clear_waits_for_landing(self):
        """A reference more than one step from its setpoint should hold the trigger."""
        params = ReserveParams()
        low = _s(0.5, 0.5, 0.5)
        state = BessControllerState(f_star=59.87, f_set=59.85, tr=True, t_rec=0.05, active_phase=Phase.A, history=(low,))
        state = step_trigger(state, low, params, DT)
        assert state.tr
        assert state.t_rec == pytest.approx(0.06)

    def test_recovery_timer_starts_at_age(self):
        """t_rec should start at the age of the load drop and pass its overshoot on as carry."""
        params = ReserveParams()
        low = _s(0.5, 0.5, 0.5)
        state = BessControllerState(f_star=59.85, f_set=59.85, lpr=True, tr=True, active_phase=Phase.A, history=(low,))
        state = step_trigger(state, low, params, DT, age=0.004)
        assert state.t_rec == pytest.approx(0.004)
        state = step_trigger(state, low, params, DT)
        assert state.tr
        state = step_trigger(state, low, params, DT)
        assert not state.tr
        assert state.carry == pytest.approx(0.004)
