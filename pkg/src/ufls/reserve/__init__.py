"""BESS power-reserve controller: trigger detection, setpoint selection, slew-limited reference."""

from ufls.reserve.controller import (
    BessControllerState,
    advance_stage,
    classify_step,
    load_step,
    ramp_reference,
    select_setpoint,
    select_target_phase,
    step_bess,
    step_trigger,
)
from ufls.reserve.params import (
    PerPhaseMode,
    ReserveParams,
    SectionalizerMode,
    upper_threshold,
)

__all__ = [
    "BessControllerState",
    "PerPhaseMode",
    "ReserveParams",
    "SectionalizerMode",
    "advance_stage",
    "classify_step",
    "load_step",
    "ramp_reference",
    "select_setpoint",
    "select_target_phase",
    "step_bess",
    "step_trigger",
    "upper_threshold",
]
