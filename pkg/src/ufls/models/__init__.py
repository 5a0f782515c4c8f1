"""Scenario schema."""

from ufls.models.scenario import (
    CrossingTarget,
    DeviceKind,
    DutyCycle,
    FeederElectrical,
    LoadDevice,
    LoadGroup,
    MotorLoad,
    PhaseSetpoints,
    ProfileSource,
    ReserveSettings,
    ScenarioConfig,
    Schedule,
    SectionalizerSettings,
    SynthSeries,
    SynthSpec,
    TieSwitch,
    Topology,
    UflsSettings,
)

__all__ = [
    "CrossingTarget",
    "DeviceKind",
    "DutyCycle",
    "FeederElectrical",
    "LoadDevice",
    "LoadGroup",
    "MotorLoad",
    "PhaseSetpoints",
    "ProfileSource",
    "ReserveSettings",
    "ScenarioConfig",
    "Schedule",
    "SectionalizerSettings",
    "SynthSeries",
    "SynthSpec",
    "TieSwitch",
    "Topology",
    "UflsSettings",
]
