"""Scenario and profile input, result file output."""

from ufls.io.profiles import LoadProfileSet, load_profiles, synth_profiles
from ufls.io.scenario import (
    apply_overrides,
    deep_merge,
    dump_scenario,
    load_scenario,
    parse_scenario,
    scenario_profiles,
)
from ufls.io.writers import (
    events_document,
    read_events,
    read_summary,
    timeseries_frame,
    write_comparison,
    write_outputs,
    write_sweep,
)

__all__ = [
    "LoadProfileSet",
    "apply_overrides",
    "deep_merge",
    "dump_scenario",
    "events_document",
    "load_profiles",
    "load_scenario",
    "parse_scenario",
    "read_events",
    "read_summary",
    "scenario_profiles",
    "synth_profiles",
    "timeseries_frame",
    "write_comparison",
    "write_outputs",
    "write_sweep",
]
