"""Shared fixtures: bundled scenario paths and small hand-built scenarios."""

import copy
from pathlib import Path

import pytest
import yaml

from ufls.io.scenario import parse_scenario

REPO_ROOT = Path(__file__).parent.parent
CONFIGS = REPO_ROOT / "configs"
GOLDEN = Path(__file__).parent / "golden"

# Two groups, one phase-a and one phase-c appliance, constant demand.
SMALL_SCENARIO = {
    "name": "small",
    "seed": 5,
    "horizon": 20.0,
    "dt": 0.01,
    "topology": {
        "groups": [
            {"id": "G1", "sectionalizer": "S1"},
            {"id": "G2", "sectionalizer": "S2", "parent": "G1"},
        ],
        "tie_switches": [{"id": "T1", "between": ["G2", "G1"]}],
    },
    "schedule": {"switch_close": {"S1": 0.0, "S2": 1.0}},
    "devices": [
        {"id": "base_a", "group": "G1", "phase": "a", "rated_kva": 900.0},
        {"id": "base_b", "group": "G1", "phase": "b", "rated_kva": 600.0},
        {"id": "base_c", "group": "G1", "phase": "c", "rated_kva": 600.0},
        {"id": "heater", "group": "G2", "phase": "a", "kind": "appliance", "rated_kva": 30.0, "count": 4},
        {"id": "meter", "group": "G2", "phase": "abc", "kind": "smart_meter", "rated_kva": 90.0},
    ],
    "ufls": {"scheme": "per_phase"},
}


def small_scenario_dict(**updates) -> dict:
    """Copy of SMALL_SCENARIO with top-level keys replaced."""
    data = copy.deepcopy(SMALL_SCENARIO)
    data.update(updates)
    return data


def build(data: dict, **kwargs):
    return parse_scenario(yaml.safe_dump(data), **kwargs)


@pytest.fixture
def configs_dir() -> Path:
    return CONFIGS


@pytest.fixture
def small_scenario():
    return build(small_scenario_dict())


@pytest.fixture
def motor_scenario():
    from ufls.io.scenario import load_scenario

    return load_scenario(CONFIGS / "motor_start.yaml")
