"""Aggregated per-phase feeder model: topology, demand, voltages."""

from ufls.grid.loads import (
    aggregate_phase_power,
    demand_block,
    device_demand,
    motor_demand,
    native_block,
)
from ufls.grid.topology import GridTopology, connected_devices, connected_groups
from ufls.grid.voltage import bus_voltages

__all__ = [
    "GridTopology",
    "aggregate_phase_power",
    "bus_voltages",
    "connected_devices",
    "connected_groups",
    "demand_block",
    "device_demand",
    "motor_demand",
    "native_block",
]
