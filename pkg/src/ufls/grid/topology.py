"""Radial load-group topology and switch-state connectivity."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ufls.errors import TopologyError
from ufls.models.scenario import LoadDevice, LoadGroup, MotorLoad, ScenarioConfig, Topology


@dataclass(frozen=True)
class GridTopology:
    """Load groups in a radial chain plus the devices they feed.

    A group is energized when its own sectionalizer and every upstream one are
    closed. Tie switches are accepted in switch-state maps but never connect
    anything.
    """

    groups: tuple[LoadGroup, ...]
    devices: tuple[LoadDevice, ...] = ()
    tie_ids: frozenset[str] = frozenset()
    motor: MotorLoad | None = None
    base_kva: float = 3000.0
    _chains: dict[str, tuple[str, ...]] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        tree = Topology(groups=list(self.groups))
        for g in self.groups:
            try:
                chain = tree.upstream_chain(g.id)
            except KeyError as exc:
                raise TopologyError(f"load group {g.id!r} has unknown ancestor {exc.args[0]!r}") from None
            except ValueError as exc:
                raise TopologyError(str(exc)) from None
            self._chains[g.id] = tuple(x.sectionalizer for x in reversed(chain))

    @classmethod
    def from_config(cls, config: ScenarioConfig) -> GridTopology:
        return cls(
            groups=tuple(config.topology.groups),
            devices=tuple(config.devices),
            tie_ids=frozenset(config.topology.tie_ids),
            motor=config.motor,
            base_kva=config.electrical.bess_rating_kva,
        )

    @cached_property
    def group_ids(self) -> list[str]:
        return [g.id for g in self.groups]

    @cached_property
    def sectionalizer_ids(self) -> list[str]:
        return [g.sectionalizer for g in self.groups]

    @cached_property
    def members(self) -> dict[str, tuple[str, ...]]:
        out: dict[str, list[str]] = {g.id: [] for g in self.groups}
        for d in self.devices:
            out[d.group].append(d.id)
        return {k: tuple(v) for k, v in out.items()}

    def chain(self, group_id: str) -> tuple[str, ...]:
        """Sectionalizer ids from the root down to ``group_id``."""
        return self._chains[group_id]

    @cached_property
    def phase_weights(self) -> np.ndarray:
        """``(n_devices, 3)`` share of each device's demand on phases a, b, c."""
        w = np.zeros((len(self.devices), 3))
        for i, d in enumerate(self.devices):
            if d.phase.is_three_phase:
                w[i, :] = 1.0 / 3.0
            else:
                w[i, d.phase.index] = 1.0
        return w

    @cached_property
    def group_matrix(self) -> np.ndarray:
        """``(n_devices, n_groups)`` membership indicator."""
        m = np.zeros((len(self.devices), len(self.groups)))
        index = {gid: j for j, gid in enumerate(self.group_ids)}
        for i, d in enumerate(self.devices):
            m[i, index[d.group]] = 1.0
        return m

    @cached_property
    def device_group_index(self) -> np.ndarray:
        index = {gid: j for j, gid in enumerate(self.group_ids)}
        return np.array([index[d.group] for d in self.devices], dtype=int)


def _check_states(topology: GridTopology, switch_states: Mapping[str, bool]) -> None:
    known = set(topology.sectionalizer_ids) | topology.tie_ids
    unknown = sorted(set(switch_states) - known)
    if unknown:
        raise TopologyError(f"unknown switch id(s): {unknown}")
    missing = [s for s in topology.sectionalizer_ids if s not in switch_states]
    if missing:
        raise TopologyError(f"switch states missing for sectionalizer(s): {missing}")


def connected_groups(topology: GridTopology, switch_states: Mapping[str, bool]) -> set[str]:
    _check_states(topology, switch_states)
    return {
        g.id
        for g in topology.groups
        if all(switch_states[s] for s in topology.chain(g.id))
    }


def connected_devices(topology: GridTopology, switch_states: Mapping[str, bool]) -> set[str]:
    """Ids of devices whose group and every upstream group are switched in."""
    groups = connected_groups(topology, switch_states)
    return {device_id for g in groups for device_id in topology.members[g]}
