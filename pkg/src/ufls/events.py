"""Timestamped state transitions recorded during a run."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class EventKind(str, Enum):
    DEVICE_TRIP = "device_trip"
    DEVICE_RECONNECT = "device_reconnect"
    TRIGGER_SET = "trigger_set"
    TRIGGER_CLEAR = "trigger_clear"
    SETPOINT_CHANGE = "setpoint_change"
    STAGE_ADVANCE = "stage_advance"
    RESERVE_UNRECOVERABLE = "reserve_unrecoverable"
    SWITCH_CLOSE = "switch_close"
    MOTOR_START = "motor_start"


@dataclass(frozen=True, slots=True, order=True)
class EventRecord:
    """One transition; records sort by ``(t, seq)``."""

    t: float
    seq: int
    kind: EventKind = field(compare=False)
    subject: str = field(compare=False)
    detail: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {
            "t": round(self.t, 6),
            "kind": self.kind.value,
            "subject": self.subject,
            "detail": round(self.detail, 6),
        }


@dataclass
class EventLog:
    """Append-only event sink that numbers records in arrival order."""

    records: list[EventRecord] = field(default_factory=list)

    def emit(self, t: float, kind: EventKind, subject: str, detail: float = 0.0) -> EventRecord:
        record = EventRecord(t=t, seq=len(self.records), kind=kind, subject=subject, detail=float(detail))
        self.records.append(record)
        return record

    def of_kind(self, *kinds: EventKind) -> list[EventRecord]:
        return [r for r in self.records if r.kind in kinds]

    def __len__(self) -> int:
        return len(self.records)
