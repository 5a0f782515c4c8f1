"""Phase attachments, per-phase value carriers and phasors."""

from __future__ import annotations

import cmath
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from enum import Enum
from typing import Annotated, Generic, TypeVar

import numpy as np
from pydantic import Field

T = TypeVar("T")
U = TypeVar("U")

NOMINAL_FREQUENCY = 60.0

# Sanity envelope for any frequency seen during a run.
FrequencyHz = Annotated[float, Field(ge=55.0, le=65.0)]


class Phase(str, Enum):
    """Phase attachment of a device.

    ``ABC`` marks a three-phase device; the other three values are single phases
    and index a :class:`PhaseTriplet`.
    """

    A = "a"
    B = "b"
    C = "c"
    ABC = "abc"

    @property
    def is_three_phase(self) -> bool:
        return self is Phase.ABC

    @classmethod
    def singles(cls) -> tuple[Phase, Phase, Phase]:
        return (cls.A, cls.B, cls.C)

    @property
    def index(self) -> int:
        if self is Phase.ABC:
            raise ValueError("three-phase attachment has no single phase index")
        return "abc".index(self.value)


@dataclass(frozen=True, slots=True)
class PhaseTriplet(Generic[T]):
    """One value per phase a, b, c."""

    a: T
    b: T
    c: T

    def __getitem__(self, phase: Phase) -> T:
        if phase is Phase.A:
            return self.a
        if phase is Phase.B:
            return self.b
        if phase is Phase.C:
            return self.c
        raise KeyError(f"cannot index a triplet by {phase!r}")

    def __iter__(self) -> Iterator[T]:
        yield self.a
        yield self.b
        yield self.c

    def map(self, fn: Callable[[T], U]) -> PhaseTriplet[U]:
        return PhaseTriplet(fn(self.a), fn(self.b), fn(self.c))

    def max(self) -> T:
        return max(self.a, self.b, self.c)

    def min(self) -> T:
        return min(self.a, self.b, self.c)

    def avg(self) -> float:
        return (self.a + self.b + self.c) / 3.0

    def total(self) -> float:
        return self.a + self.b + self.c

    def argmax(self) -> Phase:
        """Phase holding the largest value; ties go to the earlier of A < B < C."""
        best = Phase.A
        for phase in (Phase.B, Phase.C):
            if self[phase] > self[best]:
                best = phase
        return best

    def to_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c])

    @classmethod
    def from_array(cls, values) -> PhaseTriplet:
        a, b, c = values
        return cls(a, b, c)

    @classmethod
    def uniform(cls, value: T) -> PhaseTriplet[T]:
        return cls(value, value, value)


def _normalize_angle(angle: float) -> float:
    wrapped = math.remainder(angle, 2.0 * math.pi)
    # remainder lands on [-pi, pi]; fold -pi onto +pi
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True, slots=True)
class Phasor:
    """Polar phasor with magnitude in p.u. and angle in radians on (-pi, pi]."""

    magnitude: float
    angle: float = 0.0

    def __post_init__(self):
        if self.magnitude < 0:
            raise ValueError(f"phasor magnitude must be >= 0, got {self.magnitude}")
        object.__setattr__(self, "angle", _normalize_angle(self.angle))

    @classmethod
    def from_complex(cls, value: complex) -> Phasor:
        return cls(abs(value), cmath.phase(value))

    @classmethod
    def from_degrees(cls, magnitude: float, degrees: float) -> Phasor:
        return cls(magnitude, math.radians(degrees))

    def to_complex(self) -> complex:
        return cmath.rect(self.magnitude, self.angle)


# a, b, c references: 0, -120, +120 degrees
BALANCED_ANGLES = PhaseTriplet(0.0, -2.0 * math.pi / 3.0, 2.0 * math.pi / 3.0)


def balanced_set(magnitude: float = 1.0) -> PhaseTriplet[Phasor]:
    return BALANCED_ANGLES.map(lambda angle: Phasor(magnitude, angle))
