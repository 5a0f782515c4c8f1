"""Symmetrical components and the phase-imbalance metrics.

Conventions
-----------
Phase a is the angle reference and the abc sequence rotates -120 degrees per
phase, so a balanced positive-sequence set is ``1∠0, 1∠-120, 1∠120``.

PUF is defined here as ``max_x |S_x - avg(S)| / avg(S)``. It is 0 for equal
phases and dimensionless. Swap :func:`puf` to use another definition.
"""

from __future__ import annotations

import numpy as np

from ufls.core.phases import Phasor, PhaseTriplet
from ufls.errors import UndefinedMetricError

A_OP = np.exp(2j * np.pi / 3.0)

# rows: zero, positive, negative sequence
FORTESCUE = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, A_OP, A_OP**2],
        [1.0, A_OP**2, A_OP],
    ]
) / 3.0

FORTESCUE_INV = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, A_OP**2, A_OP],
        [1.0, A_OP, A_OP**2],
    ]
)

_ZERO_TOL = 1e-12


def sequence_components(va: Phasor, vb: Phasor, vc: Phasor) -> tuple[Phasor, Phasor, Phasor]:
    """Return the zero, positive and negative sequence phasors of a phase set."""
    abc = np.array([va.to_complex(), vb.to_complex(), vc.to_complex()])
    v0, v1, v2 = FORTESCUE @ abc
    return Phasor.from_complex(v0), Phasor.from_complex(v1), Phasor.from_complex(v2)


def phase_components(v0: Phasor, v1: Phasor, v2: Phasor) -> tuple[Phasor, Phasor, Phasor]:
    """Inverse transform: sequence phasors back to phases a, b, c."""
    seq = np.array([v0.to_complex(), v1.to_complex(), v2.to_complex()])
    va, vb, vc = FORTESCUE_INV @ seq
    return Phasor.from_complex(va), Phasor.from_complex(vb), Phasor.from_complex(vc)


def vuf(va: Phasor, vb: Phasor, vc: Phasor) -> float:
    """Voltage unbalance factor in percent, 100 * |v2| / |v1|."""
    _, v1, v2 = sequence_components(va, vb, vc)
    if v1.magnitude <= _ZERO_TOL:
        raise UndefinedMetricError("VUF undefined: positive-sequence voltage is zero")
    return 100.0 * v2.magnitude / v1.magnitude


def puf(s: PhaseTriplet[float]) -> float:
    """Power unbalance factor of a per-phase power triplet."""
    avg = s.avg()
    if avg <= 0.0:
        raise UndefinedMetricError("PUF undefined: average phase power is zero")
    return max(abs(x - avg) for x in s) / avg


def puf_series(s: np.ndarray) -> np.ndarray:
    """Vectorised PUF over an ``(n, 3)`` power array; NaN where undefined."""
    avg = s.mean(axis=1)
    out = np.full(len(s), np.nan)
    defined = avg > 0.0
    dev = np.abs(s[defined] - avg[defined, None]).max(axis=1)
    out[defined] = dev / avg[defined]
    return out


def vuf_series(v: np.ndarray) -> np.ndarray:
    """Vectorised VUF (percent) over an ``(n, 3)`` complex voltage array; NaN where undefined."""
    seq = v @ FORTESCUE.T
    v1 = np.abs(seq[:, 1])
    v2 = np.abs(seq[:, 2])
    out = np.full(len(v), np.nan)
    defined = v1 > _ZERO_TOL
    out[defined] = 100.0 * v2[defined] / v1[defined]
    return out
