"""Parametric PCC and load-bus voltage model.

The grid-forming BESS holds the PCC near 1 p.u.; a step in phase loading dips
that phase's magnitude by ``voltage_sag_gain`` per p.u. of step, and the dip
decays with ``voltage_time_constant``. The load bus sits behind one aggregate
feeder impedance per phase. Powers are treated as unity power factor.
"""

from __future__ import annotations

import math

from ufls.core.phases import BALANCED_ANGLES, Phasor, PhaseTriplet
from ufls.models.scenario import FeederElectrical


def bus_voltages(
    s: PhaseTriplet[float],
    electrical: FeederElectrical,
    prev_v: PhaseTriplet[Phasor],
    dt: float,
    prev_s: PhaseTriplet[float] | None = None,
) -> tuple[PhaseTriplet[Phasor], PhaseTriplet[Phasor]]:
    """Return (PCC, load-bus) phasors after one step of ``dt``.

    ``prev_s`` is the previous step's loading; omitted means no step this tick.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    decay = math.exp(-dt / electrical.voltage_time_constant)
    gain = electrical.voltage_sag_gain
    z = electrical.impedance
    if prev_s is None:
        prev_s = s

    pcc = []
    load_bus = []
    for angle, v_prev, s_x, s_prev, z_x in zip(BALANCED_ANGLES, prev_v, s, prev_s, z, strict=True):
        mag = 1.0 + (v_prev.magnitude - 1.0) * decay - gain * abs(s_x - s_prev)
        v = Phasor(max(mag, 0.0), angle)
        vc = v.to_complex()
        current = (complex(s_x) / vc).conjugate() if v.magnitude > 0.0 else 0j
        pcc.append(v)
        load_bus.append(Phasor.from_complex(vc - z_x * current))
    return PhaseTriplet(*pcc), PhaseTriplet(*load_bus)
