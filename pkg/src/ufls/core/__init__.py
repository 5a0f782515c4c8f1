"""Per-phase arithmetic, phasors and unbalance metrics.

Example:
    from ufls.core import PhaseTriplet, puf

    puf(PhaseTriplet(0.9, 0.6, 0.6))  # 0.2857...
"""

from ufls.core.phases import (
    BALANCED_ANGLES,
    NOMINAL_FREQUENCY,
    FrequencyHz,
    Phase,
    Phasor,
    PhaseTriplet,
    balanced_set,
)
from ufls.core.unbalance import (
    phase_components,
    puf,
    puf_series,
    sequence_components,
    vuf,
    vuf_series,
)

__all__ = [
    "BALANCED_ANGLES",
    "NOMINAL_FREQUENCY",
    "FrequencyHz",
    "Phase",
    "PhaseTriplet",
    "Phasor",
    "balanced_set",
    "phase_components",
    "puf",
    "puf_series",
    "sequence_components",
    "vuf",
    "vuf_series",
]
