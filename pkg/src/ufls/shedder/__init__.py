"""Device-level UFLS controllers.

Example:
    from ufls.shedder import UflsParams, UflsDeviceState, device_rng, step_device

    params = UflsParams(f_th=59.85, phase="a")
    rng = device_rng(seed=1, device_id="wh_01")
    state = UflsDeviceState.initial(params, rng)
    state = step_device(state, params, f=59.85, dt=0.01, rng=rng)
"""

from ufls.shedder.device import (
    DeviceMode,
    UflsDeviceState,
    UflsParams,
    advance_device,
    band_match,
    device_rng,
    draw_delays,
    effective_on,
    entry_age,
    max_tripping_delay_bound,
    sense_device,
    step_device,
)
from ufls.shedder.fleet import DeviceFleet, FleetStep

__all__ = [
    "DeviceFleet",
    "DeviceMode",
    "FleetStep",
    "UflsDeviceState",
    "UflsParams",
    "advance_device",
    "band_match",
    "device_rng",
    "draw_delays",
    "effective_on",
    "entry_age",
    "max_tripping_delay_bound",
    "sense_device",
    "step_device",
]
