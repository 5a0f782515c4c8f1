"""Parameters of the BESS power-reserve controller."""

from __future__ import annotations

from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ufls.core.phases import FrequencyHz, Phase, PhaseTriplet


def upper_threshold(s_pr: float) -> float:
    """Loading above which the reserve requirement is violated: ``1 - s_pr``."""
    if not 0.0 <= s_pr < 1.0:
        raise ValueError(f"s_pr must be within [0, 1), got {s_pr}")
    return 1.0 - s_pr


class PerPhaseMode(BaseModel):
    """Lower the frequency to the setpoint of the most loaded phase."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["per_phase"] = "per_phase"
    f_a: FrequencyHz = 59.85
    f_b: FrequencyHz = 59.55
    f_c: FrequencyHz = 59.25

    def setpoint(self, phase: Phase) -> float:
        return PhaseTriplet(self.f_a, self.f_b, self.f_c)[phase]


class SectionalizerMode(BaseModel):
    """Walk down a descending list of sectionalizer setpoints."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["sectionalizer"] = "sectionalizer"
    setpoints: tuple[FrequencyHz, ...] = Field(min_length=1)
    dwell: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def _strictly_decreasing(self) -> SectionalizerMode:
        pairs = zip(self.setpoints, self.setpoints[1:], strict=False)
        if any(later >= earlier for earlier, later in pairs):
            raise ValueError(f"sectionalizer setpoints must be strictly decreasing, got {list(self.setpoints)}")
        return self


ReserveMode = Annotated[PerPhaseMode | SectionalizerMode, Field(discriminator="kind")]


class ReserveParams(BaseModel):
    """Thresholds, timers and slew limit of the reserve controller."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    s_pr: float = Field(default=0.1, ge=0, lt=1)
    s_th_low: float = Field(default=0.87, gt=0)
    ds_th: float = Field(default=0.5, gt=0)
    tau_trigger_normal: float = Field(default=0.02, ge=0)
    tau_trigger_motor: float = Field(default=10.0, ge=0)
    tau_th_rec: float = Field(default=0.02, ge=0)
    tau_th_f: float = Field(default=1.0, ge=0)
    f_ramp: float = Field(default=0.5, gt=0)
    rocolp_window: float | None = Field(default=None, gt=0)
    rocolp_basis: Literal["total", "phase"] = "total"
    enabled: bool = True
    mode: ReserveMode = Field(default_factory=PerPhaseMode)

    @property
    def s_th_up(self) -> float:
        return upper_threshold(self.s_pr)

    @model_validator(mode="after")
    def _thresholds_ordered(self) -> ReserveParams:
        if not self.s_th_low < self.s_th_up <= 1.0:
            raise ValueError(
                f"need s_th_low < s_th_up <= 1, got s_th_low={self.s_th_low}, s_th_up={self.s_th_up}"
            )
        return self

    def window_steps(self, dt: float) -> int:
        if self.rocolp_window is None:
            return 1
        return max(1, round(self.rocolp_window / dt))
