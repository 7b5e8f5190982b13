"""Pydantic request/response models for the simulation service.

Requests carry fully inline data (spin systems as parameter dicts, shapes
as coefficient sets), never file paths: the service owns no filesystem
state and clients resolve their configs before calling.
"""

from __future__ import annotations

import math

from pydantic import BaseModel, Field, model_validator

from ..errors import ConfigError
from ..experiments import PulseSpec, SignalModel
from ..optimizer import AnnealingSchedule, ObjectiveSpec
from ..shapes import FourierShape, builtin_shape
from ..spin_model import SpinSystemConfig, spin_config_from_dict


class SpinSystemModel(BaseModel):
    zero_field_splitting_hz: float = 2.870e9
    gamma_e_hz_per_t: float = -28.024e9
    gamma_n14_hz_per_t: float = 3.077e6
    gamma_c13_hz_per_t: float = 10.705e6
    a_par_n_hz: float = 2.16e6
    a_perp_n_hz: float = 2.7e6
    b_field_t: tuple[float, float, float] = (0.0, 0.0, 0.0)
    c13_couplings_hz: list[tuple[float, float, float]] = Field(default_factory=list)
    line_override_hz: list[float] | None = None

    def resolve(self) -> SpinSystemConfig:
        return spin_config_from_dict(self.model_dump(), source="<request>")


class ShapeModel(BaseModel):
    """Inline Fourier coefficients or the name of a packaged shape."""

    builtin: str | None = None
    name: str = "custom"
    a0: float | None = None
    an: list[float] = Field(default_factory=list)
    bn: list[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _one_source(self):
        if self.builtin is None and self.a0 is None:
            raise ValueError("shape needs either a builtin name or inline coefficients")
        return self

    def resolve(self) -> FourierShape:
        if self.builtin is not None:
            return builtin_shape(self.builtin)
        bn = self.bn + [0.0] * (len(self.an) - len(self.bn))
        return FourierShape(a0=self.a0, an=tuple(self.an), bn=tuple(bn), name=self.name)


class PulseModel(BaseModel):
    kind: str = "fourier"  # rectangular | fourier | gaussian | hermite
    duration_ns: float = Field(gt=0)
    n_slices: int = 256
    flip_angle_rad: float = math.pi
    shape: ShapeModel | None = None
    truncation: float = 0.01
    quadratic_coefficient: float = 1.0

    def resolve(self) -> PulseSpec:
        shape = self.shape.resolve() if self.shape is not None else None
        if self.kind == "fourier" and shape is None:
            raise ConfigError("fourier pulse needs a shape", field="shape")
        return PulseSpec(
            duration=self.duration_ns * 1e-9,
            kind=self.kind,
            shape=shape,
            n_slices=self.n_slices,
            flip_angle=self.flip_angle_rad,
            truncation=self.truncation,
            quadratic_coefficient=self.quadratic_coefficient,
        )


class GridModel(BaseModel):
    """Uniform grid; `values` wins when given explicitly."""

    start: float | None = None
    stop: float | None = None
    points: int | None = Field(default=None, ge=1)
    values: list[float] | None = None

    def resolve(self) -> list[float]:
        if self.values is not None:
            return list(self.values)
        if self.start is None or self.stop is None or self.points is None:
            raise ConfigError("grid needs start/stop/points or explicit values")
        if self.points == 1:
            return [self.start]
        step = (self.stop - self.start) / (self.points - 1)
        return [self.start + k * step for k in range(self.points)]


class SignalModelModel(BaseModel):
    contrast: float = 1.0
    baseline: float = 0.0

    def resolve(self) -> SignalModel:
        return SignalModel(contrast=self.contrast, baseline=self.baseline)


class ObjectiveModel(BaseModel):
    passband_halfwidth: float = 0.25
    stopband_start: float = 0.6
    stopband_end: float = 3.0
    grid_points_per_band: int = 25
    n_harmonics: int = 12

    def resolve(self) -> ObjectiveSpec:
        return ObjectiveSpec(
            passband_halfwidth=self.passband_halfwidth,
            stopband_start=self.stopband_start,
            stopband_end=self.stopband_end,
            grid_points_per_band=self.grid_points_per_band,
            n_harmonics=self.n_harmonics,
        )


class ScheduleModel(BaseModel):
    initial_temperature: float = 2.0
    cooling_factor: float = 0.85
    steps_per_stage: int = 700
    stages: int = 30
    proposal_stddev: float = 0.25
    rng_seed: int = 0
    coefficient_bound: float = 2.5

    def resolve(self) -> AnnealingSchedule:
        return AnnealingSchedule(**self.model_dump())


# --- requests ------------------------------------------------------------


class LinesRequest(BaseModel):
    spin_system: SpinSystemModel


class ProfileRequest(BaseModel):
    pulse: PulseModel
    detuning_grid_hz: GridModel


class SweepRequest(BaseModel):
    pulse: PulseModel
    spin_system: SpinSystemModel
    carriers_hz: GridModel
    signal_model: SignalModelModel = SignalModelModel()


class RabiRequest(BaseModel):
    spin_system: SpinSystemModel
    carrier_hz: float = Field(gt=0)
    rabi_amplitude_rad_per_s: float
    times_s: GridModel
    signal_model: SignalModelModel = SignalModelModel()


class MultiFlipRequest(BaseModel):
    pulse: PulseModel
    spin_system: SpinSystemModel
    target_labels: list[str] = Field(min_length=1)
    n_flips: int = Field(ge=1)
    signal_model: SignalModelModel = SignalModelModel()


class OptimizeRequest(BaseModel):
    objective: ObjectiveModel = ObjectiveModel()
    schedule: ScheduleModel = ScheduleModel()
    refine_iters: int = Field(default=200, ge=0)


# --- responses -----------------------------------------------------------


class LineRow(BaseModel):
    frequency_hz: float
    weight: float
    label: str


class LinesResponse(BaseModel):
    lines: list[LineRow]


class ResolvedPulse(BaseModel):
    kind: str
    shape_name: str | None
    duration_ns: float
    n_slices: int
    flip_angle_rad: float


class ProfileRow(BaseModel):
    detuning_hz: float
    mz: float
    mxy: float


class ProfileResponse(BaseModel):
    rows: list[ProfileRow]
    pulse: ResolvedPulse


class SweepRow(BaseModel):
    carrier_hz: float
    signal: float


class SweepResponse(BaseModel):
    rows: list[SweepRow]
    pulse: ResolvedPulse
    line_frequencies_hz: list[float]


class RabiRow(BaseModel):
    time_s: float
    signal: float


class RabiResponse(BaseModel):
    rows: list[RabiRow]
    line_frequencies_hz: list[float]


class MultiFlipRow(BaseModel):
    flip: int
    selected_population: float
    spectator_population: float


class MultiFlipResponse(BaseModel):
    rows: list[MultiFlipRow]
    total_signal: list[float]
    pulse: ResolvedPulse
    line_frequencies_hz: list[float]
    carrier_hz: float


class ShapeOut(BaseModel):
    name: str
    a0: float
    an: list[float]
    bn: list[float]


class OptimizeResponse(BaseModel):
    shape: ShapeOut
    final_cost: float
    evaluations: int
    cost_trace: list[float]


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorBody(BaseModel):
    kind: str  # config | numerical
    message: str
