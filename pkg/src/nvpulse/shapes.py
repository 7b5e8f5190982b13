"""Time-sliced drive envelope synthesis.

Envelopes are piecewise-constant: per-slice duration, Rabi amplitude
(rad/s, signed) and carrier phase (rad).  Amplitude-modulated shapes
follow the pure-phase convention: the stored phase is 0 and a carrier
phase of pi is encoded as a negative amplitude, so a single microwave
channel suffices.

All constructors normalize the time-integral of the amplitude to the
requested flip angle.  Fourier shapes sample the series at slice
midpoints in scaled time u = t/T, which keeps the sampled flip angle
exact for even slice counts and makes the sample values independent of
the absolute duration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError, InvalidInputError, NormalizationImpossibleError

MAX_HARMONICS = 64
DEFAULT_SLICES = 256


@dataclass(frozen=True)
class FourierShape:
    """Dimensionless amplitude-modulation coefficients a0 + sum(an cos + bn sin)."""

    a0: float
    an: tuple[float, ...] = ()
    bn: tuple[float, ...] = ()
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "an", tuple(float(v) for v in self.an))
        object.__setattr__(self, "bn", tuple(float(v) for v in self.bn))
        object.__setattr__(self, "a0", float(self.a0))
        if len(self.an) != len(self.bn):
            raise InvalidInputError(
                f"an and bn must have equal length, got {len(self.an)} != {len(self.bn)}"
            )
        if len(self.an) > MAX_HARMONICS:
            raise InvalidInputError(f"at most {MAX_HARMONICS} harmonics supported")
        values = (self.a0, *self.an, *self.bn)
        if not all(math.isfinite(v) for v in values):
            raise InvalidInputError("shape coefficients must be finite")

    @property
    def n_harmonics(self) -> int:
        return len(self.an)

    def coefficients(self) -> np.ndarray:
        """Flat coefficient vector [a0, an..., bn...]."""
        return np.array([self.a0, *self.an, *self.bn], dtype=float)


@dataclass(frozen=True)
class PulseEnvelope:
    """Piecewise-constant drive waveform."""

    durations: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray
    total_duration: float = field(init=False)

    def __post_init__(self):
        durations = np.ascontiguousarray(self.durations, dtype=float)
        amplitudes = np.ascontiguousarray(self.amplitudes, dtype=float)
        phases = np.ascontiguousarray(self.phases, dtype=float)
        if not (durations.shape == amplitudes.shape == phases.shape) or durations.ndim != 1:
            raise InvalidInputError("durations, amplitudes, phases must be equal-length 1-d")
        if durations.size == 0:
            raise InvalidInputError("envelope needs at least one slice")
        if not np.all(durations > 0):
            raise InvalidInputError("all slice durations must be positive")
        if not (np.all(np.isfinite(amplitudes)) and np.all(np.isfinite(phases))):
            raise InvalidInputError("amplitudes and phases must be finite")
        for arr in (durations, amplitudes, phases):
            arr.flags.writeable = False
        object.__setattr__(self, "durations", durations)
        object.__setattr__(self, "amplitudes", amplitudes)
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "total_duration", float(np.sum(durations)))

    @property
    def n_slices(self) -> int:
        return self.durations.size

    def flip_angle(self) -> float:
        """Time-integral of the signed amplitude (rad)."""
        return float(np.sum(self.amplitudes * self.durations))


def rectangular(duration: float, flip_angle: float) -> PulseEnvelope:
    """Constant drive: one slice with amplitude flip_angle/duration, phase 0."""
    if not (duration > 0):
        raise InvalidInputError(f"duration must be positive, got {duration}")
    amp = flip_angle / duration
    return PulseEnvelope(np.array([duration]), np.array([amp]), np.zeros(1))


def _midpoints(n_slices: int) -> np.ndarray:
    return (np.arange(n_slices) + 0.5) / n_slices


def fourier_samples(shape: FourierShape, n_slices: int) -> np.ndarray:
    """Dimensionless series values at slice midpoints in scaled time."""
    u = _midpoints(n_slices)
    out = np.full(n_slices, shape.a0)
    for n in range(1, shape.n_harmonics + 1):
        out += shape.an[n - 1] * np.cos(2 * np.pi * n * u)
        out += shape.bn[n - 1] * np.sin(2 * np.pi * n * u)
    return out


def synthesize_fourier(
    shape: FourierShape,
    duration: float,
    n_slices: int = DEFAULT_SLICES,
    flip_angle: float = np.pi,
) -> PulseEnvelope:
    """Sample a Fourier shape into an envelope with exact flip-angle normalization.

    The base amplitude is flip_angle / (a0 * duration); the harmonic terms
    integrate to zero over the full period, so the envelope area equals
    flip_angle regardless of the higher coefficients.
    """
    if not (duration > 0):
        raise InvalidInputError(f"duration must be positive, got {duration}")
    if n_slices < 32:
        raise InvalidInputError(f"n_slices must be >= 32, got {n_slices}")
    if shape.a0 == 0.0:
        raise NormalizationImpossibleError(
            f"shape {shape.name!r} has a0 = 0; flip-angle normalization is undefined"
        )
    omega1 = flip_angle / (shape.a0 * duration)
    amps = omega1 * fourier_samples(shape, n_slices)
    dt = np.full(n_slices, duration / n_slices)
    return PulseEnvelope(dt, amps, np.zeros(n_slices))


def _sampled_envelope(values: np.ndarray, duration: float, flip_angle: float) -> PulseEnvelope:
    dt = duration / values.size
    area = float(np.sum(values) * dt)
    if abs(area) < 1e-300:
        raise NormalizationImpossibleError("envelope integrates to zero; cannot normalize")
    return PulseEnvelope(
        np.full(values.size, dt), values * (flip_angle / area), np.zeros(values.size)
    )


def gaussian(
    duration: float,
    flip_angle: float,
    truncation: float,
    n_slices: int = DEFAULT_SLICES,
) -> PulseEnvelope:
    """Gaussian envelope whose edge value is truncation x peak, area-normalized.

    truncation = 1 degenerates to a constant (rectangular) envelope.
    """
    if not (duration > 0):
        raise InvalidInputError(f"duration must be positive, got {duration}")
    if not (0 < truncation <= 1):
        raise InvalidInputError(f"truncation must be in (0, 1], got {truncation}")
    u = _midpoints(n_slices) - 0.5
    if truncation == 1.0:
        values = np.ones(n_slices)
    else:
        sigma = 0.5 / math.sqrt(2 * math.log(1 / truncation))
        values = np.exp(-(u**2) / (2 * sigma**2))
    return _sampled_envelope(values, duration, flip_angle)


def hermite(
    duration: float,
    flip_angle: float,
    quadratic_coefficient: float,
    n_slices: int = DEFAULT_SLICES,
) -> PulseEnvelope:
    """Hermite envelope (1 - c x^2) exp(-x^2), x spanning +-3 over the pulse."""
    if not (duration > 0):
        raise InvalidInputError(f"duration must be positive, got {duration}")
    if not math.isfinite(quadratic_coefficient):
        raise InvalidInputError("quadratic coefficient must be finite")
    x = 6.0 * (_midpoints(n_slices) - 0.5)
    values = (1.0 - quadratic_coefficient * x**2) * np.exp(-(x**2))
    return _sampled_envelope(values, duration, flip_angle)


# --- shape coefficient files -------------------------------------------------

_BUILTIN = {"reburp180": "reburp180.json"}


def builtin_shape_names() -> list[str]:
    return sorted(_BUILTIN)


def load_shape_file(path: str | Path) -> FourierShape:
    """Load a shape coefficient file (JSON).

    Expected keys: name, a0, an, bn, optional inversion flag and provenance
    text.  bn may be omitted or shorter than an; missing sine terms are zero
    (symmetric shapes).  Inversion shapes with a0 = 0 are rejected here so the
    problem surfaces at config time rather than at synthesis time.
    """
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"shape file not found: {p}")
    return parse_shape_json(p.read_text(), source=str(p))


def parse_shape_json(text: str, source: str = "<inline>") -> FourierShape:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"shape file is not valid JSON: {exc}", path=source) from exc
    if not isinstance(raw, dict):
        raise ConfigError("shape file must contain a JSON object", path=source)
    for key in ("a0",):
        if key not in raw:
            raise ConfigError("missing required key", path=source, field=key)
    an = list(raw.get("an", []))
    bn = list(raw.get("bn", []))
    if len(bn) > len(an):
        raise ConfigError("bn longer than an", path=source, field="bn")
    bn = bn + [0.0] * (len(an) - len(bn))
    try:
        shape = FourierShape(
            a0=float(raw["a0"]), an=tuple(an), bn=tuple(bn), name=str(raw.get("name", "custom"))
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid shape coefficients: {exc}", path=source) from exc
    if raw.get("inversion", False) and shape.a0 == 0.0:
        raise ConfigError(
            "inversion shape has a0 = 0; flip-angle normalization impossible",
            path=source,
            field="a0",
        )
    return shape


def shape_to_json(shape: FourierShape, inversion: bool = True, provenance: str = "") -> str:
    return json.dumps(
        {
            "name": shape.name,
            "inversion": inversion,
            "a0": shape.a0,
            "an": list(shape.an),
            "bn": list(shape.bn),
            "provenance": provenance,
        },
        indent=2,
    )


def builtin_shape(name: str) -> FourierShape:
    """Load one of the shapes shipped with the package (see builtin_shape_names)."""
    if name not in _BUILTIN:
        raise ConfigError(f"unknown built-in shape {name!r}; known: {builtin_shape_names()}")
    text = resources.files("nvpulse").joinpath("data", _BUILTIN[name]).read_text()
    return parse_shape_json(text, source=f"builtin:{name}")


def resolve_shape(name_or_path: str) -> FourierShape:
    """Resolve a shape reference: built-in name, or path to a coefficient file."""
    if name_or_path in _BUILTIN:
        return builtin_shape(name_or_path)
    return load_shape_file(name_or_path)
