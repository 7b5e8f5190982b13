"""Simulated experiments: pulsed frequency sweep, Rabi beating, multi-flip.

Populations are reported normalized by default (SignalModel contrast 1,
baseline 0); contrast/baseline exist only to produce figure-lookalike
traces, never to hide physics.  Line weights are equal for an unpolarized
nuclear bath, which is how LineSet construction assigns them.

Everything is pure: results are plain immutable records of the inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .propagator import pulse_unitaries
from .shapes import FourierShape, PulseEnvelope, gaussian, hermite, rectangular, synthesize_fourier
from .spin_model import LineSet, detuned_lines


@dataclass(frozen=True)
class SignalModel:
    """Affine map from mean m_s = 0 population to detected signal."""

    contrast: float = 1.0
    baseline: float = 0.0

    def __post_init__(self):
        if not (0 < self.contrast <= 1):
            raise InvalidInputError(f"contrast must be in (0, 1], got {self.contrast}")
        if self.baseline < 0 or self.baseline + self.contrast > 1 + 1e-9:
            raise InvalidInputError("baseline + contrast must stay within [0, 1]")

    def map(self, population):
        return self.baseline + self.contrast * np.asarray(population, dtype=float)


@dataclass(frozen=True)
class PulseSpec:
    """Recipe for building an envelope; the sweep rebuilds it once per run."""

    duration: float
    kind: str = "fourier"  # rectangular | fourier | gaussian | hermite
    shape: FourierShape | None = None
    n_slices: int = 256
    flip_angle: float = math.pi
    truncation: float = 0.01
    quadratic_coefficient: float = 1.0

    def build(self) -> PulseEnvelope:
        if self.kind == "rectangular":
            return rectangular(self.duration, self.flip_angle)
        if self.kind == "fourier":
            if self.shape is None:
                raise InvalidInputError("fourier pulse spec needs a shape")
            return synthesize_fourier(self.shape, self.duration, self.n_slices, self.flip_angle)
        if self.kind == "gaussian":
            return gaussian(self.duration, self.flip_angle, self.truncation, self.n_slices)
        if self.kind == "hermite":
            return hermite(
                self.duration, self.flip_angle, self.quadratic_coefficient, self.n_slices
            )
        raise InvalidInputError(f"unknown pulse kind {self.kind!r}")


@dataclass(frozen=True)
class SweepResult:
    carriers: np.ndarray
    signal: np.ndarray

    def __post_init__(self):
        carriers = np.ascontiguousarray(self.carriers, dtype=float)
        signal = np.ascontiguousarray(self.signal, dtype=float)
        if carriers.shape != signal.shape or carriers.ndim != 1:
            raise InvalidInputError("carriers and signal must be equal-length 1-d")
        if np.any(signal < -1e-9) or np.any(signal > 1 + 1e-9):
            raise InvalidInputError("signal out of [0, 1]")
        for arr in (carriers, signal):
            arr.flags.writeable = False
        object.__setattr__(self, "carriers", carriers)
        object.__setattr__(self, "signal", signal)


@dataclass(frozen=True)
class RabiTrace:
    times: np.ndarray
    signal: np.ndarray

    def __post_init__(self):
        times = np.ascontiguousarray(self.times, dtype=float)
        signal = np.ascontiguousarray(self.signal, dtype=float)
        if times.shape != signal.shape or times.ndim != 1:
            raise InvalidInputError("times and signal must be equal-length 1-d")
        for arr in (times, signal):
            arr.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "signal", signal)


@dataclass(frozen=True)
class MultiFlipResult:
    """Population record after 0..n flips.

    selected/spectator are plain means over the target and protected lines;
    total_signal is the weighted all-line mean mapped through the signal
    model, which is what a fluorescence readout actually sees.
    """

    flip_index: tuple[int, ...]
    selected_population: np.ndarray
    spectator_population: np.ndarray
    total_signal: np.ndarray

    def __post_init__(self):
        sel = np.ascontiguousarray(self.selected_population, dtype=float)
        spc = np.ascontiguousarray(self.spectator_population, dtype=float)
        tot = np.ascontiguousarray(self.total_signal, dtype=float)
        n = len(self.flip_index)
        if not (sel.shape == spc.shape == tot.shape == (n,)):
            raise InvalidInputError("population series must match flip_index length")
        for arr in (sel, spc):
            if np.any(arr < -1e-9) or np.any(arr > 1 + 1e-9):
                raise InvalidInputError("populations out of [0, 1]")
        if abs(sel[0] - 1) > 1e-9 or abs(spc[0] - 1) > 1e-9:
            raise InvalidInputError("flip 0 must start from the polarized state")
        for arr in (sel, spc, tot):
            arr.flags.writeable = False
        object.__setattr__(self, "flip_index", tuple(int(i) for i in self.flip_index))
        object.__setattr__(self, "selected_population", sel)
        object.__setattr__(self, "spectator_population", spc)
        object.__setattr__(self, "total_signal", tot)

    @property
    def n_flips(self) -> int:
        return len(self.flip_index) - 1


def _populations_from_up(unitaries: np.ndarray) -> np.ndarray:
    """m_s = 0 population after applying (…, 2, 2) unitaries to spin-up."""
    return np.abs(unitaries[..., 0, 0]) ** 2


def frequency_sweep(pulse: PulseSpec, lines: LineSet, carriers, model: SignalModel) -> SweepResult:
    """Pulsed-ODMR style sweep: apply the pulse at each carrier, read the signal.

    The envelope depends only on the pulse spec; the carrier enters through
    the per-line detunings, so the envelope is built once and a single
    batched propagation covers the whole (carrier x line) grid.
    """
    grid = np.asarray(carriers, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise InvalidInputError("need at least 2 carriers")
    if not np.all(np.diff(grid) > 0):
        raise InvalidInputError("carriers must be strictly ascending")
    envelope = pulse.build()
    freqs = lines.frequencies()
    weights = lines.weights()
    detunings = (freqs[None, :] - grid[:, None]).ravel()
    pops = _populations_from_up(pulse_unitaries(envelope, detunings)).reshape(grid.size, -1)
    mean_pop = pops @ weights
    return SweepResult(carriers=grid, signal=model.map(mean_pop))


def rabi_beating(
    rabi_amplitude: float, lines: LineSet, carrier: float, times, model: SignalModel
) -> RabiTrace:
    """Weighted multi-line Rabi trace of a constant drive at a fixed carrier."""
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise InvalidInputError("times must be a non-empty 1-d array")
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise InvalidInputError("times must be strictly ascending")
    dets = detuned_lines(lines, carrier)
    weights = lines.weights()
    mz = np.empty((len(dets), t.size))
    for i, (detuning, _w, _lbl) in enumerate(dets):
        delta = 2 * np.pi * detuning
        eff_sq = rabi_amplitude**2 + delta**2
        if eff_sq == 0.0:
            mz[i] = 1.0
        else:
            mz[i] = 1.0 + (rabi_amplitude**2 / eff_sq) * (np.cos(np.sqrt(eff_sq) * t) - 1.0)
    mean_pop = weights @ ((1.0 + mz) / 2.0)
    return RabiTrace(times=t, signal=model.map(mean_pop))


def multi_flip(
    envelope: PulseEnvelope,
    lines: LineSet,
    target_labels,
    n_flips: int,
    model: SignalModel,
) -> MultiFlipResult:
    """Repeatedly apply one inversion pulse, recording populations per flip.

    The carrier sits at the center of the target band (midpoint of the
    extreme target frequencies).  Per line the same pulse unitary is reused
    and the state accumulates across flips; reading a population after each
    flip matches re-running k pulses from the polarized state.
    """
    if n_flips < 1:
        raise InvalidInputError("n_flips must be >= 1")
    targets = set(target_labels)
    if not targets:
        raise InvalidInputError("target_labels must be non-empty")
    all_labels = lines.labels()
    unknown = targets - set(all_labels)
    if unknown:
        raise InvalidInputError(f"unknown target labels: {sorted(unknown)}")
    is_target = np.array([lbl in targets for lbl in all_labels])
    if is_target.all():
        raise InvalidInputError("target_labels must be a strict subset of the lines")

    freqs = lines.frequencies()
    weights = lines.weights()
    carrier = 0.5 * (freqs[is_target].min() + freqs[is_target].max())
    detunings = np.array([d for d, _w, _lbl in detuned_lines(lines, carrier)])

    unitaries = pulse_unitaries(envelope, detunings)
    psi = np.zeros((len(freqs), 2), dtype=complex)
    psi[:, 0] = 1.0

    sel = [1.0]
    spc = [1.0]
    tot = [float(model.map(weights @ np.ones(len(freqs))))]
    for _ in range(n_flips):
        psi = np.einsum("gij,gj->gi", unitaries, psi)
        pops = np.abs(psi[:, 0]) ** 2
        sel.append(float(np.mean(pops[is_target])))
        spc.append(float(np.mean(pops[~is_target])))
        tot.append(float(model.map(weights @ pops)))

    return MultiFlipResult(
        flip_index=tuple(range(n_flips + 1)),
        selected_population=np.array(sel),
        spectator_population=np.array(spc),
        total_signal=np.array(tot),
    )


def flip_amplitude(result: MultiFlipResult, k: int) -> float:
    """Selected-population change of the k-th flip, |p[k] - p[k-1]|."""
    if not (1 <= k <= result.n_flips):
        raise InvalidInputError(f"flip index k={k} outside 1..{result.n_flips}")
    return float(abs(result.selected_population[k] - result.selected_population[k - 1]))
