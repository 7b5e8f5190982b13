"""Two-level propagation in the rotating frame.

Each envelope slice generates the exact unitary

    U = exp(-i (dt/2) [delta sigma_z + Omega (cos(phi) sigma_x + sin(phi) sigma_y)])

with delta = 2 pi * detuning_hz, evaluated in closed form through the
axis-angle identity exp(-i (theta/2) n.sigma) = cos(theta/2) I
- i sin(theta/2) n.sigma.  A pulse is the ordered product of its slice
unitaries.  No ODE integration and no relaxation terms anywhere.

Internally rotations are tracked as quaternion components
(w, x, y, z) <-> w I - i (x sigma_x + y sigma_y + z sigma_z), composed
with elementwise real-array arithmetic.  Every per-detuning result is
therefore independent of how many detunings are evaluated in one batch;
profile values are pointwise functions of detuning and batching is purely
a speed concern.

Detunings are ordinary frequencies (Hz) at every interface and converted
to angular frequencies internally.  All operations are pure; everything
here is safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .shapes import PulseEnvelope


@dataclass(frozen=True)
class TwoLevelUnitary:
    """2x2 unitary, validated on construction."""

    entries: np.ndarray

    def __post_init__(self):
        u = np.ascontiguousarray(self.entries, dtype=complex)
        if u.shape != (2, 2):
            raise InvalidInputError(f"expected a 2x2 matrix, got shape {u.shape}")
        err = np.max(np.abs(u.conj().T @ u - np.eye(2)))
        if err > 1e-10:
            raise InvalidInputError(f"matrix is not unitary (|U†U - I| = {err:.2e})")
        if abs(abs(np.linalg.det(u)) - 1.0) > 1e-10:
            raise InvalidInputError("matrix determinant does not have unit modulus")
        u.flags.writeable = False
        object.__setattr__(self, "entries", u)

    def __matmul__(self, other: "TwoLevelUnitary") -> "TwoLevelUnitary":
        return TwoLevelUnitary(self.entries @ other.entries)


@dataclass(frozen=True)
class BlochVector:
    mx: float
    my: float
    mz: float

    def __post_init__(self):
        n = self.norm()
        if not np.isfinite(n) or n > 1 + 1e-9:
            raise InvalidInputError(f"Bloch vector norm {n} exceeds 1")

    def norm(self) -> float:
        return float(np.sqrt(self.mx**2 + self.my**2 + self.mz**2))


SPIN_UP = BlochVector(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class ResponseProfile:
    """Excitation profile: final mz and |mxy| on a detuning grid."""

    detunings: np.ndarray
    mz: np.ndarray
    mxy: np.ndarray

    def __post_init__(self):
        d = np.ascontiguousarray(self.detunings, dtype=float)
        mz = np.ascontiguousarray(self.mz, dtype=float)
        mxy = np.ascontiguousarray(self.mxy, dtype=float)
        if not (d.shape == mz.shape == mxy.shape) or d.ndim != 1:
            raise InvalidInputError("profile columns must be equal-length 1-d arrays")
        if d.size > 1 and not np.all(np.diff(d) > 0):
            raise InvalidInputError("detunings must be strictly ascending")
        for arr in (d, mz, mxy):
            arr.flags.writeable = False
        object.__setattr__(self, "detunings", d)
        object.__setattr__(self, "mz", mz)
        object.__setattr__(self, "mxy", mxy)


# --- quaternion engine -------------------------------------------------------


def _slice_rotors(durations, amplitudes, phases, delta):
    """Quaternion components of every slice unitary.

    durations/amplitudes/phases: (L,) arrays; delta: (G,) angular detunings.
    Returns four (L, G) float arrays.
    """
    dt = durations[:, None]
    omega = amplitudes[:, None]
    total = np.sqrt(omega**2 + delta[None, :] ** 2)  # rotation rate (rad/s)
    half = (0.5 * dt) * total
    w = np.cos(half)
    # sin(theta/2)/|rate| with the zero-rate limit dt/2
    k = np.where(total > 0, np.sin(half) / np.where(total > 0, total, 1.0), 0.5 * dt)
    x = k * (omega * np.cos(phases)[:, None])
    y = k * (omega * np.sin(phases)[:, None])
    z = k * delta[None, :]
    return w, x, y, z


def _compose(wl, xl, yl, zl, wr, xr, yr, zr):
    """Quaternion product: left factor applied after the right factor."""
    w = wl * wr - xl * xr - yl * yr - zl * zr
    x = wl * xr + wr * xl + (yl * zr - zl * yr)
    y = wl * yr + wr * yl + (zl * xr - xl * zr)
    z = wl * zr + wr * zl + (xl * yr - yl * xr)
    return w, x, y, z


def _fold_rotors(w, x, y, z):
    """Ordered product U_{L-1} ... U_1 U_0 by pairwise folding along axis 0."""
    while w.shape[0] > 1:
        L = w.shape[0]
        even = L - (L % 2)
        pair = _compose(
            w[1:even:2], x[1:even:2], y[1:even:2], z[1:even:2],
            w[0:even:2], x[0:even:2], y[0:even:2], z[0:even:2],
        )
        if L % 2:
            w = np.concatenate([pair[0], w[even:]])
            x = np.concatenate([pair[1], x[even:]])
            y = np.concatenate([pair[2], y[even:]])
            z = np.concatenate([pair[3], z[even:]])
        else:
            w, x, y, z = pair
    return w[0], x[0], y[0], z[0]


def _pulse_rotors(envelope: PulseEnvelope, detunings_hz) -> tuple:
    delta = 2 * np.pi * np.atleast_1d(np.asarray(detunings_hz, dtype=float))
    return _fold_rotors(
        *_slice_rotors(envelope.durations, envelope.amplitudes, envelope.phases, delta)
    )


def _rotor_matrices(w, x, y, z) -> np.ndarray:
    """Quaternion components -> (..., 2, 2) complex unitaries."""
    u = np.empty(np.shape(w) + (2, 2), dtype=complex)
    u[..., 0, 0] = w - 1j * z
    u[..., 0, 1] = -y - 1j * x
    u[..., 1, 0] = y - 1j * x
    u[..., 1, 1] = w + 1j * z
    return u


# --- public operations -------------------------------------------------------


def slice_unitary(
    rabi_amplitude: float, phase: float, detuning: float, dt: float
) -> TwoLevelUnitary:
    """Exact propagator of one constant-drive slice at a fixed detuning (Hz)."""
    if not (dt > 0):
        raise InvalidInputError(f"dt must be positive, got {dt}")
    rotors = _slice_rotors(
        np.array([float(dt)]),
        np.array([float(rabi_amplitude)]),
        np.array([float(phase)]),
        np.array([2 * np.pi * float(detuning)]),
    )
    return TwoLevelUnitary(_rotor_matrices(*(r[0, 0] for r in rotors)))


def pulse_unitary(envelope: PulseEnvelope, detuning: float) -> TwoLevelUnitary:
    """Ordered product of all slice unitaries of an envelope at one detuning (Hz)."""
    w, x, y, z = _pulse_rotors(envelope, [float(detuning)])
    return TwoLevelUnitary(_rotor_matrices(w[0], x[0], y[0], z[0]))


def pulse_unitaries(envelope: PulseEnvelope, detunings_hz) -> np.ndarray:
    """Batched pulse_unitary: (G,) detunings in Hz -> (G, 2, 2) array."""
    return _rotor_matrices(*_pulse_rotors(envelope, detunings_hz))


def _conjugate_bloch(u: np.ndarray, m: tuple) -> tuple:
    """rho -> U rho U† on rho = (I + m.sigma)/2, batched over leading axes of u."""
    mx, my, mz = m
    r00 = 0.5 * (1 + mz)
    r01 = 0.5 * (mx - 1j * my)
    r11 = 0.5 * (1 - mz)
    a, b = u[..., 0, 0], u[..., 0, 1]
    c, d = u[..., 1, 0], u[..., 1, 1]
    # rows of U rho
    t00 = a * r00 + b * np.conj(r01)
    t01 = a * r01 + b * r11
    t10 = c * r00 + d * np.conj(r01)
    t11 = c * r01 + d * r11
    # (U rho) U†
    o00 = t00 * np.conj(a) + t01 * np.conj(b)
    o01 = t00 * np.conj(c) + t01 * np.conj(d)
    o11 = t10 * np.conj(c) + t11 * np.conj(d)
    return 2 * o01.real, -2 * o01.imag, (o00 - o11).real


def apply(u: TwoLevelUnitary, state: BlochVector) -> BlochVector:
    """Evolve a Bloch vector by conjugating its density matrix with u."""
    mx, my, mz = _conjugate_bloch(u.entries, (state.mx, state.my, state.mz))
    return BlochVector(float(mx), float(my), float(mz))


def analytic_rabi(
    rabi_amplitude: float, detuning: float, t: float, initial_mz: float = 1.0
) -> float:
    """Closed-form longitudinal response of a constant drive.

    mz(t) = mz(0) * {1 + (Omega'/Omega_eff)^2 [cos(Omega_eff t) - 1]} with
    Omega_eff = sqrt(Omega'^2 + delta^2); the zero-drive, zero-detuning limit
    returns the initial value.
    """
    delta = 2 * np.pi * detuning
    eff_sq = rabi_amplitude**2 + delta**2
    if eff_sq == 0.0:
        return float(initial_mz)
    eff = np.sqrt(eff_sq)
    return float(initial_mz * (1.0 + (rabi_amplitude**2 / eff_sq) * (np.cos(eff * t) - 1.0)))


def excitation_profile(
    envelope: PulseEnvelope, detuning_grid, initial: BlochVector = SPIN_UP
) -> ResponseProfile:
    """Final mz and |mxy| at every grid detuning (Hz), starting from `initial`.

    Each grid point is an independent pure-function evaluation; the grid is
    batched only for speed.
    """
    grid = np.atleast_1d(np.asarray(detuning_grid, dtype=float))
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise InvalidInputError("detuning grid must be strictly ascending")
    u = pulse_unitaries(envelope, grid)
    mx, my, mz = _conjugate_bloch(u, (initial.mx, initial.my, initial.mz))
    mxy = np.sqrt(mx**2 + my**2)
    return ResponseProfile(grid, mz, mxy)
