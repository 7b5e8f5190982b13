"""Propagator tests against closed-form and brute-force oracles."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nvpulse.errors import InvalidInputError
from nvpulse.propagator import (
    SPIN_UP,
    BlochVector,
    ResponseProfile,
    TwoLevelUnitary,
    analytic_rabi,
    apply,
    excitation_profile,
    pulse_unitaries,
    pulse_unitary,
    slice_unitary,
)
from nvpulse.shapes import PulseEnvelope, builtin_shape, rectangular, synthesize_fourier

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def expm_oracle(a: np.ndarray) -> np.ndarray:
    """Brute-force matrix exponential: scale down, Taylor-sum, square back up."""
    norm = np.max(np.abs(a))
    scalings = max(0, int(np.ceil(np.log2(norm))) + 2) if norm > 0 else 0
    small = a / (2.0**scalings)
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for n in range(1, 30):
        term = term @ small / n
        out = out + term
    for _ in range(scalings):
        out = out @ out
    return out


def slice_generator(omega, phase, detuning_hz, dt):
    delta = 2 * np.pi * detuning_hz
    drive = omega * (np.cos(phase) * SX + np.sin(phase) * np.array([[0, -1j], [1j, 0]]))
    return -1j * (dt / 2) * (delta * SZ + drive)


class TestSliceUnitary:
    def test_on_resonance_pi_is_minus_i_sigma_x(self):
        tau = 100e-9
        u = slice_unitary(np.pi / tau, 0.0, 0.0, tau)
        assert_allclose(u.entries, -1j * SX, atol=1e-12)

    def test_free_precession_is_diagonal_phase(self):
        d, dt = 2.5e6, 80e-9
        u = slice_unitary(0.0, 0.0, d, dt)
        expected = np.diag([np.exp(-1j * np.pi * d * dt), np.exp(1j * np.pi * d * dt)])
        assert_allclose(u.entries, expected, atol=1e-12)

    def test_matches_expm_oracle_on_random_inputs(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            omega = rng.uniform(-5e7, 5e7)
            phase = rng.uniform(0, 2 * np.pi)
            detuning = rng.uniform(-2e7, 2e7)
            dt = rng.uniform(1e-9, 5e-7)
            u = slice_unitary(omega, phase, detuning, dt)
            expected = expm_oracle(slice_generator(omega, phase, detuning, dt))
            assert_allclose(u.entries, expected, atol=1e-10)

    def test_rejects_nonpositive_dt(self):
        with pytest.raises(InvalidInputError):
            slice_unitary(1e6, 0.0, 0.0, 0.0)


class TestPulseUnitary:
    def test_rectangular_pi_inverts(self):
        u = pulse_unitary(rectangular(100e-9, np.pi), 0.0)
        assert_allclose(u.entries, -1j * SX, atol=1e-10)

    def test_two_half_slices_equal_one_slice(self):
        tau, amp = 150e-9, 2e7
        whole = rectangular(tau, amp * tau)
        halves = PulseEnvelope(
            np.array([tau / 2, tau / 2]), np.array([amp, amp]), np.zeros(2)
        )
        for detuning in (0.0, 1.3e6, -8e6):
            assert_allclose(
                pulse_unitary(halves, detuning).entries,
                pulse_unitary(whole, detuning).entries,
                atol=1e-12,
            )

    def test_first_full_return_null(self):
        # sqrt(Omega'^2 + delta^2) * tau = 2 pi returns the spin to +z
        tau = 100e-9
        null_detuning = np.sqrt(3.0) / (2 * tau)
        u = pulse_unitary(rectangular(tau, np.pi), null_detuning)
        out = apply(u, SPIN_UP)
        assert abs(out.mz - 1.0) < 1e-9

    def test_unitarity_on_random_envelopes(self):
        rng = np.random.default_rng(21)
        eye = np.eye(2)
        for _ in range(100):
            n = int(rng.integers(1, 300))
            env = PulseEnvelope(
                rng.uniform(1e-10, 2e-8, n),
                rng.uniform(-4e7, 4e7, n),
                rng.uniform(0, 2 * np.pi, n),
            )
            u = pulse_unitary(env, rng.uniform(-2e7, 2e7)).entries
            assert np.max(np.abs(u.conj().T @ u - eye)) < 1e-9

    def test_unitarity_survives_4096_slices(self):
        rng = np.random.default_rng(22)
        env = PulseEnvelope(
            rng.uniform(1e-10, 1e-9, 4096),
            rng.uniform(-4e7, 4e7, 4096),
            rng.uniform(0, 2 * np.pi, 4096),
        )
        u = pulse_unitary(env, 5e6).entries
        assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-9

    def test_batched_matches_scalar(self):
        env = synthesize_fourier(builtin_shape("reburp180"), 800e-9, 64, np.pi)
        grid = np.array([-5e6, -1e6, 0.0, 2.2e6, 7e6])
        batch = pulse_unitaries(env, grid)
        for i, d in enumerate(grid):
            assert np.array_equal(batch[i], pulse_unitary(env, d).entries)


class TestApply:
    def test_identity_leaves_state(self):
        u = TwoLevelUnitary(np.eye(2, dtype=complex))
        s = BlochVector(0.3, -0.2, 0.5)
        out = apply(u, s)
        assert_allclose([out.mx, out.my, out.mz], [0.3, -0.2, 0.5], atol=1e-12)

    def test_sigma_x_pi_inverts_z(self):
        u = TwoLevelUnitary(-1j * SX)
        out = apply(u, SPIN_UP)
        assert_allclose([out.mx, out.my, out.mz], [0, 0, -1], atol=1e-12)

    def test_norm_preserved_for_random_pure_states(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            theta, phi = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
            state = BlochVector(
                np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)
            )
            u = pulse_unitary(
                rectangular(rng.uniform(1e-8, 1e-6), rng.uniform(0, 4 * np.pi)),
                rng.uniform(-1e7, 1e7),
            )
            out = apply(u, state)
            assert abs(out.norm() - 1.0) < 1e-9


class TestAnalyticRabi:
    def test_on_resonance_cosine(self):
        omega = 2 * np.pi * 5e6
        for t in np.linspace(0, 1e-6, 17):
            assert abs(analytic_rabi(omega, 0.0, t) - np.cos(omega * t)) < 1e-12

    def test_zero_drive_constant(self):
        assert analytic_rabi(0.0, 3e6, 1e-6, initial_mz=0.7) == 0.7

    def test_zero_drive_zero_detuning_limit(self):
        assert analytic_rabi(0.0, 0.0, 1e-6, initial_mz=-0.4) == -0.4

    def test_matches_sliced_propagation(self):
        # constant envelope sliced 1024x reproduces the closed form
        rng = np.random.default_rng(11)
        for _ in range(40):
            omega = rng.uniform(1e6, 5e7)
            detuning = rng.uniform(-10, 10) * omega / (2 * np.pi)
            t = rng.uniform(1e-8, 2e-6)
            env = PulseEnvelope(
                np.full(1024, t / 1024), np.full(1024, omega), np.zeros(1024)
            )
            propagated = apply(pulse_unitary(env, detuning), SPIN_UP).mz
            assert abs(propagated - analytic_rabi(omega, detuning, t)) < 1e-6


class TestExcitationProfile:
    def test_rectangular_profile_matches_analytic_oracle(self):
        tau = 100e-9
        env = rectangular(tau, np.pi)
        grid = np.linspace(-20e6, 20e6, 401)
        prof = excitation_profile(env, grid)
        oracle = [analytic_rabi(np.pi / tau, d, tau) for d in grid]
        assert_allclose(prof.mz, oracle, atol=1e-9)
        assert abs(prof.mz[200] + 1.0) < 1e-12  # full inversion on resonance

    def test_rectangular_first_null_location(self):
        tau = 100e-9
        null = np.sqrt(3.0) / (2 * tau)  # ~8.66 MHz for 100 ns
        prof = excitation_profile(rectangular(tau, np.pi), np.array([-null, null]))
        assert np.all(np.abs(prof.mz - 1.0) < 1e-9)

    def test_reburp_flat_top(self):
        env = synthesize_fourier(builtin_shape("reburp180"), 800e-9, 256, np.pi)
        band = np.linspace(-1.5e6, 1.5e6, 31)
        prof = excitation_profile(env, band)
        assert np.max(np.abs(prof.mz + 1.0)) < 0.03
        outside = excitation_profile(env, np.array([-8e6, 8e6]))
        assert np.all(outside.mz > 0.9)

    def test_zero_amplitude_envelope_is_inert(self):
        env = PulseEnvelope(np.array([1e-6]), np.array([0.0]), np.array([0.0]))
        grid = np.linspace(-5e6, 5e6, 11)
        start = BlochVector(0.0, 0.6, 0.8)
        prof = excitation_profile(env, grid, initial=start)
        assert_allclose(prof.mz, 0.8, atol=1e-12)

    def test_profile_symmetry_for_cosine_shapes(self):
        env = synthesize_fourier(builtin_shape("reburp180"), 640e-9, 128, np.pi)
        grid = np.linspace(-9e6, 9e6, 101)
        prof = excitation_profile(env, grid)
        assert_allclose(prof.mz, prof.mz[::-1], atol=1e-9)

    def test_single_point_equals_grid_value(self):
        env = synthesize_fourier(builtin_shape("reburp180"), 800e-9, 256, np.pi)
        grid = np.linspace(-6e6, 6e6, 25)
        prof = excitation_profile(env, grid)
        for i in (0, 7, 12, 24):
            alone = excitation_profile(env, np.array([grid[i]]))
            assert alone.mz[0] == prof.mz[i]
            assert alone.mxy[0] == prof.mxy[i]

    def test_slice_refinement_converged_at_256(self):
        # 1e-4 convergence holds on the controlled bands; the steep
        # transition region converges more slowly (measured ~5e-4)
        shape = builtin_shape("reburp180")
        tp = 800e-9
        grid = np.linspace(-25e6, 25e6, 501)
        coarse = excitation_profile(synthesize_fourier(shape, tp, 256), grid)
        fine = excitation_profile(synthesize_fourier(shape, tp, 512), grid)
        dev = np.abs(coarse.mz - fine.mz)
        scaled = np.abs(grid) * tp / (2 * np.pi)
        in_band = (scaled <= 0.25) | ((scaled >= 0.6) & (scaled <= 3.0))
        assert np.max(dev[in_band]) < 1e-4
        assert np.max(dev) < 1e-3

    def test_rejects_unsorted_grid(self):
        env = rectangular(1e-7, np.pi)
        with pytest.raises(InvalidInputError):
            excitation_profile(env, np.array([1e6, -1e6]))


class TestValueTypes:
    def test_unitary_validation_rejects_nonunitary(self):
        with pytest.raises(InvalidInputError):
            TwoLevelUnitary(np.array([[1.0, 0.1], [0.0, 1.0]]))

    def test_bloch_vector_rejects_overlong(self):
        with pytest.raises(InvalidInputError):
            BlochVector(1.0, 1.0, 1.0)

    def test_profile_requires_matching_lengths(self):
        with pytest.raises(InvalidInputError):
            ResponseProfile(np.array([0.0, 1.0]), np.array([1.0]), np.array([0.0]))
