"""Envelope synthesis and shape-file tests."""

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nvpulse.errors import ConfigError, InvalidInputError, NormalizationImpossibleError
from nvpulse.shapes import (
    FourierShape,
    PulseEnvelope,
    builtin_shape,
    builtin_shape_names,
    gaussian,
    hermite,
    load_shape_file,
    rectangular,
    resolve_shape,
    synthesize_fourier,
)


class TestRectangular:
    def test_amplitude_is_flip_over_duration(self):
        env = rectangular(100e-9, np.pi)
        assert env.n_slices == 1
        assert_allclose(env.amplitudes[0], np.pi / 100e-9, rtol=1e-15)
        assert env.phases[0] == 0.0

    def test_zero_duration_rejected(self):
        with pytest.raises(InvalidInputError):
            rectangular(0.0, np.pi)

    def test_peak_power_ratio_between_timescales(self):
        # pi pulses at 90 and 110 ns have amplitudes in ratio 110/90
        a90 = rectangular(90e-9, np.pi).amplitudes[0]
        a110 = rectangular(110e-9, np.pi).amplitudes[0]
        assert_allclose(a90 / a110, 110.0 / 90.0, rtol=1e-12)


class TestSynthesizeFourier:
    def test_constant_shape_equals_rectangular(self):
        env = synthesize_fourier(FourierShape(a0=1.0), 1e-6, 64, np.pi)
        rect = rectangular(1e-6, np.pi)
        assert_allclose(env.amplitudes, rect.amplitudes[0], rtol=1e-12)
        assert_allclose(env.total_duration, 1e-6, rtol=1e-15)

    def test_flip_angle_normalization_exact(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            n = int(rng.integers(1, 16))
            shape = FourierShape(
                a0=rng.uniform(0.1, 2.0) * rng.choice([-1, 1]),
                an=tuple(rng.uniform(-2, 2, n)),
                bn=tuple(rng.uniform(-2, 2, n)),
            )
            env = synthesize_fourier(shape, 800e-9, 256, np.pi)
            assert abs(env.flip_angle() - np.pi) < 1e-9 * np.pi

    def test_reburp_file_normalizes_too(self):
        env = synthesize_fourier(builtin_shape("reburp180"), 800e-9, 256, np.pi)
        assert abs(env.flip_angle() - np.pi) < 1e-9 * np.pi

    def test_zero_a0_impossible(self):
        with pytest.raises(NormalizationImpossibleError):
            synthesize_fourier(FourierShape(a0=0.0, an=(1.0,), bn=(0.0,)), 1e-6, 64, np.pi)

    def test_too_few_slices_rejected(self):
        with pytest.raises(InvalidInputError):
            synthesize_fourier(FourierShape(a0=1.0), 1e-6, 16, np.pi)

    def test_time_symmetry_without_sine_terms(self):
        shape = builtin_shape("reburp180")
        env = synthesize_fourier(shape, 640e-9, 256, np.pi)
        scale = np.abs(env.amplitudes).max()
        assert_allclose(env.amplitudes, env.amplitudes[::-1], rtol=0, atol=1e-12 * scale)

    def test_halving_duration_doubles_every_sample(self):
        shape = builtin_shape("reburp180")
        slow = synthesize_fourier(shape, 800e-9, 256, np.pi)
        fast = synthesize_fourier(shape, 400e-9, 256, np.pi)
        assert np.array_equal(fast.amplitudes, 2.0 * slow.amplitudes)


class TestGaussian:
    def test_truncation_one_is_rectangular(self):
        env = gaussian(1e-6, np.pi, truncation=1.0, n_slices=64)
        assert_allclose(env.amplitudes, np.pi / 1e-6, rtol=1e-12)

    def test_flip_angle_exact(self):
        env = gaussian(500e-9, np.pi, truncation=0.01)
        assert abs(env.flip_angle() - np.pi) < 1e-9 * np.pi

    def test_narrow_gaussian_has_higher_peak_than_rectangular(self):
        env = gaussian(500e-9, np.pi, truncation=0.01)
        assert env.amplitudes.max() > np.pi / 500e-9

    def test_edge_value_follows_truncation_width(self):
        # sigma is set so the envelope endpoints sit at truncation x peak;
        # the first midpoint sample sits half a slice inside the edge
        trunc, n = 0.05, 256
        env = gaussian(1e-6, np.pi, truncation=trunc, n_slices=n)
        midpoints = (np.arange(n) + 0.5) / n - 0.5
        sigma = 0.5 / np.sqrt(2 * np.log(1 / trunc))
        expected = np.exp(-(midpoints[0] ** 2 - midpoints[n // 2] ** 2) / (2 * sigma**2))
        assert env.amplitudes[0] / env.amplitudes.max() == pytest.approx(expected, rel=1e-9)

    @pytest.mark.parametrize("bad", [0.0, -0.5, 1.5])
    def test_invalid_truncation(self, bad):
        with pytest.raises(InvalidInputError):
            gaussian(1e-6, np.pi, truncation=bad)


class TestHermite:
    def test_flip_angle_exact(self):
        env = hermite(500e-9, np.pi, quadratic_coefficient=0.7)
        assert abs(env.flip_angle() - np.pi) < 1e-9 * np.pi

    def test_zero_coefficient_reduces_to_gaussian(self):
        # the x scaling spans +-3, matching a gaussian truncated at exp(-9)
        h = hermite(1e-6, np.pi, quadratic_coefficient=0.0, n_slices=128)
        g = gaussian(1e-6, np.pi, truncation=np.exp(-9.0), n_slices=128)
        assert_allclose(h.amplitudes, g.amplitudes, rtol=1e-12)

    def test_quadratic_term_reshapes_envelope(self):
        h = hermite(1e-6, np.pi, quadratic_coefficient=0.75, n_slices=128)
        g = hermite(1e-6, np.pi, quadratic_coefficient=0.0, n_slices=128)
        assert abs(h.flip_angle() - g.flip_angle()) < 1e-12
        assert np.max(np.abs(h.amplitudes - g.amplitudes)) > 0.1 * np.abs(g.amplitudes).max()
        # negative side lobes appear once 1 - c x^2 crosses zero inside +-3
        assert h.amplitudes.min() < 0 < g.amplitudes.min()


class TestShapeFiles:
    def test_roundtrip_minimal_file(self, tmp_path):
        p = tmp_path / "shape.json"
        p.write_text(json.dumps({"name": "demo", "a0": 0.5, "an": [-1.0], "bn": []}))
        shape = load_shape_file(p)
        assert shape.a0 == 0.5
        assert shape.an == (-1.0,)
        assert shape.bn == (0.0,)  # padded to match an

    def test_inversion_with_zero_a0_rejected_at_load(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"name": "bad", "inversion": True, "a0": 0.0, "an": [1.0]}))
        with pytest.raises(ConfigError):
            load_shape_file(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_shape_file(tmp_path / "nope.json")

    def test_malformed_json(self, tmp_path):
        p = tmp_path / "garbled.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError):
            load_shape_file(p)

    def test_missing_a0_field(self, tmp_path):
        p = tmp_path / "noa0.json"
        p.write_text(json.dumps({"name": "x", "an": [1.0]}))
        with pytest.raises(ConfigError):
            load_shape_file(p)

    def test_builtin_reburp_loads(self):
        assert "reburp180" in builtin_shape_names()
        shape = builtin_shape("reburp180")
        assert shape.name == "reburp180"
        assert shape.a0 != 0.0
        assert all(b == 0.0 for b in shape.bn)  # symmetric, self-refocusing form

    def test_resolve_prefers_builtin_then_path(self, tmp_path):
        assert resolve_shape("reburp180").name == "reburp180"
        p = tmp_path / "other.json"
        p.write_text(json.dumps({"name": "other", "a0": 1.0}))
        assert resolve_shape(str(p)).name == "other"


class TestFourierShapeValidation:
    def test_mismatched_harmonics_rejected(self):
        with pytest.raises(InvalidInputError):
            FourierShape(a0=1.0, an=(1.0, 2.0), bn=(0.0,))

    def test_harmonic_cap(self):
        with pytest.raises(InvalidInputError):
            FourierShape(a0=1.0, an=(0.1,) * 65, bn=(0.0,) * 65)

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidInputError):
            FourierShape(a0=float("nan"))


class TestPulseEnvelopeValidation:
    def test_total_duration_is_sum(self):
        env = PulseEnvelope(np.array([1e-9, 3e-9]), np.zeros(2), np.zeros(2))
        assert_allclose(env.total_duration, 4e-9, rtol=1e-15)

    def test_nonpositive_duration_rejected(self):
        with pytest.raises(InvalidInputError):
            PulseEnvelope(np.array([1e-9, 0.0]), np.zeros(2), np.zeros(2))

    def test_envelope_is_immutable(self):
        env = rectangular(1e-7, np.pi)
        with pytest.raises(ValueError):
            env.amplitudes[0] = 0.0