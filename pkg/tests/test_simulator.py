"""Synthetic two-channel generator tests."""

import math

import numpy as np
import pytest

from serfkit.errors import ConfigError, InvalidParameterError
from serfkit.gradiometer import (
    GradCalibration,
    amplitude_ratio,
    phase_difference,
    subtract,
    tone_amplitude_in_series,
)
from serfkit.noisepsd import band_floor, welch_asd
from serfkit.simulator import NoiseModel, SimConfig, channel_transfer, simulate_record

FS = 1000.0
F1, F2 = 49.9, 68.8


class TestChannelTransfer:
    def test_dc_unity(self):
        assert channel_transfer(0.0, 50.0) == 1.0 + 0.0j

    def test_corner_frequency(self):
        h = channel_transfer(50.0, 50.0)
        assert abs(h) == pytest.approx(1.0 / math.sqrt(2.0), rel=1e-12)
        assert np.angle(h) == pytest.approx(-math.pi / 4.0, rel=1e-12)

    def test_phase_difference_identity(self):
        f = np.linspace(0.05, 500.0, 8000)
        dphi = np.angle(channel_transfer(f, F1)) - np.angle(channel_transfer(f, F2))
        assert np.max(np.abs(dphi - phase_difference(f, F1, F2))) < 1e-12

    def test_bad_bandwidth(self):
        with pytest.raises(InvalidParameterError):
            channel_transfer(10.0, 0.0)


class TestDeterminism:
    def test_same_seed_bit_identical(self):
        cfg = SimConfig(FS, 10.0, seed=42, tones=((10.0, 1e-12, 0.3),),
                        noise=NoiseModel(common_asd_t_sqrthz=5e-15,
                                         gradient_asd_t_sqrthz=1e-15,
                                         sensor_asd_t_sqrthz=2e-15))
        a = simulate_record(cfg)
        b = simulate_record(cfg)
        assert np.array_equal(a.top_t, b.top_t)
        assert np.array_equal(a.bottom_t, b.bottom_t)

    def test_different_seed_differs(self):
        base = dict(sample_rate_hz=FS, duration_s=10.0,
                    noise=NoiseModel(common_asd_t_sqrthz=5e-15))
        a = simulate_record(SimConfig(seed=1, **base))
        b = simulate_record(SimConfig(seed=2, **base))
        assert not np.array_equal(a.top_t, b.top_t)


class TestTones:
    def test_matched_channels_identical(self):
        cfg = SimConfig(FS, 10.0, seed=0, f1_hz=60.0, f2_hz=60.0,
                        tones=((10.0, 16e-12, 0.0),))
        rec = simulate_record(cfg)
        scale = np.max(np.abs(rec.top_t))
        assert np.max(np.abs(rec.top_t - rec.bottom_t)) <= 1e-12 * scale

    def test_tone_amplitudes_follow_response_and_gain(self):
        gains = (1.3, 0.7)
        cfg = SimConfig(FS, 20.0, seed=0, f1_hz=F1, f2_hz=F2,
                        channel_gains=gains, tones=((10.0, 16e-12, 0.0),))
        rec = simulate_record(cfg)
        top = tone_amplitude_in_series(rec.top_t, FS, 10.0)
        bottom = tone_amplitude_in_series(rec.bottom_t, FS, 10.0)
        assert top == pytest.approx(16e-12 * abs(channel_transfer(10.0, F1)) * gains[0], rel=0.01)
        assert bottom == pytest.approx(16e-12 * abs(channel_transfer(10.0, F2)) * gains[1], rel=0.01)

    def test_injected_tone_phases_match_model(self):
        tones = tuple((f, 1e-12, 0.0) for f in (5.0, 20.0, 50.0, 100.0, 200.0))
        cfg = SimConfig(FS, 20.0, seed=0, f1_hz=F1, f2_hz=F2, tones=tones)
        rec = simulate_record(cfg)
        n = len(rec)
        top, bottom = np.fft.rfft(rec.top_t), np.fft.rfft(rec.bottom_t)
        for f, _, _ in tones:
            k = int(round(f * n / FS))
            measured = np.angle(top[k]) - np.angle(bottom[k])
            assert abs(measured - phase_difference(f, F1, F2)) < 0.002


class TestNoiseFloors:
    def test_common_floor_reads_back_on_both_channels(self):
        cfg = SimConfig(FS, 60.0, seed=3, f1_hz=F1, f2_hz=F2,
                        noise=NoiseModel(common_asd_t_sqrthz=8e-15))
        rec = simulate_record(cfg)
        for series in (rec.top_t, rec.bottom_t):
            psd = welch_asd(series, FS)
            assert band_floor(psd, 2.0, 10.0) == pytest.approx(8e-15, rel=0.05)

    def test_sensor_floor_uncorrelated_sum_after_subtraction(self):
        cfg = SimConfig(FS, 60.0, seed=4, f1_hz=F1, f2_hz=F2,
                        tones=((10.0, 16e-12, 0.0),),
                        noise=NoiseModel(common_asd_t_sqrthz=8e-15,
                                         sensor_asd_t_sqrthz=1.2e-15))
        rec = simulate_record(cfg)
        cal = GradCalibration(amplitude_ratio(rec, 10.0), F1, F2,
                              tone_freq_hz=10.0, tone_amp_t=16e-12)
        diff = subtract(rec, cal, phase_correct=True)
        floor = band_floor(welch_asd(diff, FS), 20.0, 30.0)
        assert floor == pytest.approx(1.2e-15 * math.sqrt(2.0), rel=0.10)

    def test_gradient_noise_survives_subtraction(self):
        base = dict(sample_rate_hz=FS, duration_s=30.0, f1_hz=F1, f2_hz=F2,
                    tones=((10.0, 16e-12, 0.0),))
        grad = 2e-15
        cfg = SimConfig(seed=5, noise=NoiseModel(common_asd_t_sqrthz=8e-15,
                                                 gradient_asd_t_sqrthz=grad), **base)
        rec = simulate_record(cfg)
        cal = GradCalibration(amplitude_ratio(rec, 10.0), F1, F2,
                              tone_freq_hz=10.0, tone_amp_t=16e-12)
        diff = subtract(rec, cal, phase_correct=True)
        floor = band_floor(welch_asd(diff, FS), 20.0, 30.0)
        # The antisymmetric split makes the difference carry the full
        # gradient density.
        assert floor == pytest.approx(grad, rel=0.15)

    def test_one_over_f_corner_boosts_low_band(self):
        cfg = SimConfig(FS, 60.0, seed=6, f1_hz=F1, f2_hz=F2,
                        noise=NoiseModel(common_asd_t_sqrthz=8e-15,
                                         one_over_f_corner_hz=5.0))
        rec = simulate_record(cfg)
        psd = welch_asd(rec.top_t, FS)
        low = band_floor(psd, 1.0, 2.5)
        flat = band_floor(psd, 10.0, 30.0)
        assert 1.3 * flat < low < 3.0 * flat


class TestCancellation:
    def test_noise_free_cancellation_near_machine_precision(self):
        cfg = SimConfig(FS, 30.0, seed=7, f1_hz=F1, f2_hz=F2,
                        tones=((10.0, 16e-12, 0.0), (35.0, 5e-12, 1.0)),
                        noise=NoiseModel(common_asd_t_sqrthz=8e-15))
        rec = simulate_record(cfg)
        cal = GradCalibration(amplitude_ratio(rec, 10.0), F1, F2,
                              tone_freq_hz=10.0, tone_amp_t=16e-12)
        diff = subtract(rec, cal, phase_correct=True)
        assert np.sqrt(np.mean(diff**2)) <= 1e-3 * np.sqrt(np.mean(rec.top_t**2))


class TestValidation:
    def test_output_always_finite(self):
        cfg = SimConfig(FS, 10.0, seed=8,
                        noise=NoiseModel(common_asd_t_sqrthz=1e-12,
                                         gradient_asd_t_sqrthz=1e-13,
                                         sensor_asd_t_sqrthz=(1e-14, 2e-14),
                                         one_over_f_corner_hz=10.0))
        rec = simulate_record(cfg)
        assert np.all(np.isfinite(rec.top_t))
        assert np.all(np.isfinite(rec.bottom_t))

    def test_zero_duration_rejected(self):
        with pytest.raises(ConfigError):
            SimConfig(FS, 0.0)

    def test_too_short_record_rejected(self):
        with pytest.raises(ConfigError):
            SimConfig(FS, 1.0)

    def test_negative_noise_rejected(self):
        with pytest.raises(InvalidParameterError):
            NoiseModel(common_asd_t_sqrthz=-1.0)

    def test_bad_bandwidth_rejected(self):
        with pytest.raises(ConfigError):
            SimConfig(FS, 10.0, f1_hz=-5.0)
