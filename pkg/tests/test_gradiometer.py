"""Gradiometer calibration and frequency-domain subtraction tests."""

import math

import numpy as np
import pytest

from serfkit.errors import (
    DegenerateDataError,
    InvalidParameterError,
    MissingToneError,
    ShapeError,
)
from serfkit.gradiometer import (
    GradCalibration,
    PhasePoint,
    amplitude_ratio,
    fit_phase_model,
    magnitude_ratio,
    phase_difference,
    phase_extremum,
    reduction_ratio,
    subtract,
    tone_amplitude_in_series,
)
from serfkit.noisepsd import welch_asd
from serfkit.records import TwoChannelRecord
from serfkit.simulator import NoiseModel, SimConfig, simulate_record

F1, F2 = 49.9, 68.8
FS = 1000.0


def tone_record(freq=10.0, amp=16e-12, n=8192, fs=FS, top_gain=1.0, bottom_gain=1.0,
                noise=0.0, seed=0):
    t = np.arange(n) / fs
    rng = np.random.default_rng(seed)
    x = amp * np.sin(2 * np.pi * freq * t)
    top = top_gain * x + (rng.normal(0, noise, n) if noise else 0.0)
    bottom = bottom_gain * x + (rng.normal(0, noise, n) if noise else 0.0)
    return TwoChannelRecord(fs, top, bottom)


class TestPhaseModel:
    def test_identical_channels_zero_phase(self):
        for f in (0.0, 1.0, 58.6, 500.0):
            assert phase_difference(f, 50.0, 50.0) == 0.0

    def test_reference_extremum(self):
        f_ext, phi = phase_extremum(F1, F2)
        assert f_ext == pytest.approx(58.6, abs=0.1)
        assert abs(phi) == pytest.approx(0.16, abs=0.01)

    def test_value_at_calibration_tone(self):
        assert phase_difference(10.0, F1, F2) == pytest.approx(-0.0534, abs=5e-4)

    def test_odd_under_bandwidth_swap(self):
        f = np.linspace(0.1, 300.0, 57)
        assert phase_difference(f, F1, F2) == pytest.approx(
            -phase_difference(f, F2, F1), rel=1e-14
        )

    def test_limits_vanish(self):
        assert phase_difference(0.0, F1, F2) == 0.0
        assert abs(phase_difference(1e9, F1, F2)) < 1e-6

    def test_arctan_difference_identity(self):
        f = np.linspace(0.001, 500.0, 10000)
        lhs = phase_difference(f, F1, F2)
        rhs = np.arctan(f / F2) - np.arctan(f / F1)
        assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_grid_extremum_matches_analytic(self):
        f = np.arange(0.01, 200.0, 0.01)
        i = np.argmax(np.abs(phase_difference(f, F1, F2)))
        assert abs(f[i] - math.sqrt(F1 * F2)) <= 0.01 + 1e-9


class TestFitPhaseModel:
    def make_points(self, noise=0.0, seed=0, f1=F1, f2=F2):
        freqs = np.arange(5.0, 201.0, 5.0)
        phases = phase_difference(freqs, f1, f2)
        if noise:
            phases = phases + np.random.default_rng(seed).normal(0, noise, len(freqs))
        return [PhasePoint(float(f), float(p)) for f, p in zip(freqs, phases)]

    def test_noiseless_exact(self):
        fit = fit_phase_model(self.make_points())
        assert fit.f1_hz == pytest.approx(F1, abs=1e-8)
        assert fit.f2_hz == pytest.approx(F2, abs=1e-8)

    def test_noisy_within_five_percent(self):
        fit = fit_phase_model(self.make_points(noise=0.005, seed=4))
        assert fit.f1_hz == pytest.approx(F1, rel=0.05)
        assert fit.f2_hz == pytest.approx(F2, rel=0.05)

    def test_swapped_bandwidths_sign_convention(self):
        fit = fit_phase_model(self.make_points(f1=F2, f2=F1))
        assert fit.f1_hz == pytest.approx(F2, abs=1e-8)
        assert fit.f2_hz == pytest.approx(F1, abs=1e-8)

    def test_zero_phases_degenerate(self):
        points = [PhasePoint(float(f), 0.0) for f in (5.0, 10.0, 20.0, 40.0)]
        with pytest.raises(DegenerateDataError):
            fit_phase_model(points)

    def test_needs_four_points(self):
        with pytest.raises(InvalidParameterError):
            fit_phase_model([PhasePoint(5.0, -0.01), PhasePoint(10.0, -0.02),
                             PhasePoint(20.0, -0.05)])

    def test_phase_point_range_validated(self):
        with pytest.raises(InvalidParameterError):
            PhasePoint(10.0, 3.5)


class TestAmplitudeRatio:
    def test_identical_channels(self):
        rec = tone_record()
        assert amplitude_ratio(rec, 10.0) == pytest.approx(1.0, abs=1e-6)

    def test_scaled_bottom_channel(self):
        rec = tone_record(bottom_gain=0.8)
        assert amplitude_ratio(rec, 10.0) == pytest.approx(1.25, rel=1e-9)

    def test_simulated_first_order_channels(self):
        cfg = SimConfig(FS, 20.0, seed=1, f1_hz=F1, f2_hz=F2,
                        tones=((10.0, 16e-12, 0.0),),
                        noise=NoiseModel(sensor_asd_t_sqrthz=1e-16))
        rec = simulate_record(cfg)
        expected = math.sqrt((1 + (10 / F2) ** 2) / (1 + (10 / F1) ** 2))
        assert amplitude_ratio(rec, 10.0) == pytest.approx(expected, rel=1e-3)
        assert expected == pytest.approx(0.9907, abs=2e-4)

    def test_missing_tone_rejected(self):
        rng = np.random.default_rng(0)
        rec = TwoChannelRecord(FS, rng.normal(0, 1, 8192), rng.normal(0, 1, 8192))
        with pytest.raises(MissingToneError):
            amplitude_ratio(rec, 10.0)


class TestSubtract:
    def cal(self, ratio=1.0, tone_freq=10.0):
        return GradCalibration(amplitude_ratio=ratio, f1_hz=F1, f2_hz=F2,
                               tone_freq_hz=tone_freq, tone_amp_t=16e-12)

    def test_identical_channels_cancel_exactly(self):
        rec = tone_record()
        out = subtract(rec, self.cal(), phase_correct=False)
        rms_in = np.sqrt(np.mean(rec.top_t**2))
        assert np.sqrt(np.mean(out**2)) <= 1e-12 * rms_in

    def test_output_mean_is_difference_of_means(self):
        rng = np.random.default_rng(2)
        top = rng.normal(0.5, 1.0, 4096)
        bottom = rng.normal(-0.25, 1.0, 4096)
        rec = TwoChannelRecord(FS, top, bottom)
        out = subtract(rec, self.cal(ratio=1.3), phase_correct=True)
        expected = top.mean() - bottom.mean()
        assert out.mean() == pytest.approx(expected, rel=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(3)
        rec_x = TwoChannelRecord(FS, rng.normal(0, 1, 4096), rng.normal(0, 1, 4096))
        rec_y = TwoChannelRecord(FS, rng.normal(0, 1, 4096), rng.normal(0, 1, 4096))
        a, b = 0.6, -2.2
        combined = TwoChannelRecord(
            FS, a * rec_x.top_t + b * rec_y.top_t, a * rec_x.bottom_t + b * rec_y.bottom_t
        )
        cal = self.cal(ratio=0.99)
        lhs = subtract(combined, cal)
        rhs = a * subtract(rec_x, cal) + b * subtract(rec_y, cal)
        scale = np.max(np.abs(rhs))
        assert np.max(np.abs(lhs - rhs)) <= 1e-10 * scale

    def test_amplitude_only_residual_matches_phasor_geometry(self):
        cfg = SimConfig(FS, 30.0, seed=5, f1_hz=F1, f2_hz=F2,
                        tones=((10.0, 16e-12, 0.0),),
                        noise=NoiseModel(sensor_asd_t_sqrthz=1e-17))
        rec = simulate_record(cfg)
        ratio = amplitude_ratio(rec, 10.0)
        out = subtract(rec, self.cal(ratio=ratio), phase_correct=False)
        residual = tone_amplitude_in_series(out, FS, 10.0)
        top_amp = tone_amplitude_in_series(rec.top_t, FS, 10.0)
        predicted = 2.0 * math.sin(abs(phase_difference(10.0, F1, F2)) / 2.0)
        assert residual / top_amp == pytest.approx(predicted, rel=0.05)

    def test_phase_corrected_common_mode_rejection(self):
        # Purely common-mode input: broadband common noise plus the tone.
        cfg = SimConfig(FS, 30.0, seed=6, f1_hz=F1, f2_hz=F2,
                        tones=((10.0, 16e-12, 0.0),),
                        noise=NoiseModel(common_asd_t_sqrthz=8e-15))
        rec = simulate_record(cfg)
        ratio = amplitude_ratio(rec, 10.0)
        out = subtract(rec, self.cal(ratio=ratio), phase_correct=True)

        def band_rms(series):
            psd = welch_asd(series, FS, segment_len=4096)
            sel = (psd.freqs_hz >= 5.0) & (psd.freqs_hz <= 200.0)
            return math.sqrt(np.sum(psd.asd_t_sqrthz[sel] ** 2) * psd.bin_width_hz)

        assert band_rms(out) <= 0.03 * band_rms(rec.top_t)

    def test_mismatched_channel_lengths_rejected(self):
        with pytest.raises(ShapeError):
            TwoChannelRecord(FS, np.zeros(100), np.zeros(101))


class TestReductionRatio:
    def test_identical_channels_report_infinity(self):
        rec = tone_record()
        cal = GradCalibration(1.0, F1, F2, tone_freq_hz=10.0)
        assert reduction_ratio(rec, cal, 10.0, phase_correct=False) == math.inf

    def test_simulated_tone_reduction(self):
        cfg = SimConfig(FS, 30.0, seed=7, f1_hz=F1, f2_hz=F2,
                        tones=((10.0, 16e-12, 0.0),),
                        noise=NoiseModel(common_asd_t_sqrthz=8e-15,
                                         sensor_asd_t_sqrthz=1.2e-15 / math.sqrt(2)))
        rec = simulate_record(cfg)
        ratio = amplitude_ratio(rec, 10.0)
        cal = GradCalibration(ratio, F1, F2, tone_freq_hz=10.0, tone_amp_t=16e-12)
        assert reduction_ratio(rec, cal, 10.0) >= 50.0

    def test_missing_tone_rejected(self):
        rng = np.random.default_rng(8)
        rec = TwoChannelRecord(FS, rng.normal(0, 1, 8192), rng.normal(0, 1, 8192))
        cal = GradCalibration(1.0, F1, F2)
        with pytest.raises(MissingToneError):
            reduction_ratio(rec, cal, 10.0)


class TestCalibrationType:
    def test_positive_ratio_required(self):
        with pytest.raises(InvalidParameterError):
            GradCalibration(0.0, F1, F2)

    def test_positive_bandwidths_required(self):
        with pytest.raises(InvalidParameterError):
            GradCalibration(1.0, -1.0, F2)

    def test_magnitude_ratio_anchors(self):
        assert magnitude_ratio(0.0, F1, F2) == 1.0
        assert magnitude_ratio(10.0, F1, F2) == pytest.approx(0.99081, abs=1e-5)
