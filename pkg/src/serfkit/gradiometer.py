"""Two-channel gradiometric calibration and frequency-domain subtraction.

The two photodiode channels behave as first-order low-pass systems with
different bandwidths f1 (top) and f2 (bottom), which makes their responses
differ in phase by

    dphi(f) = arctan(f * (f1 - f2) / (f^2 + f1 * f2))
            = arctan(f / f2) - arctan(f / f1)

(top phase minus bottom phase). Subtraction is done in the frequency domain:
the bottom spectrum is gain-matched and phase-rotated onto the top channel
before differencing, which cancels common-mode field noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateDataError,
    InvalidParameterError,
    MissingToneError,
)
from .fitting import fit_damped_least_squares
from .records import TwoChannelRecord

# Tone detection: peak searched within +-2 bins of nominal, amplitude SNR
# against the median of the +-20 bin neighborhood must exceed 10.
TONE_SEARCH_BINS = 2
TONE_NEIGHBORHOOD_BINS = 20
TONE_MIN_SNR = 10.0

_DEGENERATE_PHASE_RAD = 1e-9


@dataclass(frozen=True)
class GradCalibration:
    """Amplitude ratio at the calibration tone plus the two channel bandwidths."""

    amplitude_ratio: float
    f1_hz: float
    f2_hz: float
    tone_freq_hz: float = 0.0
    tone_amp_t: float = 0.0

    def __post_init__(self):
        if not self.amplitude_ratio > 0:
            raise InvalidParameterError("amplitude_ratio must be positive")
        if not (self.f1_hz > 0 and self.f2_hz > 0):
            raise InvalidParameterError("channel bandwidths must be positive")

    def as_dict(self) -> dict:
        return {
            "amplitude_ratio": self.amplitude_ratio,
            "f1_hz": self.f1_hz,
            "f2_hz": self.f2_hz,
            "tone_freq_hz": self.tone_freq_hz,
            "tone_amp_t": self.tone_amp_t,
        }


@dataclass(frozen=True)
class PhasePoint:
    """Measured inter-channel phase difference at one frequency."""

    freq_hz: float
    phase_rad: float

    def __post_init__(self):
        if not abs(self.phase_rad) < math.pi:
            raise InvalidParameterError("|phase_rad| must be below pi")


@dataclass(frozen=True)
class PhaseModelFit:
    """Fitted channel bandwidths with their 2x2 covariance."""

    f1_hz: float
    f2_hz: float
    covariance: np.ndarray = field(default_factory=lambda: np.zeros((2, 2)))


def phase_difference(freq_hz, f1_hz: float, f2_hz: float):
    """Inter-channel phase difference (top minus bottom) in radians.

    Odd under swapping the bandwidths, zero at DC and at infinity, with the
    extremum at ``sqrt(f1 * f2)``.
    """
    if not (f1_hz > 0 and f2_hz > 0):
        raise InvalidParameterError("channel bandwidths must be positive")
    f = np.asarray(freq_hz, dtype=float)
    out = np.arctan2(f * (f1_hz - f2_hz), f * f + f1_hz * f2_hz)
    return out if out.ndim else float(out)


def phase_extremum(f1_hz: float, f2_hz: float) -> tuple[float, float]:
    """Frequency and value of the phase-difference extremum.

    The extremum sits at ``sqrt(f1*f2)`` where the difference equals
    ``arctan((f1 - f2) / (2*sqrt(f1*f2)))``.
    """
    if not (f1_hz > 0 and f2_hz > 0):
        raise InvalidParameterError("channel bandwidths must be positive")
    f_ext = math.sqrt(f1_hz * f2_hz)
    return f_ext, math.atan((f1_hz - f2_hz) / (2.0 * f_ext))


def magnitude_ratio(freq_hz, f1_hz: float, f2_hz: float):
    """Ratio |H1(f)| / |H2(f)| of the first-order channel responses."""
    f = np.asarray(freq_hz, dtype=float)
    out = np.sqrt((1.0 + (f / f2_hz) ** 2) / (1.0 + (f / f1_hz) ** 2))
    return out if out.ndim else float(out)


def fit_phase_model(points) -> PhaseModelFit:
    """Fit the two channel bandwidths to measured phase differences.

    Seeds from the extremum of the data (its frequency pins ``f1*f2``, its
    value pins ``f1 - f2``) and refines by damped least squares.

    Raises
    ------
    InvalidParameterError
        Fewer than 4 points.
    DegenerateDataError
        All phases indistinguishable from zero (bandwidth split unresolvable).
    """
    points = list(points)
    if len(points) < 4:
        raise InvalidParameterError("need at least 4 phase points")
    freqs = np.array([p.freq_hz for p in points])
    phases = np.array([p.phase_rad for p in points])
    if np.any(freqs <= 0):
        raise InvalidParameterError("phase-point frequencies must be positive")
    if np.max(np.abs(phases)) < _DEGENERATE_PHASE_RAD:
        raise DegenerateDataError("all phases are zero: bandwidths indistinguishable")

    i_ext = int(np.argmax(np.abs(phases)))
    f_ext = freqs[i_ext]
    diff = 2.0 * f_ext * math.tan(phases[i_ext])  # f1 - f2 at the extremum
    total = math.sqrt(diff * diff + 4.0 * f_ext * f_ext)  # f1 + f2
    p0 = np.array([0.5 * (total + diff), 0.5 * (total - diff)])

    def residual(p):
        return np.arctan2(freqs * (p[0] - p[1]), freqs**2 + p[0] * p[1]) - phases

    def jacobian(p):
        jac = np.empty((len(freqs), 2))
        jac[:, 0] = freqs / (p[0] ** 2 + freqs**2)
        jac[:, 1] = -freqs / (p[1] ** 2 + freqs**2)
        return jac

    res = fit_damped_least_squares(residual, jacobian, p0)
    f1, f2 = np.abs(res.params)
    return PhaseModelFit(f1_hz=float(f1), f2_hz=float(f2), covariance=res.covariance)


def _windowed_magnitude(series: np.ndarray) -> tuple[np.ndarray, float]:
    n = len(series)
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)
    return np.abs(np.fft.rfft(series * window)), float(window.sum())


def _locate_tone(mag: np.ndarray, sample_rate_hz: float, n: int, tone_freq_hz: float) -> int:
    nominal = int(round(tone_freq_hz * n / sample_rate_hz))
    if not (0 < nominal < len(mag)):
        raise MissingToneError(f"tone frequency {tone_freq_hz:g} Hz outside spectrum")
    lo = max(1, nominal - TONE_SEARCH_BINS)
    hi = min(len(mag), nominal + TONE_SEARCH_BINS + 1)
    return lo + int(np.argmax(mag[lo:hi]))


def _tone_snr(mag: np.ndarray, k: int) -> float:
    lo = max(0, k - TONE_NEIGHBORHOOD_BINS)
    hi = min(len(mag), k + TONE_NEIGHBORHOOD_BINS + 1)
    neighborhood = np.r_[mag[lo : max(lo, k - 3)], mag[k + 4 : hi]]
    floor = float(np.median(neighborhood)) if len(neighborhood) else 0.0
    if mag[k] == 0.0:
        return 0.0
    return math.inf if floor == 0.0 else float(mag[k] / floor)


def amplitude_ratio(record: TwoChannelRecord, tone_freq_hz: float) -> float:
    """Top/bottom response ratio at the calibration tone.

    Both channels are Hann-windowed and the ratio of spectral magnitudes is
    taken at the tone bin (local peak within +-2 bins of nominal), so any
    common leakage factor cancels exactly.

    Raises
    ------
    MissingToneError
        Tone below 10x the local spectral floor in either channel.
    """
    mag_top, _ = _windowed_magnitude(record.top_t)
    mag_bottom, _ = _windowed_magnitude(record.bottom_t)
    k = _locate_tone(mag_top, record.sample_rate_hz, len(record), tone_freq_hz)
    for name, mag in (("top", mag_top), ("bottom", mag_bottom)):
        snr = _tone_snr(mag, k)
        if snr < TONE_MIN_SNR:
            raise MissingToneError(
                f"tone at {tone_freq_hz:g} Hz has SNR {snr:.2f} < {TONE_MIN_SNR:g} in {name} channel"
            )
    return float(mag_top[k] / mag_bottom[k])


def tone_amplitude_in_series(series: np.ndarray, sample_rate_hz: float, tone_freq_hz: float) -> float:
    """Hann-window-corrected tone amplitude in a single series (no SNR gate)."""
    series = np.asarray(series, dtype=float)
    mag, window_sum = _windowed_magnitude(series)
    k = _locate_tone(mag, sample_rate_hz, len(series), tone_freq_hz)
    return float(2.0 * mag[k] / window_sum)


def subtract(
    record: TwoChannelRecord, cal: GradCalibration, phase_correct: bool = True
) -> np.ndarray:
    """Gradiometric difference: top channel minus the calibrated bottom channel.

    Both channels are transformed to the frequency domain; the bottom
    spectrum is multiplied by the calibration amplitude ratio and, with
    ``phase_correct``, rotated by the model phase difference at every
    frequency along with the model magnitude dispersion (anchored so the
    correction equals exactly the measured ratio at the calibration tone).
    The corrected bottom spectrum is subtracted from the top and the result
    transformed back to a real series.

    The DC bin is left uncorrected, so the output mean is exactly the
    difference of the channel means; the Nyquist bin receives no phase
    rotation (keeps the spectrum Hermitian). Any record length is handled
    directly by the FFT, no padding needed.
    """
    n = len(record)
    freqs = np.fft.rfftfreq(n, 1.0 / record.sample_rate_hz)
    top = np.fft.rfft(record.top_t)
    bottom = np.fft.rfft(record.bottom_t)

    correction = np.full(len(freqs), cal.amplitude_ratio, dtype=complex)
    if phase_correct:
        anchor = (
            magnitude_ratio(cal.tone_freq_hz, cal.f1_hz, cal.f2_hz)
            if cal.tone_freq_hz > 0
            else 1.0
        )
        correction *= magnitude_ratio(freqs, cal.f1_hz, cal.f2_hz) / anchor
        correction *= np.exp(1j * phase_difference(freqs, cal.f1_hz, cal.f2_hz))
    correction[0] = 1.0
    if n % 2 == 0:
        correction[-1] = abs(correction[-1])
    return np.fft.irfft(top - correction * bottom, n)


def reduction_ratio(
    record: TwoChannelRecord,
    cal: GradCalibration,
    tone_freq_hz: float,
    phase_correct: bool = True,
) -> float:
    """Tone amplitude in the top channel over its residual after subtraction.

    Infinite when the residual vanishes (perfectly matched channels).

    Raises
    ------
    MissingToneError
        Tone not present in the input record.
    """
    mag_top, window_sum = _windowed_magnitude(record.top_t)
    k = _locate_tone(mag_top, record.sample_rate_hz, len(record), tone_freq_hz)
    snr = _tone_snr(mag_top, k)
    if snr < TONE_MIN_SNR:
        raise MissingToneError(f"tone at {tone_freq_hz:g} Hz has SNR {snr:.2f} in top channel")
    top_amp = float(2.0 * mag_top[k] / window_sum)
    diff = subtract(record, cal, phase_correct=phase_correct)
    residual_amp = tone_amplitude_in_series(diff, record.sample_rate_hz, tone_freq_hz)
    if residual_amp == 0.0:
        return math.inf
    return top_amp / residual_amp
