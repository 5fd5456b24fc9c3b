"""Welch-averaged amplitude spectral density, tone calibration, band floors.

The estimator is one-sided and power-normalized: for white noise of standard
deviation sigma sampled at fs, the ASD reads sigma * sqrt(2 / fs), and the
integral of the PSD over frequency equals the mean-square signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    InsufficientBandError,
    InsufficientDataError,
    InvalidParameterError,
    MissingToneError,
)

DEFAULT_SEGMENT_LEN = 4096
DEFAULT_OVERLAP = 0.5
MIN_SEGMENT_LEN = 64

# Tone handling: integration halfwidth around the peak bin, and the
# local-median SNR threshold used both for detection and for exclusion.
TONE_SEARCH_BINS = 2
TONE_INTEGRATE_BINS = 3
TONE_NEIGHBORHOOD_BINS = 20
TONE_MIN_SNR = 10.0


@dataclass(frozen=True)
class PsdEstimate:
    """One-sided amplitude spectral density with its estimation metadata."""

    freqs_hz: np.ndarray
    asd_t_sqrthz: np.ndarray
    segment_len: int
    overlap_fraction: float
    window_name: str
    n_averages: int
    parseval_normalized: bool = True

    def __post_init__(self):
        freqs = np.asarray(self.freqs_hz, dtype=float)
        asd = np.asarray(self.asd_t_sqrthz, dtype=float)
        object.__setattr__(self, "freqs_hz", freqs)
        object.__setattr__(self, "asd_t_sqrthz", asd)
        if np.any(asd < 0):
            raise InvalidParameterError("ASD values must be nonnegative")

    @property
    def bin_width_hz(self) -> float:
        return float(self.freqs_hz[1] - self.freqs_hz[0])

    def scaled(self, factor: float) -> "PsdEstimate":
        """Multiplicatively rescaled copy (tesla calibration)."""
        return replace(self, asd_t_sqrthz=self.asd_t_sqrthz * factor)


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def welch_asd(
    series,
    sample_rate_hz: float,
    segment_len: int = DEFAULT_SEGMENT_LEN,
    overlap_fraction: float = DEFAULT_OVERLAP,
) -> PsdEstimate:
    """Welch estimate of the one-sided amplitude spectral density.

    Hann-windowed overlapping segments, power-normalized so that
    sum(PSD) * bin_width equals the mean-square input for stationary noise.

    Raises
    ------
    InsufficientDataError
        Series shorter than one segment.
    """
    series = np.asarray(series, dtype=float)
    if not sample_rate_hz > 0:
        raise InvalidParameterError("sample_rate_hz must be positive")
    if segment_len < MIN_SEGMENT_LEN:
        raise InvalidParameterError(f"segment_len must be at least {MIN_SEGMENT_LEN}")
    if not 0.0 <= overlap_fraction < 1.0:
        raise InvalidParameterError("overlap_fraction must be in [0, 1)")
    if len(series) < segment_len:
        raise InsufficientDataError(
            f"series of {len(series)} samples shorter than one segment ({segment_len})"
        )

    window = hann_window(segment_len)
    step = segment_len - int(overlap_fraction * segment_len)
    step = max(step, 1)
    starts = range(0, len(series) - segment_len + 1, step)
    scale = 2.0 / (sample_rate_hz * float(window @ window))

    psd = np.zeros(segment_len // 2 + 1)
    n_avg = 0
    for s in starts:
        seg = series[s : s + segment_len]
        spec = np.fft.rfft(seg * window)
        psd += scale * np.abs(spec) ** 2
        n_avg += 1
    psd /= n_avg
    # One-sided doubling does not apply to the DC and Nyquist bins.
    psd[0] *= 0.5
    if segment_len % 2 == 0:
        psd[-1] *= 0.5

    freqs = np.fft.rfftfreq(segment_len, 1.0 / sample_rate_hz)
    return PsdEstimate(
        freqs_hz=freqs,
        asd_t_sqrthz=np.sqrt(psd),
        segment_len=segment_len,
        overlap_fraction=overlap_fraction,
        window_name="hann",
        n_averages=n_avg,
    )


def _locate_tone_bin(psd: PsdEstimate, tone_freq_hz: float) -> int:
    nominal = int(round(tone_freq_hz / psd.bin_width_hz))
    if not (0 < nominal < len(psd.freqs_hz)):
        raise MissingToneError(f"tone frequency {tone_freq_hz:g} Hz outside PSD range")
    lo = max(1, nominal - TONE_SEARCH_BINS)
    hi = min(len(psd.freqs_hz), nominal + TONE_SEARCH_BINS + 1)
    return lo + int(np.argmax(psd.asd_t_sqrthz[lo:hi]))


def _local_floor(asd: np.ndarray, k: int, exclude: int) -> float:
    lo = max(0, k - TONE_NEIGHBORHOOD_BINS)
    hi = min(len(asd), k + TONE_NEIGHBORHOOD_BINS + 1)
    neighborhood = np.r_[asd[lo : max(lo, k - exclude)], asd[k + exclude + 1 : hi]]
    return float(np.median(neighborhood)) if len(neighborhood) else 0.0


def tone_amplitude(psd: PsdEstimate, tone_freq_hz: float) -> float:
    """Tone amplitude (peak, in tesla) from integrated PSD around the peak bin.

    Power is summed over the peak +-3 bins above the local floor, then
    ``A = sqrt(2 * power)``.

    Raises
    ------
    MissingToneError
        Peak below 10x the local median ASD.
    """
    asd = psd.asd_t_sqrthz
    k = _locate_tone_bin(psd, tone_freq_hz)
    floor = _local_floor(asd, k, TONE_INTEGRATE_BINS)
    if asd[k] == 0.0 or (floor > 0.0 and asd[k] / floor < TONE_MIN_SNR):
        snr = 0.0 if asd[k] == 0.0 else asd[k] / floor
        raise MissingToneError(
            f"tone at {tone_freq_hz:g} Hz has SNR {snr:.2f} < {TONE_MIN_SNR:g}"
        )
    lo = max(0, k - TONE_INTEGRATE_BINS)
    hi = min(len(asd), k + TONE_INTEGRATE_BINS + 1)
    power = float(np.sum(np.clip(asd[lo:hi] ** 2 - floor**2, 0.0, None))) * psd.bin_width_hz
    return math.sqrt(2.0 * power)


def calibrate_tesla(psd: PsdEstimate, tone_freq_hz: float, tone_amp_t: float) -> float:
    """Multiplicative ASD scale that maps the measured tone onto ``tone_amp_t``.

    Raises
    ------
    MissingToneError
        Tone not visible above the local floor.
    """
    if not tone_amp_t > 0:
        raise InvalidParameterError("tone_amp_t must be positive")
    measured = tone_amplitude(psd, tone_freq_hz)
    return tone_amp_t / measured


def band_floor(psd: PsdEstimate, f_lo_hz: float, f_hi_hz: float) -> float:
    """Median in-band ASD after excluding tone-like bins.

    A bin counts as tone-like when it exceeds 10x the median of its
    +-20-bin neighborhood.

    Raises
    ------
    InsufficientBandError
        Band outside the PSD range or spanning fewer than 5 bins.
    """
    if not f_lo_hz < f_hi_hz:
        raise InsufficientBandError("band must have f_lo < f_hi")
    freqs, asd = psd.freqs_hz, psd.asd_t_sqrthz
    sel = np.flatnonzero((freqs >= f_lo_hz) & (freqs <= f_hi_hz))
    if len(sel) < 5:
        raise InsufficientBandError(
            f"band {f_lo_hz:g}-{f_hi_hz:g} Hz spans {len(sel)} bins, need at least 5"
        )
    keep = []
    for k in sel:
        lo = max(0, k - TONE_NEIGHBORHOOD_BINS)
        hi = min(len(asd), k + TONE_NEIGHBORHOOD_BINS + 1)
        if not asd[k] > TONE_MIN_SNR * np.median(asd[lo:hi]):
            keep.append(k)
    if not keep:
        raise InsufficientBandError("every bin in the band is tone-flagged")
    return float(np.median(asd[keep]))
