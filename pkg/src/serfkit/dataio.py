"""CSV/JSON readers and writers with atomic output.

Series go to CSV, parameters and results to JSON. Floats are written with 17
significant digits so every value round-trips exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile

import numpy as np

from .errors import InvalidParameterError
from .gradiometer import GradCalibration, PhasePoint
from .lineshape import FrequencySweep
from .noisepsd import PsdEstimate
from .records import TwoChannelRecord
from .serf import LinewidthPoint

FLOAT_FMT = ".17g"


def _fmt(x) -> str:
    return format(float(x), FLOAT_FMT)


def atomic_write_text(path, text: str) -> None:
    """Write via a same-directory temp file and rename; no partial outputs."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_csv(path, header, columns) -> None:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _read_csv(path, expected_header, optional_tail=0):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InvalidParameterError(f"{path}: empty file") from None
        required = list(expected_header[: len(expected_header) - optional_tail])
        if header[: len(required)] != required:
            raise InvalidParameterError(
                f"{path}: expected header starting with {','.join(required)}, got {','.join(header)}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError as err:
                raise InvalidParameterError(f"{path}:{lineno}: {err}") from None
    if not rows:
        raise InvalidParameterError(f"{path}: no data rows")
    return rows


def write_sweep_csv(path, sweep: FrequencySweep) -> None:
    _write_csv(path, ("freq_hz", "value"), (sweep.freqs_hz, sweep.values))


def read_sweep_csv(path) -> FrequencySweep:
    rows = _read_csv(path, ("freq_hz", "value"))
    data = np.asarray(rows)
    return FrequencySweep(freqs_hz=data[:, 0], values=data[:, 1])


def write_record_csv(path, record: TwoChannelRecord) -> None:
    _write_csv(
        path, ("t_s", "top_t", "bottom_t"), (record.times(), record.top_t, record.bottom_t)
    )


def read_record_csv(path) -> TwoChannelRecord:
    rows = _read_csv(path, ("t_s", "top_t", "bottom_t"))
    data = np.asarray(rows)
    t = data[:, 0]
    if len(t) < 2:
        raise InvalidParameterError(f"{path}: need at least 2 samples")
    if t[-1] <= t[0]:
        raise InvalidParameterError(f"{path}: time column must be increasing")
    rate = (len(t) - 1) / (t[-1] - t[0])
    return TwoChannelRecord(sample_rate_hz=rate, top_t=data[:, 1], bottom_t=data[:, 2])


def write_series_csv(path, sample_rate_hz: float, values) -> None:
    values = np.asarray(values, dtype=float)
    t = np.arange(len(values)) / sample_rate_hz
    _write_csv(path, ("t_s", "value_t"), (t, values))


def read_series_csv(path) -> tuple[float, np.ndarray]:
    """Single-channel series CSV; returns (sample_rate_hz, values)."""
    rows = _read_csv(path, ("t_s", "value_t"))
    data = np.asarray(rows)
    t = data[:, 0]
    if len(t) < 2:
        raise InvalidParameterError(f"{path}: need at least 2 samples")
    if t[-1] <= t[0]:
        raise InvalidParameterError(f"{path}: time column must be increasing")
    return (len(t) - 1) / (t[-1] - t[0]), data[:, 1]


def csv_header(path) -> list[str]:
    with open(path, encoding="utf-8", newline="") as fh:
        try:
            return [h.strip() for h in next(csv.reader(fh))]
        except StopIteration:
            raise InvalidParameterError(f"{path}: empty file") from None


def read_linewidth_points_csv(path) -> list[LinewidthPoint]:
    rows = _read_csv(path, ("resonance_hz", "hwhm_hz", "weight"), optional_tail=1)
    return [
        LinewidthPoint(
            resonance_hz=r[0],
            hwhm_hz=r[1],
            weight=r[2] if len(r) > 2 else None,
        )
        for r in rows
    ]


def read_phase_points_csv(path) -> list[PhasePoint]:
    rows = _read_csv(path, ("freq_hz", "phase_rad"))
    return [PhasePoint(freq_hz=r[0], phase_rad=r[1]) for r in rows]


def write_phase_points_csv(path, points) -> None:
    freqs = [p.freq_hz for p in points]
    phases = [p.phase_rad for p in points]
    _write_csv(path, ("freq_hz", "phase_rad"), (freqs, phases))


def write_linewidth_points_csv(path, points) -> None:
    res = [p.resonance_hz for p in points]
    widths = [p.hwhm_hz for p in points]
    _write_csv(path, ("resonance_hz", "hwhm_hz"), (res, widths))


def write_psd_csv(path, psd: PsdEstimate) -> None:
    _write_csv(path, ("freq_hz", "asd_t_sqrthz"), (psd.freqs_hz, psd.asd_t_sqrthz))


def write_calibration_json(path, cal: GradCalibration) -> None:
    write_json(path, cal.as_dict())


def read_calibration_json(path) -> GradCalibration:
    raw = read_json(path)
    try:
        return GradCalibration(
            amplitude_ratio=raw["amplitude_ratio"],
            f1_hz=raw["f1_hz"],
            f2_hz=raw["f2_hz"],
            tone_freq_hz=raw.get("tone_freq_hz", 0.0),
            tone_amp_t=raw.get("tone_amp_t", 0.0),
        )
    except KeyError as err:
        raise InvalidParameterError(f"{path}: missing calibration key {err}") from None
