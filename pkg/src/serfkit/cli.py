"""Command-line front end tying the analysis pipeline together.

Subcommands: simulate, fit-absorption, gas-solve, fit-response, fit-serf,
psd, calibrate, subtract, phase-fit, nmr-estimate, demo-paper. Every output
file is written atomically and accompanied by a ``<output>.manifest.json``
recording the command, input hashes, seed and tool version.

Exit codes: 0 success, 2 validation error, 3 fit failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__, dataio, demo
from .cellchem import GasCoefficients, solve_composition
from .errors import ConfigError, FitFailureError, InvalidParameterError, ValidationError
from .gradiometer import GradCalibration, amplitude_ratio, fit_phase_model, subtract
from .lineshape import fit_lorentzian, fit_response_curve
from .nmrsignal import SampleSpec, dipole_field, load_isotopes, thermal_polarization
from .noisepsd import band_floor, calibrate_tesla, welch_asd
from .serf import fit_tse, number_density
from .simulator import NoiseModel, SimConfig, simulate_record

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_FIT_FAILURE = 3
EXIT_USAGE = 64

DIPOLE_MODEL_NAME = "on_axis_point_dipole_spin_half"


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code on bad flags."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _parse_band(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError("band must be written lo:hi")
    try:
        return float(lo), float(hi)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _parse_tone(text: str) -> tuple[float, float]:
    freq, sep, amp = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError("tone must be written freq_hz:amp_t")
    try:
        return float(freq), float(amp)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _write_manifest(out_path, command: str, params: dict, input_paths, seed) -> None:
    inputs = [
        {"path": os.fspath(p), "sha256": dataio.sha256_file(p)} for p in input_paths
    ]
    hashed = {
        "command": command,
        "params": params,
        "input_hashes": [entry["sha256"] for entry in inputs],
    }
    config_hash = hashlib.sha256(
        json.dumps(hashed, sort_keys=True).encode("utf-8")
    ).hexdigest()
    manifest = {
        "command": command,
        "config_hash": config_hash,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "inputs": inputs,
        "params": params,
        "seed": seed,
        "tool_version": __version__,
    }
    dataio.write_json(os.fspath(out_path) + ".manifest.json", manifest)


def _print_result(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=True))


def _sim_config_from_json(raw: dict, seed_override=None) -> SimConfig:
    known = {
        "sample_rate_hz",
        "duration_s",
        "seed",
        "f1_hz",
        "f2_hz",
        "channel_gains",
        "tones",
        "noise",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown simulate config keys: {', '.join(sorted(unknown))}")
    noise_raw = raw.get("noise", {})
    noise_known = {
        "common_asd_t_sqrthz",
        "gradient_asd_t_sqrthz",
        "sensor_asd_t_sqrthz",
        "one_over_f_corner_hz",
    }
    unknown = set(noise_raw) - noise_known
    if unknown:
        raise ConfigError(f"unknown noise config keys: {', '.join(sorted(unknown))}")
    sensor = noise_raw.get("sensor_asd_t_sqrthz", 0.0)
    if isinstance(sensor, list):
        sensor = tuple(float(s) for s in sensor)
    noise = NoiseModel(
        common_asd_t_sqrthz=float(noise_raw.get("common_asd_t_sqrthz", 0.0)),
        gradient_asd_t_sqrthz=float(noise_raw.get("gradient_asd_t_sqrthz", 0.0)),
        sensor_asd_t_sqrthz=sensor,
        one_over_f_corner_hz=float(noise_raw.get("one_over_f_corner_hz", 0.0)),
    )
    try:
        tones = tuple((float(f), float(a), float(p)) for f, a, p in raw.get("tones", ()))
        gains = tuple(float(g) for g in raw.get("channel_gains", (1.0, 1.0)))
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad tones/channel_gains entry: {err}") from None
    if len(gains) != 2:
        raise ConfigError("channel_gains must hold exactly two values")
    seed = int(raw.get("seed", 0)) if seed_override is None else int(seed_override)
    if "sample_rate_hz" not in raw or "duration_s" not in raw:
        raise ConfigError("simulate config requires sample_rate_hz and duration_s")
    return SimConfig(
        sample_rate_hz=float(raw["sample_rate_hz"]),
        duration_s=float(raw["duration_s"]),
        seed=seed,
        f1_hz=float(raw.get("f1_hz", 49.9)),
        f2_hz=float(raw.get("f2_hz", 68.8)),
        channel_gains=gains,
        tones=tones,
        noise=noise,
    )


def _coeffs_from_config(path) -> GasCoefficients:
    raw = dataio.read_json(path)
    defaults = GasCoefficients()
    known = {
        "shift_he_ghz_per_amg",
        "shift_n2_ghz_per_amg",
        "broaden_he_ghz_per_amg",
        "broaden_n2_ghz_per_amg",
        "reference_freq_hz",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown coefficient keys: {', '.join(sorted(unknown))}")
    return GasCoefficients(
        shift_he_ghz_per_amg=raw.get("shift_he_ghz_per_amg", defaults.shift_he_ghz_per_amg),
        shift_n2_ghz_per_amg=raw.get("shift_n2_ghz_per_amg", defaults.shift_n2_ghz_per_amg),
        broaden_he_ghz_per_amg=raw.get(
            "broaden_he_ghz_per_amg", defaults.broaden_he_ghz_per_amg
        ),
        broaden_n2_ghz_per_amg=raw.get(
            "broaden_n2_ghz_per_amg", defaults.broaden_n2_ghz_per_amg
        ),
        reference_freq_hz=raw.get("reference_freq_hz", defaults.reference_freq_hz),
    )


def _cmd_simulate(args) -> int:
    cfg = _sim_config_from_json(dataio.read_json(args.config), args.seed)
    record = simulate_record(cfg)
    dataio.write_record_csv(args.out, record)
    _write_manifest(
        args.out,
        "simulate",
        {"config": os.fspath(args.config)},
        [args.config],
        cfg.seed,
    )
    _print_result({"out": os.fspath(args.out), "n_samples": len(record), "seed": cfg.seed})
    return EXIT_OK


def _cmd_fit_absorption(args) -> int:
    sweep = dataio.read_sweep_csv(args.in_path)
    fit = fit_lorentzian(sweep)
    result = fit.as_dict()
    dataio.write_json(args.out, result)
    _write_manifest(args.out, "fit-absorption", {}, [args.in_path], None)
    _print_result(result)
    return EXIT_OK


def _cmd_fit_response(args) -> int:
    sweep = dataio.read_sweep_csv(args.in_path)
    fit = fit_response_curve(sweep)
    result = fit.as_dict()
    dataio.write_json(args.out, result)
    _write_manifest(args.out, "fit-response", {}, [args.in_path], None)
    _print_result(result)
    return EXIT_OK


def _cmd_gas_solve(args) -> int:
    coeffs = _coeffs_from_config(args.config) if args.config else None
    comp = solve_composition(args.shift_ghz, args.width_ghz, coeffs)
    result = {"he_amagat": comp.he_amagat, "n2_amagat": comp.n2_amagat}
    if args.out:
        dataio.write_json(args.out, result)
        _write_manifest(
            args.out,
            "gas-solve",
            {"shift_ghz": args.shift_ghz, "width_ghz": args.width_ghz},
            [args.config] if args.config else [],
            None,
        )
    _print_result(result)
    return EXIT_OK


def _cmd_fit_serf(args) -> int:
    points = dataio.read_linewidth_points_csv(args.in_path)
    fit = fit_tse(
        points,
        nuclear_spin_i=args.nuclear_spin,
        slowing_q=args.slowing_q,
        fit_intrinsic=args.intrinsic is None,
        intrinsic_hwhm_hz=args.intrinsic if args.intrinsic is not None else 0.0,
    )
    result = {
        "t_se_s": fit.t_se_s,
        "intrinsic_hwhm_hz": fit.intrinsic_hwhm_hz,
        "n_cm3": number_density(fit.t_se_s, args.vbar, args.sigma_se),
    }
    dataio.write_json(args.out, result)
    _write_manifest(
        args.out,
        "fit-serf",
        {
            "nuclear_spin": args.nuclear_spin,
            "slowing_q": args.slowing_q,
            "intrinsic": args.intrinsic,
            "vbar": args.vbar,
            "sigma_se": args.sigma_se,
        },
        [args.in_path],
        None,
    )
    _print_result(result)
    return EXIT_OK


def _load_series(path, channel: str) -> tuple[float, np.ndarray]:
    # Accepts two-channel records and the single-channel output of subtract.
    header = dataio.csv_header(path)
    if header[:2] == ["t_s", "value_t"]:
        return dataio.read_series_csv(path)
    record = dataio.read_record_csv(path)
    return record.sample_rate_hz, (
        record.top_t if channel == "top" else record.bottom_t
    )


def _cmd_psd(args) -> int:
    rate, series = _load_series(args.in_path, args.channel)
    psd = welch_asd(series, rate, args.segment_len, args.overlap)
    scale = None
    if args.calibrate_tone:
        tone_freq, tone_amp = args.calibrate_tone
        scale = calibrate_tesla(psd, tone_freq, tone_amp)
        psd = psd.scaled(scale)
    dataio.write_psd_csv(args.out, psd)
    _write_manifest(
        args.out,
        "psd",
        {
            "channel": args.channel,
            "segment_len": args.segment_len,
            "overlap": args.overlap,
            "calibrate_tone": list(args.calibrate_tone) if args.calibrate_tone else None,
        },
        [args.in_path],
        None,
    )
    result = {"out": os.fspath(args.out), "n_averages": psd.n_averages}
    if scale is not None:
        result["tesla_scale"] = scale
    if args.band:
        lo, hi = args.band
        result["band_floor_t_sqrthz"] = band_floor(psd, lo, hi)
        result["band"] = [lo, hi]
    _print_result(result)
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    record = dataio.read_record_csv(args.in_path)
    ratio = amplitude_ratio(record, args.tone_freq)
    if args.phase_points:
        fit = fit_phase_model(dataio.read_phase_points_csv(args.phase_points))
        f1, f2 = fit.f1_hz, fit.f2_hz
    elif args.f1 is not None and args.f2 is not None:
        f1, f2 = args.f1, args.f2
    else:
        raise InvalidParameterError("provide either --phase-points or both --f1 and --f2")
    cal = GradCalibration(
        amplitude_ratio=ratio,
        f1_hz=f1,
        f2_hz=f2,
        tone_freq_hz=args.tone_freq,
        tone_amp_t=args.tone_amp,
    )
    dataio.write_calibration_json(args.out, cal)
    inputs = [args.in_path] + ([args.phase_points] if args.phase_points else [])
    _write_manifest(
        args.out,
        "calibrate",
        {"tone_freq": args.tone_freq, "tone_amp": args.tone_amp},
        inputs,
        None,
    )
    _print_result(cal.as_dict())
    return EXIT_OK


def _cmd_subtract(args) -> int:
    record = dataio.read_record_csv(args.in_path)
    cal = dataio.read_calibration_json(args.cal)
    diff = subtract(record, cal, phase_correct=args.phase)
    dataio.write_series_csv(args.out, record.sample_rate_hz, diff)
    _write_manifest(
        args.out,
        "subtract",
        {"phase": args.phase},
        [args.in_path, args.cal],
        None,
    )
    _print_result({"out": os.fspath(args.out), "rms_t": float(np.sqrt(np.mean(diff**2)))})
    return EXIT_OK


def _cmd_phase_fit(args) -> int:
    points = dataio.read_phase_points_csv(args.in_path)
    fit = fit_phase_model(points)
    result = {"f1_hz": fit.f1_hz, "f2_hz": fit.f2_hz}
    dataio.write_json(args.out, result)
    _write_manifest(args.out, "phase-fit", {}, [args.in_path], None)
    _print_result(result)
    return EXIT_OK


def _sample_from_args(args) -> SampleSpec:
    if args.config:
        raw = dataio.read_json(args.config)
        try:
            return SampleSpec(**raw)
        except TypeError as err:
            raise InvalidParameterError(f"bad sample config: {err}") from None
    isotopes = load_isotopes()
    if args.isotope not in isotopes:
        raise InvalidParameterError(
            f"unknown isotope {args.isotope!r}; known: {', '.join(sorted(isotopes))}"
        )
    iso = isotopes[args.isotope]
    return SampleSpec(
        volume_m3=args.volume_ul * 1e-9,
        spin_density_per_m3=args.spin_density,
        natural_abundance=args.abundance if args.abundance is not None else iso.natural_abundance,
        gyromag_rad_s_t=iso.gyromag_rad_s_t,
        spin=iso.spin,
        prepol_field_t=args.prepol_t,
        temperature_k=args.temperature_k,
        distance_m=args.distance_m,
    )


def _cmd_nmr_estimate(args) -> int:
    sample = _sample_from_args(args)
    result = {
        "polarization": thermal_polarization(
            sample.gyromag_rad_s_t, sample.prepol_field_t, sample.temperature_k
        ),
        "field_t": dipole_field(sample),
        "model": DIPOLE_MODEL_NAME,
    }
    if args.out:
        dataio.write_json(args.out, result)
        _write_manifest(
            args.out,
            "nmr-estimate",
            {} if args.config else {"isotope": args.isotope},
            [args.config] if args.config else [],
            None,
        )
    _print_result(result)
    return EXIT_OK


def _cmd_demo_paper(args) -> int:
    results = demo.run_demo(args.seed)
    print(demo.summary_table(results))
    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    grad = results["gradiometer"]
    artifacts = {
        "summary.json": lambda p: dataio.write_json(p, demo.public_results(results)),
        "calibration.json": lambda p: dataio.write_calibration_json(p, grad["_cal"]),
        "psd_single.csv": lambda p: dataio.write_psd_csv(p, grad["_psd_top"]),
        "psd_difference.csv": lambda p: dataio.write_psd_csv(p, grad["_psd_diff"]),
    }
    for name, writer in artifacts.items():
        path = os.path.join(out_dir, name)
        writer(path)
        _write_manifest(path, "demo-paper", {"artifact": name}, [], args.seed)
    print(f"artifacts written to {out_dir}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(
        prog="serfkit",
        description="SERF magnetometer characterization and gradiometric calibration",
    )
    parser.add_argument("--version", action="version", version=f"serfkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="generate a synthetic two-channel record")
    p.add_argument("--config", required=True, help="simulation config JSON")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--out", required=True, help="output record CSV (t_s,top_t,bottom_t)")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("fit-absorption", help="fit a Lorentzian to an absorption sweep")
    p.add_argument("--in", dest="in_path", required=True, help="sweep CSV (freq_hz,value)")
    p.add_argument("--out", required=True, help="fit result JSON")
    p.set_defaults(handler=_cmd_fit_absorption)

    p = sub.add_parser("fit-response", help="fit the resonance response curve")
    p.add_argument("--in", dest="in_path", required=True, help="sweep CSV (freq_hz,value)")
    p.add_argument("--out", required=True, help="fit result JSON")
    p.set_defaults(handler=_cmd_fit_response)

    p = sub.add_parser("gas-solve", help="invert line shift/width into gas densities")
    p.add_argument("--shift-ghz", type=float, required=True)
    p.add_argument("--width-ghz", type=float, required=True)
    p.add_argument("--config", help="coefficient overrides JSON")
    p.add_argument("--out", help="composition JSON")
    p.set_defaults(handler=_cmd_gas_solve)

    p = sub.add_parser("fit-serf", help="fit the spin-exchange time from linewidths")
    p.add_argument(
        "--in", dest="in_path", required=True, help="points CSV (resonance_hz,hwhm_hz[,weight])"
    )
    p.add_argument("--nuclear-spin", type=float, default=1.5)
    p.add_argument("--slowing-q", type=float, default=6.0)
    p.add_argument(
        "--intrinsic",
        type=float,
        default=None,
        help="hold the zero-field linewidth fixed at this value instead of co-fitting",
    )
    p.add_argument("--vbar", type=float, default=500.0, help="relative thermal velocity m/s")
    p.add_argument("--sigma-se", type=float, default=2e-14, help="spin-exchange cross section cm^2")
    p.add_argument("--out", required=True, help="fit result JSON")
    p.set_defaults(handler=_cmd_fit_serf)

    p = sub.add_parser("psd", help="Welch amplitude spectral density of one channel")
    p.add_argument(
        "--in",
        dest="in_path",
        required=True,
        help="record CSV, or a single-series CSV (t_s,value_t) as written by subtract",
    )
    p.add_argument("--channel", choices=("top", "bottom"), default="top",
                   help="channel to use when the input is a two-channel record")
    p.add_argument("--segment-len", type=int, default=4096)
    p.add_argument("--overlap", type=float, default=0.5)
    p.add_argument(
        "--calibrate-tone",
        type=_parse_tone,
        default=None,
        metavar="FREQ:AMP",
        help="rescale so the tone at FREQ hz reads AMP tesla",
    )
    p.add_argument("--band", type=_parse_band, default=None, metavar="LO:HI",
                   help="report the median floor over this band")
    p.add_argument("--out", required=True, help="output CSV (freq_hz,asd_t_sqrthz)")
    p.set_defaults(handler=_cmd_psd)

    p = sub.add_parser("calibrate", help="build the gradiometer calibration")
    p.add_argument("--in", dest="in_path", required=True, help="record CSV with the tone")
    p.add_argument("--tone-freq", type=float, required=True, help="calibration tone Hz")
    p.add_argument("--tone-amp", type=float, default=0.0, help="tone amplitude tesla")
    p.add_argument("--f1", type=float, default=None, help="top channel bandwidth Hz")
    p.add_argument("--f2", type=float, default=None, help="bottom channel bandwidth Hz")
    p.add_argument("--phase-points", default=None, help="phase CSV to fit f1/f2 from")
    p.add_argument("--out", required=True, help="calibration JSON")
    p.set_defaults(handler=_cmd_calibrate)

    p = sub.add_parser("subtract", help="calibrated two-channel difference")
    p.add_argument("--in", dest="in_path", required=True, help="record CSV")
    p.add_argument("--cal", required=True, help="calibration JSON")
    p.add_argument(
        "--phase",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="apply the frequency-dependent phase correction",
    )
    p.add_argument("--out", required=True, help="output CSV (t_s,value_t)")
    p.set_defaults(handler=_cmd_subtract)

    p = sub.add_parser("phase-fit", help="fit channel bandwidths from phase differences")
    p.add_argument("--in", dest="in_path", required=True, help="phase CSV (freq_hz,phase_rad)")
    p.add_argument("--out", required=True, help="fit result JSON")
    p.set_defaults(handler=_cmd_phase_fit)

    p = sub.add_parser("nmr-estimate", help="thermal polarization and sample field")
    p.add_argument("--config", help="sample spec JSON (full field set)")
    p.add_argument("--isotope", default="1H", help="isotope symbol from the bundled table")
    p.add_argument("--volume-ul", type=float, default=200.0, help="sample volume in uL")
    p.add_argument(
        "--spin-density", type=float, default=6.7e28, help="target nuclei per m^3"
    )
    p.add_argument("--abundance", type=float, default=None, help="override isotopic abundance")
    p.add_argument("--prepol-t", type=float, default=2.0, help="prepolarization field tesla")
    p.add_argument("--temperature-k", type=float, default=300.0)
    p.add_argument("--distance-m", type=float, default=0.01)
    p.add_argument("--out", help="estimate JSON")
    p.set_defaults(handler=_cmd_nmr_estimate)

    p = sub.add_parser(
        "demo-paper", help="run the full chain on bundled synthetic data"
    )
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out-dir", default="demo_out", help="artifact directory")
    p.set_defaults(handler=_cmd_demo_paper)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except FitFailureError as err:
        print(f"fit failed: {err}", file=sys.stderr)
        return EXIT_FIT_FAILURE
    except (OSError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
