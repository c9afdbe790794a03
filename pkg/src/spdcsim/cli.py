"""Command-line front end.

Subcommands: ``phasematch``, ``spectrum``, ``map``, ``fit``, ``threshold``,
``peaks``.  All are deterministic: identical configuration and inputs give
byte-identical outputs, SVG plots included.

Exit codes: 0 success, 1 configuration or input-format error, 2 numeric
failure (no phase matching, bad bracket, unusable spectrum structure),
3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .analysis import (
    BracketError,
    DataFormatError,
    FitConvergenceError,
    SpectrumStructureError,
    ZeroVarianceError,
    doubling_threshold,
    find_spectral_peaks,
    fit_axis_angle,
    read_experimental_csv,
)
from .config import ConfigError, RunConfig, load_run_config
from .dispersion import (
    DispersionError,
    PhaseMatchingError,
    mismatch_12,
    solve_phase_matching_angle,
    wavelength_to_omega,
)
from .spectra import (
    conditional_spectrum,
    joint_density_map,
    read_spectrum_csv,
    write_map_csv,
    write_spectrum_csv,
)
from .svg import heatmap_svg, line_plot_svg

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_IO = 3

_NUMERIC_ERRORS = (
    DispersionError,
    PhaseMatchingError,
    BracketError,
    SpectrumStructureError,
    FitConvergenceError,
    ZeroVarianceError,
    ArithmeticError,
)

THRESHOLD_NOTE = (
    "Peak doubling requires pump pulses shorter than roughly 200 fs under the "
    "reference configuration; tau_star_fs is the operational boundary, the "
    "largest duration with two peaks detected at the configured prominence."
)


def _overrides(args) -> dict:
    over = {
        "analysis.min_prominence": getattr(args, "prominence", None),
        "analysis.convolve_fwhm_nm": getattr(args, "convolve_fwhm", None),
        "pump.tau_fs": getattr(args, "tau", None),
    }
    if getattr(args, "convolve_fwhm", None) is not None:
        over["analysis.convolve"] = True
    return over


def _load(args) -> RunConfig:
    return load_run_config(args.config, _overrides(args))


def _emit_report(report: dict, out_path: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")


def _svg_path(out_path: str) -> Path:
    return Path(out_path).with_suffix(".svg")


def cmd_phasematch(args) -> int:
    cfg = _load(args)
    lambda0 = float(cfg.pump["lambda0_nm"])
    phi = solve_phase_matching_angle(lambda0, cfg.sellmeier)
    half = wavelength_to_omega(lambda0) / 2.0
    residual = abs(mismatch_12(half, half, phi, cfg.sellmeier))
    report = {
        "angle_deg": math.degrees(phi),
        "angle_deg_str": f"{math.degrees(phi):.6f}",
        "residual_rad_per_um": residual,
        "pump_lambda0_nm": lambda0,
        "sellmeier": cfg.sellmeier.name,
        "config": cfg.header_meta(),
    }
    _emit_report(report, args.out)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    if not args.out:
        raise ConfigError("spectrum requires --out PATH for the CSV")
    cfg = _load(args)
    pump = cfg.pump_pulse()
    crystal = cfg.crystal_config()
    spec = conditional_spectrum(
        args.lambda2,
        cfg.spectrum_grid(),
        pump,
        crystal,
        normalization=args.normalization,
        convolve_fwhm_nm=cfg.convolve_fwhm(),
    )
    spec.meta.update({f"config.{k}": v for k, v in cfg.header_meta().items()})
    write_spectrum_csv(spec, args.out)
    if args.svg:
        svg = line_plot_svg(
            spec.lambda1_nm,
            spec.density,
            xlabel="signal wavelength lambda1 (nm)",
            ylabel="coincidence density (arb. units)",
            title=f"lambda2 = {args.lambda2:g} nm, tau = {pump.tau_fs:g} fs",
        )
        _svg_path(args.out).write_text(svg, encoding="utf-8")
    return EXIT_OK


def cmd_map(args) -> int:
    if not args.out:
        raise ConfigError("map requires --out PATH for the CSV")
    cfg = _load(args)
    pump = cfg.pump_pulse()
    crystal = cfg.crystal_config()
    lam1, lam2 = cfg.map_axes()
    normalization = "energy" if pump.energy_scale is not None else "unit-max"
    jmap = joint_density_map(
        lam1,
        lam2,
        pump,
        crystal,
        normalization=normalization,
        convolve_fwhm_nm=cfg.convolve_fwhm(),
        workers=args.workers,
    )
    jmap.meta.update({f"config.{k}": v for k, v in cfg.header_meta().items()})
    write_map_csv(jmap, args.out)
    if args.svg:
        svg = heatmap_svg(
            jmap.lambda1_nm,
            jmap.lambda2_nm,
            jmap.values,
            xlabel="signal wavelength lambda1 (nm)",
            ylabel="idler wavelength lambda2 (nm)",
            title=f"joint density, tau = {pump.tau_fs:g} fs",
        )
        _svg_path(args.out).write_text(svg, encoding="utf-8")
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _load(args)
    datasets = [read_experimental_csv(p) for p in args.data]
    pump = cfg.pump_pulse()
    crystal = cfg.crystal_config()
    lo_deg, hi_deg = (float(v) for v in cfg.analysis["fit_bracket_deg"])
    weighted = cfg.analysis["weighted_fit"] and not args.unweighted
    result = fit_axis_angle(
        datasets,
        pump,
        crystal,
        (math.radians(lo_deg), math.radians(hi_deg)),
        weighted=weighted,
    )
    report = {
        "phi0_deg": result.phi_deg,
        "phi0_deg_str": f"{result.phi_deg:.4f}",
        "per_curve_scale": list(result.per_curve_scale),
        "r2_per_curve": list(result.r2_per_curve),
        "residual_sum": result.residual_sum,
        "weighted": bool(weighted),
        "warnings": list(result.warnings),
        "datasets": [str(p) for p in args.data],
        "config": cfg.header_meta(),
    }
    _emit_report(report, args.out)
    return EXIT_OK


def cmd_threshold(args) -> int:
    cfg = _load(args)
    pump = cfg.pump_pulse()
    crystal = cfg.crystal_config()
    tau_star = doubling_threshold(
        args.lambda2,
        pump,
        crystal,
        (args.bracket[0], args.bracket[1]),
        cfg.spectrum_grid(),
        min_prominence=float(cfg.analysis["min_prominence"]),
    )
    report = {
        "tau_star_fs": tau_star,
        "lambda2_nm": args.lambda2,
        "bracket_fs": list(args.bracket),
        "min_prominence": float(cfg.analysis["min_prominence"]),
        "note": THRESHOLD_NOTE,
        "config": cfg.header_meta(),
    }
    _emit_report(report, args.out)
    return EXIT_OK


def cmd_peaks(args) -> int:
    cfg = _load(args)
    if (args.lambda2 is None) == (getattr(args, "infile", None) is None):
        raise ConfigError("peaks needs exactly one of --lambda2 or --in")
    if args.lambda2 is not None:
        spec = conditional_spectrum(
            args.lambda2,
            cfg.spectrum_grid(),
            cfg.pump_pulse(),
            cfg.crystal_config(),
            normalization="raw",
            convolve_fwhm_nm=cfg.convolve_fwhm(),
        )
    else:
        spec = read_spectrum_csv(args.infile)
    peaks = find_spectral_peaks(spec, float(cfg.analysis["min_prominence"]))
    report = {
        "lambda2_nm": spec.lambda2_nm,
        "min_prominence": float(cfg.analysis["min_prominence"]),
        "peak_count": len(peaks),
        "peaks": [
            {"location_nm": p.location_nm, "height": p.height, "prominence": p.prominence}
            for p in peaks
        ],
        "config": cfg.header_meta(),
    }
    _emit_report(report, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=None, help="TOML run configuration")
    common.add_argument("--out", metavar="PATH", default=None, help="output file")
    common.add_argument("--svg", action="store_true", help="also write an SVG plot next to --out")
    common.add_argument("--prominence", type=float, default=None, metavar="F", help="peak prominence floor, fraction of max")
    common.add_argument("--convolve-fwhm", dest="convolve_fwhm", type=float, default=None, metavar="NM", help="apply instrument response of this FWHM")

    parser = argparse.ArgumentParser(
        prog="spdcsim",
        description="Coincidence spectra of pulsed collinear type-II down-conversion",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phasematch", parents=[common], help="solve the degenerate phase-matching angle")
    p.set_defaults(func=cmd_phasematch)

    p = sub.add_parser("spectrum", parents=[common], help="coincidence spectrum at fixed lambda2 -> CSV")
    p.add_argument("--lambda2", type=float, required=True, metavar="NM")
    p.add_argument("--tau", type=float, default=None, metavar="FS", help="override pump duration")
    p.add_argument("--normalization", choices=("raw", "unit-max"), default="unit-max")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("map", parents=[common], help="2-D joint density map -> CSV")
    p.add_argument("--tau", type=float, default=None, metavar="FS", help="override pump duration")
    p.add_argument("--workers", type=int, default=1, metavar="N", help="parallel row evaluation")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("fit", parents=[common], help="fit the axis angle to measured spectra")
    p.add_argument("data", nargs="+", metavar="CSV", help="experimental spectrum files")
    p.add_argument("--unweighted", action="store_true", help="ignore the std column in the residual")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("threshold", parents=[common], help="pulse-duration boundary of the double peak")
    p.add_argument("--lambda2", type=float, required=True, metavar="NM")
    p.add_argument("--bracket", type=float, nargs=2, default=(110.0, 1000.0), metavar=("LO", "HI"))
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("peaks", parents=[common], help="detect peaks of a computed or stored spectrum")
    p.add_argument("--lambda2", type=float, default=None, metavar="NM")
    p.add_argument("--in", dest="infile", default=None, metavar="CSV", help="analyze an existing spectrum CSV")
    p.set_defaults(func=cmd_peaks)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DataFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
