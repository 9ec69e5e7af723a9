"""Command-line pipeline: simulate | pfa | autofocus | limits | metrics.

Commands exchange data through the binary+sidecar dataset files and are
driven by one JSON config (see config.DEFAULTS for the schema and every
default).  Exit codes: 0 success, 2 usage/config/kind errors, 1 runtime
failures.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np
from scipy.constants import speed_of_light

from . import dataio
from .config import (
    ConfigError,
    build_error,
    build_geometry,
    build_pipeline_config,
    build_radar,
    build_scene,
    hash_config,
    load_config,
)
from .error_structure import necessity_limits
from .metrics import FocusMetrics, image_contrast, image_entropy, point_response_metrics
from .pipeline import baseline_1d, baseline_prior2d, ka_autofocus, measure_residual_rcm
from .polar_format import design_grid, form_image, polar_format, unform_image
from .simulate import add_noise, synth_phase_history

USAGE_EXIT = 2
FAILURE_EXIT = 1


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.seed)
    radar = build_radar(cfg)
    geom = build_geometry(cfg, radar)
    scene = build_scene(cfg)
    err = build_error(cfg, geom.slow_time)
    ph = synth_phase_history(scene, geom, radar, err)
    dataio.save_phase_history(args.output, ph, config_hash=hash_config(cfg))
    print(f"wrote phase history {ph.data.shape[0]}x{ph.data.shape[1]} -> {args.output}")
    return 0


def _cmd_pfa(args) -> int:
    cfg = load_config(args.config, args.seed)
    ph = dataio.load_phase_history(args.input)
    g = cfg["grid"]
    grid = design_grid(ph, nx=g["nx"], ny=g["ny"], margin=g["margin"], taps=g["taps"])
    spec = polar_format(ph, grid=grid, taps=g["taps"], oversample=g["oversample"])
    snr = cfg["noise"]["image_peak_snr_db"]
    if snr is not None:
        spec = add_noise(spec, snr, seed=cfg["seed"])
    dataio.save_spectrum(args.output, spec, config_hash=hash_config(cfg))
    print(f"wrote spectrum {spec.data.shape[0]}x{spec.data.shape[1]} -> {args.output}")
    if args.image:
        img = form_image(spec, taper=cfg["pipeline"]["taper"])
        dataio.save_image(args.image, img, config_hash=hash_config(cfg))
        print(f"wrote image -> {args.image}")
    return 0


def _cmd_autofocus(args) -> int:
    cfg = load_config(args.config, args.seed)
    spec = dataio.load_spectrum(args.input)
    pipeline_cfg = build_pipeline_config(cfg)
    runner = {"ka": ka_autofocus, "1d": baseline_1d, "prior2d": baseline_prior2d}[args.mode]
    image, report = runner(spec, pipeline_cfg)
    dataio.save_image(args.output, image, config_hash=hash_config(cfg))
    print(f"wrote image -> {args.output}")
    text = report.to_text()
    if args.report:
        dataio._atomic_write(args.report, text.encode())
        print(f"wrote report -> {args.report}")
    else:
        print(text, end="")
    if args.dump_profiles:
        for stage in report.stages:
            unit = "m" if stage.profile_unit == "m" else "rad"
            path = f"{args.dump_profiles}.{stage.name}.csv"
            dataio.save_profile_csv(path, spec.grid.x, stage.profile, name=f"value_{unit}")
            print(f"wrote profile -> {path}")
    return 0


def _cmd_limits(args) -> int:
    y0 = 4 * np.pi * args.sin_phi_ref * args.fc / speed_of_light
    rho_y = args.res_y if args.res_y is not None else args.res
    report = necessity_limits(args.res, rho_y, y0, coeff=args.coeff)
    print(f"Y0 = {y0:.4f} rad/m  (fc = {args.fc:g} Hz, sin phi_ref = {args.sin_phi_ref:g})")
    print(f"resolution: azimuth {args.res:g} m, range {rho_y:g} m")
    print(f"a_ape     = {report.a_ape:.6g}")
    print(f"a_rcm     = {report.a_rcm:.6g}")
    print(f"a_defocus = {report.a_defocus:.6g}")
    if args.coeff is not None:
        print(f"coefficient a = {args.coeff:g} -> region: {report.region}")
    if args.table:
        print("\nresolution_m  a_ape        a_rcm        a_defocus    region")
        for rho in np.geomspace(args.table_min, args.table_max, args.table_steps):
            rep = necessity_limits(rho, rho, y0, coeff=args.coeff)
            region = rep.region if args.coeff is not None else "-"
            print(f"{rho:11.4f}  {rep.a_ape:.5e}  {rep.a_rcm:.5e}  {rep.a_defocus:.5e}  {region}")
    return 0


def _cmd_metrics(args) -> int:
    img = dataio.load_image(args.input)
    entropy = image_entropy(img)
    contrast = image_contrast(img)
    irw_a = irw_r = pslr_a = pslr_r = None
    try:
        pr = point_response_metrics(img, upsample=args.upsample)
        irw_a, irw_r = pr.irw_azimuth, pr.irw_range
        pslr_a, pslr_r = pr.pslr_azimuth, pr.pslr_range
    except ValueError as exc:
        print(f"note: point response not measured ({exc})")
    rcm_cells = None
    if args.rcm:
        rcm_cells = measure_residual_rcm(unform_image(img))
    metrics = FocusMetrics(
        entropy=entropy, contrast=contrast,
        irw_azimuth=irw_a, irw_range=irw_r,
        pslr_azimuth=pslr_a, pslr_range=pslr_r,
        residual_rcm_cells=rcm_cells,
    )
    print(metrics.to_text(), end="")
    if args.export:
        dataio.export_magnitude(img, args.export, dynamic_range_db=args.dynamic_range)
        print(f"wrote magnitude -> {args.export}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarfocus",
        description="Spotlight-SAR polar-format imaging with knowledge-aided 2-D autofocus",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="scene + geometry + error config -> phase history")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("pfa", help="phase history -> spectrum (+ optional image)")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--image", default=None)
    p.set_defaults(func=_cmd_pfa)

    p = sub.add_parser("autofocus", help="spectrum -> refocused image + report")
    p.add_argument("--mode", choices=("ka", "1d", "prior2d"), default="ka")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--dump-profiles", default=None, metavar="PREFIX")
    p.set_defaults(func=_cmd_autofocus)

    p = sub.add_parser("limits", help="print autofocus-necessity thresholds and region")
    p.add_argument("--res", type=float, required=True, help="azimuth resolution (m)")
    p.add_argument("--res-y", type=float, default=None, help="range resolution (m), default --res")
    p.add_argument("--coeff", type=float, default=None, help="quadratic coefficient a")
    p.add_argument("--fc", type=float, default=1.0e10)
    p.add_argument("--sin-phi-ref", type=float, default=1.0)
    p.add_argument("--table", action="store_true", help="print a resolution sweep table")
    p.add_argument("--table-min", type=float, default=0.03)
    p.add_argument("--table-max", type=float, default=1.0)
    p.add_argument("--table-steps", type=int, default=16)
    p.set_defaults(func=_cmd_limits)

    p = sub.add_parser("metrics", help="image -> focus metrics (+ optional PGM export)")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--rcm", action="store_true", help="also re-estimate residual migration")
    p.add_argument("--upsample", type=int, default=16)
    p.add_argument("--export", default=None)
    p.add_argument("--dynamic-range", type=float, default=40.0)
    p.set_defaults(func=_cmd_metrics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (ConfigError, dataio.DatasetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE_EXIT


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
