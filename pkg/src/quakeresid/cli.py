"""Command-line interface: run any diagnostic from files, emit CSV/JSON,
render SVG figures.

Exit codes: 0 success, 2 usage error, 3 data or validation error.  Every
command is a pure function of (input files, flags, seed); outputs written
with --out get a manifest sidecar at <out>.manifest.json.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .catalogs import filter_catalog, parse_catalog, serialize_catalog
from .consistency import l_test, log_likelihood, n_test
from .errors import QuakeResidError
from .forecasts import parse_forecast
from .intensity import aggregate, integrate, scale_window
from .manifest import build_manifest
from .residuals import (deviance_residuals, lr_score, pearson_residuals,
                        raw_residuals)
from .rng import SeededStream
from .secondorder import (radii_grid, ripley_k, weighted_k,
                          wk_confidence_bands)
from .simulate import simulate_catalog
from .svg import k_curve_svg, point_map_svg, residual_map_svg
from .transforms import (assess_homogeneity, rescale, super_thin, superpose,
                         thin_approx, thin_exact)

DEFAULT_MAG_MIN = 3.95
DEFAULT_DEPTH_MAX = 30.0
DEFAULT_SIMS = 1000
DEFAULT_R_MAX = 0.7
DEFAULT_R_STEP = 0.01


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _sidecar(out_path, manifest):
    if out_path is not None:
        _write(str(out_path) + ".manifest.json", manifest.to_json())


def _derived_path(out_path, suffix: str):
    stem, ext = os.path.splitext(out_path)
    return stem + suffix + (ext or ".csv")


def _load_pair(args, forecast_path=None):
    """Forecast + filtered catalog + aggregated intensity field."""
    forecast = parse_forecast(_read(forecast_path or args.forecast))
    catalog = parse_catalog(_read(args.catalog))
    catalog = filter_catalog(catalog, forecast, args.mag_min, args.depth_max)
    fld = aggregate(forecast, args.mag_min)
    if args.window_fraction != 1.0:
        fld = scale_window(fld, args.window_fraction)
    return forecast, catalog, fld


def _radii(args):
    n = int(round(args.rmax / args.dr))
    if n < 1:
        raise QuakeResidError("rmax must be at least dr")
    return radii_grid(np.linspace(args.dr, args.rmax, n))


def _event_array(catalog):
    if len(catalog) == 0:
        return np.zeros((0, 2))
    return np.column_stack([catalog.lons(), catalog.lats()])


def _score_json(name: str, score, extra=None) -> str:
    record = {"test": name}
    record.update(score.to_record())
    record.update(extra or {})
    return json.dumps(record, indent=2, sort_keys=True) + "\n"


def _common_flags(sub, out_required=False):
    sub.add_argument("--catalog", required=True)
    sub.add_argument("--mag-min", type=float, default=DEFAULT_MAG_MIN)
    sub.add_argument("--depth-max", type=float, default=DEFAULT_DEPTH_MAX)
    sub.add_argument("--window-fraction", type=float, default=1.0)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--out", default=None, required=out_required)


def _k_flags(sub):
    sub.add_argument("--rmax", type=float, default=DEFAULT_R_MAX)
    sub.add_argument("--dr", type=float, default=DEFAULT_R_STEP)
    sub.add_argument("--edge", choices=("none", "isotropic"), default="none")


def cmd_ntest(args) -> int:
    _, catalog, fld = _load_pair(args)
    if args.analytic:
        score = n_test(fld, catalog, method="analytic")
    else:
        score = n_test(fld, catalog, args.sims, SeededStream(args.seed, 0))
    _write(args.out, _score_json("ntest", score,
                                 {"expected_count": integrate(fld)}))
    _sidecar(args.out, build_manifest(
        "ntest", [args.forecast, args.catalog], args.seed,
        {"mag_min": args.mag_min, "depth_max": args.depth_max,
         "window_fraction": args.window_fraction, "sims": args.sims,
         "analytic": args.analytic}))
    return 0


def cmd_ltest(args) -> int:
    _, catalog, fld = _load_pair(args)
    score = l_test(fld, catalog, args.sims, SeededStream(args.seed, 0))
    _write(args.out, _score_json("ltest", score))
    _sidecar(args.out, build_manifest(
        "ltest", [args.forecast, args.catalog], args.seed,
        {"mag_min": args.mag_min, "depth_max": args.depth_max,
         "window_fraction": args.window_fraction, "sims": args.sims}))
    return 0


def cmd_resid(args, parser) -> int:
    if args.kind == "deviance":
        if not (args.forecast_a and args.forecast_b):
            parser.error("--kind deviance requires --forecast-a and "
                         "--forecast-b")
        _, catalog, fld_a = _load_pair(args, forecast_path=args.forecast_a)
        forecast_b = parse_forecast(_read(args.forecast_b))
        fld_b = aggregate(forecast_b, args.mag_min)
        if args.window_fraction != 1.0:
            fld_b = scale_window(fld_b, args.window_fraction)
        rmap = deviance_residuals(fld_a, fld_b, catalog)
        try:
            footer = {"lr_score": lr_score(rmap), "lr_score_defined": True}
        except QuakeResidError:
            footer = {"lr_score": None, "lr_score_defined": False}
        inputs = [args.forecast_a, args.forecast_b, args.catalog]
    else:
        if not args.forecast:
            parser.error(f"--kind {args.kind} requires --forecast")
        _, catalog, fld = _load_pair(args)
        rmap = raw_residuals(fld, catalog) if args.kind == "raw" \
            else pearson_residuals(fld, catalog)
        footer = None
        inputs = [args.forecast, args.catalog]
    _write(args.out, rmap.to_csv())
    if footer is not None:
        sys.stdout.write(json.dumps(footer, sort_keys=True) + "\n")
    if args.svg:
        _write(args.svg, residual_map_svg(
            rmap, f"{args.kind} residuals", events=_event_array(catalog)))
    _sidecar(args.out, build_manifest(
        "resid", inputs, None,
        {"kind": args.kind, "mag_min": args.mag_min,
         "depth_max": args.depth_max,
         "window_fraction": args.window_fraction}))
    return 0


def cmd_k(args) -> int:
    from dataclasses import replace

    _, catalog, fld = _load_pair(args)
    pts = _event_array(catalog)
    radii = _radii(args)
    if args.weighted:
        curve = weighted_k(pts, fld, radii, args.edge)
        total = integrate(fld)
        curve = replace(curve, bands=wk_confidence_bands(
            radii, fld.grid.area, total))
        title = "weighted K (centered L)"
    else:
        curve = ripley_k(pts, fld.grid, radii, args.edge)
        title = "Ripley K (centered L)"
    _write(args.out, curve.to_csv())
    if args.svg:
        _write(args.svg, k_curve_svg(curve, title))
    _sidecar(args.out, build_manifest(
        "k", [args.forecast, args.catalog], None,
        {"weighted": args.weighted, "rmax": args.rmax, "dr": args.dr,
         "edge": args.edge, "mag_min": args.mag_min,
         "depth_max": args.depth_max,
         "window_fraction": args.window_fraction}))
    return 0


def _region_csv(region) -> str:
    inner = getattr(region, "inner", region)
    lines = ["band_lo,band_hi,interval_length"]
    for lo, hi, t in zip(inner.y_edges[:-1], inner.y_edges[1:],
                         inner.t_of_row):
        lines.append("%.12g,%.12g,%.12g" % (lo, hi, t))
    lines.append("# total_area,%.12g" % region.area)
    return "\n".join(lines) + "\n"


def cmd_transform(args, parser) -> int:
    if args.k_ambiguous is not None:
        parser.error("--k is ambiguous: use --k-count (expected retained "
                     "count) or --k-rate (points per square degree)")
    _, catalog, fld = _load_pair(args)
    stream = SeededStream(args.seed, 0)
    if args.kind == "rescale":
        rset = rescale(catalog, fld, args.axis)
    elif args.kind == "thin":
        rset = thin_exact(catalog, fld, stream)
    elif args.kind == "thin-approx":
        if args.k_count is None:
            parser.error("--kind thin-approx requires --k-count")
        rset = thin_approx(catalog, fld, args.k_count, stream)
    elif args.kind == "superpose":
        rset = superpose(catalog, fld, stream)
    else:
        rset = super_thin(catalog, fld, stream, args.k_rate)
    _write(args.out, rset.to_csv())
    if args.kind == "rescale":
        region_text = _region_csv(rset.region)
        if args.out is None:
            sys.stdout.write(region_text)
        else:
            _write(_derived_path(args.out, "_region"), region_text)
    if args.svg:
        _write(args.svg, point_map_svg(rset, f"{args.kind} residuals"))
    if args.assess:
        bands = "envelope" if args.kind == "rescale" else "analytic"
        curve = assess_homogeneity(
            rset, _radii(args), bands=bands, n_sims=args.sims,
            stream=SeededStream(args.seed, 1), edge_correction=args.edge)
        if args.out is None:
            sys.stdout.write(curve.to_csv())
        else:
            _write(_derived_path(args.out, "_assess"), curve.to_csv())
        if args.svg:
            stem, ext = os.path.splitext(args.svg)
            _write(stem + "_assess" + (ext or ".svg"),
                   k_curve_svg(curve, f"{args.kind} homogeneity assessment"))
    _sidecar(args.out, build_manifest(
        "transform", [args.forecast, args.catalog], args.seed,
        {"kind": args.kind, "k_count": args.k_count, "k_rate": args.k_rate,
         "assess": args.assess, "sims": args.sims, "axis": args.axis,
         "rmax": args.rmax, "dr": args.dr, "edge": args.edge,
         "mag_min": args.mag_min, "depth_max": args.depth_max,
         "window_fraction": args.window_fraction}))
    return 0


def cmd_simulate(args) -> int:
    forecast = parse_forecast(_read(args.forecast))
    fld = aggregate(forecast, args.mag_min)
    if args.window_fraction != 1.0:
        fld = scale_window(fld, args.window_fraction)
    catalog = simulate_catalog(fld, SeededStream(args.seed, 0),
                               forecast.window_start, forecast.window_end,
                               magnitude=args.mag_min)
    _write(args.out, serialize_catalog(catalog))
    _sidecar(args.out, build_manifest(
        "simulate", [args.forecast], args.seed,
        {"mag_min": args.mag_min,
         "window_fraction": args.window_fraction}))
    return 0


def cmd_report(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    _, catalog, fld = _load_pair(args)
    out = lambda name: os.path.join(args.out, name)

    n_score = n_test(fld, catalog, args.sims, SeededStream(args.seed, 0))
    l_score = l_test(fld, catalog, args.sims, SeededStream(args.seed, 1))
    summary = {
        "ntest": n_score.to_record(),
        "ltest": l_score.to_record(),
        "expected_count": integrate(fld),
        "observed_count": len(catalog),
        "log_likelihood": log_likelihood(fld, catalog),
    }
    _write(out("scores.json"),
           json.dumps(summary, indent=2, sort_keys=True) + "\n")

    events = _event_array(catalog)
    raw = raw_residuals(fld, catalog)
    pear = pearson_residuals(fld, catalog)
    _write(out("residuals_raw.csv"), raw.to_csv())
    _write(out("residuals_pearson.csv"), pear.to_csv())
    _write(out("residuals_raw.svg"),
           residual_map_svg(raw, "raw residuals", events=events))
    _write(out("residuals_pearson.svg"),
           residual_map_svg(pear, "pearson residuals", events=events))

    radii = _radii(args)
    if len(catalog) >= 2:
        from dataclasses import replace
        curve = weighted_k(events, fld, radii, args.edge)
        curve = replace(curve, bands=wk_confidence_bands(
            radii, fld.grid.area, integrate(fld)))
        _write(out("weighted_k.csv"), curve.to_csv())
        _write(out("weighted_k.svg"),
               k_curve_svg(curve, "weighted K (centered L)"))

    rset = super_thin(catalog, fld, SeededStream(args.seed, 2), args.k_rate)
    _write(out("superthin.csv"), rset.to_csv())
    _write(out("superthin.svg"), point_map_svg(rset, "superthin residuals"))
    if rset.n_points >= 2:
        assess = assess_homogeneity(rset, radii, bands="analytic",
                                    edge_correction=args.edge)
        _write(out("superthin_assess.csv"), assess.to_csv())
        _write(out("superthin_assess.svg"),
               k_curve_svg(assess, "superthin homogeneity assessment"))

    manifest = build_manifest(
        "report", [args.forecast, args.catalog], args.seed,
        {"mag_min": args.mag_min, "depth_max": args.depth_max,
         "window_fraction": args.window_fraction, "sims": args.sims,
         "k_rate": args.k_rate, "rmax": args.rmax, "dr": args.dr,
         "edge": args.edge})
    _write(out("manifest.json"), manifest.to_json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quakeresid",
        description="Grid-forecast diagnostics: consistency tests, pixel "
                    "residuals, second-order statistics, residual point "
                    "processes.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("ntest", help="number test (delta quantile)")
    p.add_argument("--forecast", required=True)
    _common_flags(p)
    p.add_argument("--sims", type=int, default=DEFAULT_SIMS)
    p.add_argument("--analytic", action="store_true")

    p = subs.add_parser("ltest", help="likelihood test (gamma quantile)")
    p.add_argument("--forecast", required=True)
    _common_flags(p)
    p.add_argument("--sims", type=int, default=DEFAULT_SIMS)

    p = subs.add_parser("resid", help="per-pixel residual maps")
    p.add_argument("--forecast", default=None)
    p.add_argument("--forecast-a", default=None)
    p.add_argument("--forecast-b", default=None)
    _common_flags(p)
    p.add_argument("--kind", choices=("raw", "pearson", "deviance"),
                   required=True)
    p.add_argument("--svg", default=None)

    p = subs.add_parser("k", help="second-order K statistics")
    p.add_argument("--forecast", required=True)
    _common_flags(p)
    p.add_argument("--weighted", action="store_true")
    _k_flags(p)
    p.add_argument("--svg", default=None)

    p = subs.add_parser("transform", help="residual point processes")
    p.add_argument("--forecast", required=True)
    _common_flags(p)
    p.add_argument("--kind", required=True,
                   choices=("rescale", "thin", "thin-approx", "superpose",
                            "superthin"))
    p.add_argument("--axis", choices=("horizontal", "vertical"),
                   default="horizontal")
    p.add_argument("--k", dest="k_ambiguous", nargs="?", const="given",
                   default=None, help=argparse.SUPPRESS)
    p.add_argument("--k-count", type=float, default=None)
    p.add_argument("--k-rate", type=float, default=None)
    p.add_argument("--assess", action="store_true")
    p.add_argument("--sims", type=int, default=DEFAULT_SIMS)
    _k_flags(p)
    p.add_argument("--svg", default=None)

    p = subs.add_parser("simulate", help="draw a synthetic catalog")
    p.add_argument("--forecast", required=True)
    p.add_argument("--mag-min", type=float, default=DEFAULT_MAG_MIN)
    p.add_argument("--window-fraction", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = subs.add_parser("report", help="full diagnostic suite into one "
                                       "directory")
    p.add_argument("--forecast", required=True)
    _common_flags(p, out_required=True)
    p.add_argument("--sims", type=int, default=DEFAULT_SIMS)
    p.add_argument("--k-rate", type=float, default=None)
    _k_flags(p)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "ntest":
            return cmd_ntest(args)
        if args.command == "ltest":
            return cmd_ltest(args)
        if args.command == "resid":
            return cmd_resid(args, parser)
        if args.command == "k":
            return cmd_k(args)
        if args.command == "transform":
            return cmd_transform(args, parser)
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "report":
            return cmd_report(args)
        parser.error(f"unknown command {args.command!r}")
    except QuakeResidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
