"""Command-line front end: ``sacal calibrate | simulate | sweep``."""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from . import __version__
from .errors import ConfigError, DegenerateRotation, DomainError, NoCorrespondences, ParseError, SACError
from .estimator import (
    Aggregation,
    FocalEstimate,
    aggregate,
    estimate_fu,
    estimate_fv,
    select_center_correspondence,
)
from .experiments import (
    AxisStats,
    ExperimentConfig,
    angle_sweep,
    angular_noise_sweep,
    monte_carlo,
    percent_error,
    pixel_noise_sweep,
)
from .formats import (
    CorrespondenceFile,
    config_from_mapping,
    parse_config_text,
    read_correspondence_file,
    resolve_config_path,
    write_csv,
    write_json,
)
from .geometry import Axis, RotationAngle
from .noise import AngularNoiseSpec

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_DEGENERATE = 5

SWEEP_KINDS = ("angle", "angular-noise", "pixel-noise")
DEFAULT_SWEEP_GRIDS = {
    "angle": (-10.0, -5.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 5.0, 10.0),
    "angular-noise": AngularNoiseSpec().offsets_deg,
    "pixel-noise": (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0),
}


# -- calibrate ---------------------------------------------------------------


def calibrate_file(cf: CorrespondenceFile, selection: str = "center", aggregation: str = "mean") -> FocalEstimate:
    """Focal length estimate on the axis the file's rotation determines."""
    angle = RotationAngle(cf.degrees, cf.axis)
    center = cf.size.center
    if cf.axis is Axis.PAN:
        one = lambda c: estimate_fv(c, angle, center.v)  # noqa: E731
    else:
        one = lambda c: estimate_fu(c, angle, center.u)  # noqa: E731
    if selection == "center":
        return one(select_center_correspondence(list(cf.correspondences), center))
    return aggregate([one(c) for c in cf.correspondences], Aggregation(aggregation))


def _ground_truth(text: str) -> tuple[float, float]:
    try:
        fv, fu = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected two comma-separated numbers: FV,FU") from None
    if fv <= 0 or fu <= 0:
        raise argparse.ArgumentTypeError("ground truth focal lengths must be positive")
    return fv, fu


def cmd_calibrate(args) -> int:
    if not args.pan and not args.tilt:
        raise DomainError("give at least one of --pan FILE or --tilt FILE")
    rows = []
    for label, path, expected, gt_index in (("f_v", args.pan, Axis.PAN, 0), ("f_u", args.tilt, Axis.TILT, 1)):
        if not path:
            continue
        cf = read_correspondence_file(path)
        if cf.axis is not expected:
            raise ParseError(f"expected axis={expected.value}, file says axis={cf.axis.value}", path)
        est = calibrate_file(cf, args.selection, args.aggregation)
        row = {
            "parameter": label,
            "axis": cf.axis.value,
            "degrees": cf.degrees,
            "n_points": est.n_points,
            "value": est.value,
            "magnitude": est.magnitude,
        }
        if args.ground_truth:
            gt = args.ground_truth[gt_index]
            row["ground_truth"] = gt
            row["delta_pct"] = percent_error(est.magnitude, gt)
        rows.append(row)

    for row in rows:
        line = (
            f"{row['parameter']}: {row['value']!r} (|{row['parameter']}| = {row['magnitude']:.2f} px, "
            f"{row['axis']} {row['degrees']!r} deg, {row['n_points']} point(s))"
        )
        if "delta_pct" in row:
            line += f"  delta = {row['delta_pct']:.2f}%"
        print(line)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.format in ("csv", "both"):
            write_csv(out / "calibration.csv", rows)
        if args.format in ("json", "both"):
            write_json(out / "calibration.json", {"estimates": rows})
    return EXIT_OK


# -- simulate / sweep ---------------------------------------------------------


def _load_config(args) -> ExperimentConfig:
    """Read the config; seed precedence is ``--seed``, then the file, then ``$SAC_SEED``."""
    path = resolve_config_path(args.config)
    raw = parse_config_text(path.read_text(encoding="utf-8"), str(path))
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    elif "master_seed" not in raw and "SAC_SEED" in os.environ:
        try:
            overrides["master_seed"] = int(os.environ["SAC_SEED"])
        except ValueError:
            raise ConfigError([f"SAC_SEED: not an integer: {os.environ['SAC_SEED']!r}"]) from None
    return config_from_mapping(raw, overrides)


def run_rows(stats: AxisStats, extra: dict | None = None) -> list[dict]:
    rows = []
    for run, est in enumerate(stats.per_run_estimates):
        row = dict(extra or {})
        row.update(
            axis=stats.axis.value,
            run=run,
            value=est.value,
            magnitude=est.magnitude,
            n_points=est.n_points,
            error=est.magnitude - stats.f_true,
        )
        rows.append(row)
    return rows


def summary_row(stats: AxisStats, extra: dict | None = None) -> dict:
    row = dict(extra or {})
    row.update(
        axis=stats.axis.value,
        f_true=stats.f_true,
        n_runs=len(stats.per_run_estimates),
        mean=stats.mean,
        sd=stats.sd,
        error=stats.error,
        mean_2dp=f"{stats.mean:.2f}",
        sd_2dp=f"{stats.sd:.2f}",
        error_2dp=f"{stats.error:.2f}",
    )
    return row


def _emit(out: Path, fmt: str, tables: dict[str, list[dict]], json_name: str, payload: dict) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("csv", "both"):
        for name, rows in tables.items():
            written.append(write_csv(out / f"{name}.csv", rows))
    if fmt in ("json", "both"):
        written.append(write_json(out / f"{json_name}.json", payload))
    return written


def _manifest(out: Path, command: str, cfg: ExperimentConfig, written, started: float) -> Path:
    return write_json(
        out / f"{command}_manifest.json",
        {
            "command": command,
            "version": __version__,
            "master_seed": cfg.master_seed,
            "rng": "numpy PCG64; run seed = master_seed XOR run index",
            "config": cfg.to_dict(),
            "outputs": [str(p) for p in written],
            "wall_clock_seconds": time.perf_counter() - started,
        },
    )


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    cfg = _load_config(args)
    report = monte_carlo(cfg)
    summary = [
        summary_row(report.fv, {"angle_deg": cfg.pan_deg}),
        summary_row(report.fu, {"angle_deg": cfg.tilt_deg}),
    ]
    runs = run_rows(report.fv) + run_rows(report.fu)
    out = Path(args.out)
    written = _emit(
        out,
        args.format,
        {"report": summary, "report_runs": runs},
        "report",
        {"config": cfg.to_dict(), "summary": summary, "runs": runs},
    )
    _manifest(out, "simulate", cfg, written, started)
    for row in summary:
        print(
            f"f_{row['axis']} @ {row['angle_deg']!r} deg: mean={row['mean_2dp']} "
            f"sd={row['sd_2dp']} error={row['error_2dp']} (GT {row['f_true']})"
        )
    return EXIT_OK


def sweep_tables(kind: str, cfg: ExperimentConfig) -> dict[str, list[dict]]:
    """Tidy per-run rows and per-cell summaries for one sweep kind."""
    grid = cfg.sweep_grid or DEFAULT_SWEEP_GRIDS[kind]
    runs: list[dict] = []
    summary: list[dict] = []
    tables = {}
    if kind == "angle":
        cells = angle_sweep(cfg, grid)
        for c in cells:
            runs += run_rows(c, {"angle_deg": c.base_angle})
        for angle in grid:
            fv, fu = (
                next(c for c in cells if c.axis.value == ax and c.base_angle == float(angle))
                for ax in ("v", "u")
            )
            row = {"angle_deg": float(angle), "degenerate": fv.degenerate}
            for prefix, c in (("fv", fv), ("fu", fu)):
                row.update(
                    {
                        f"{prefix}_mean": c.mean,
                        f"{prefix}_sd": c.sd,
                        f"{prefix}_error": c.error,
                        f"{prefix}_error_2dp": f"{c.error:.2f}",
                    }
                )
            summary.append(row)
    elif kind == "angular-noise":
        result = angular_noise_sweep(cfg, AngularNoiseSpec(grid), cfg.base_angles)
        for c in result.cells:
            key = {"base_angle": c.base_angle, "offset": c.offset}
            runs += run_rows(c, key)
            summary.append(
                summary_row(c, {**key, "degenerate": c.degenerate, "slope": result.slope(c.axis, c.base_angle)})
            )
        tables["sweep_angular-noise_slopes"] = [
            {"axis": axis.value, "base_angle": base, "slope": slope}
            for (axis, base), slope in result.slopes.items()
        ]
    elif kind == "pixel-noise":
        for c in pixel_noise_sweep(cfg, grid, cfg.base_angles):
            key = {"base_angle": c.base_angle, "sigma": c.sigma}
            runs += run_rows(c, key)
            summary.append(summary_row(c, {**key, "degenerate": c.degenerate}))
    else:
        raise DomainError(f"unknown sweep kind {kind!r}")
    return {f"sweep_{kind}_runs": runs, f"sweep_{kind}_summary": summary, **tables}


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    cfg = _load_config(args)
    tables = sweep_tables(args.kind, cfg)
    out = Path(args.out)
    written = _emit(out, args.format, tables, f"sweep_{args.kind}", {"kind": args.kind, "config": cfg.to_dict(), **tables})
    _manifest(out, f"sweep_{args.kind}", cfg, written, started)
    print(f"{args.kind} sweep: {len(tables[f'sweep_{args.kind}_summary'])} summary rows written to {out}")
    return EXIT_OK


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sacal", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common_out(sp):
        sp.add_argument("--out", default="sacal-out", help="output directory (default: %(default)s)")
        sp.add_argument("--format", choices=("csv", "json", "both"), default="both")

    c = sub.add_parser("calibrate", help="estimate focal lengths from correspondence files")
    c.add_argument("--pan", metavar="FILE", help="correspondences across a pan rotation")
    c.add_argument("--tilt", metavar="FILE", help="correspondences across a tilt rotation")
    c.add_argument("--selection", choices=("center", "all"), default="center")
    c.add_argument("--aggregation", choices=("mean", "median"), default="mean")
    c.add_argument("--ground-truth", type=_ground_truth, metavar="FV,FU")
    c.add_argument("--out", default=None, help="also write calibration.csv/json here")
    c.add_argument("--format", choices=("csv", "json", "both"), default="both")
    c.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("simulate", help="Monte Carlo run from a key=value config")
    s.add_argument("config")
    s.add_argument("--seed", type=int, default=None, help="overrides master_seed (fallback: $SAC_SEED)")
    common_out(s)
    s.set_defaults(func=cmd_simulate)

    w = sub.add_parser("sweep", help="angle, angular-noise or pixel-noise sweep")
    w.add_argument("kind", choices=SWEEP_KINDS)
    w.add_argument("config")
    w.add_argument("--seed", type=int, default=None, help="overrides master_seed (fallback: $SAC_SEED)")
    common_out(w)
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"sacal: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigError as exc:
        print(f"sacal: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DegenerateRotation as exc:
        print(f"sacal: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except DomainError as exc:
        print(f"sacal: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NoCorrespondences, SACError) as exc:
        print(f"sacal: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
