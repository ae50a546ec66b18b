"""Command-line interface: ``wcdim {bound,attractor,cover,boxdim,verify}``.

Data goes to stdout (or ``--out``), diagnostics to stderr.  Exit codes:
0 ok, 1 other runtime failure, 2 unreadable or malformed scene,
3 invalid coefficients, 4 validator failure, 5 box dimension above the bound.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from .attractor import PointCloud, chaos_game
from .boxdim import box_counts, default_scales, fit_dimension
from .errors import (
    CoefficientOutOfRange,
    EvaluatesOutsideUnit,
    GridTooCoarse,
    InvalidCoefficient,
    SceneError,
    WcdimError,
)
from .ifs import MetricDomain
from .moran import x_curve
from .report import bound_x0, build_report, cover_table, default_t_grid, dumps, resolve_options
from .scene import parse_scene

EXIT_RUNTIME = 1
EXIT_PARSE = 2
EXIT_COEFF = 3
EXIT_VALIDATOR = 4
EXIT_BOUND = 5


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def fmt(x: float) -> str:
    """17 significant digits; exact zero prints as ``0``."""
    return "0" if x == 0 else "%#.17g" % x


def csv_num(x: float) -> str:
    return "%.17g" % x


def _workers() -> int:
    try:
        return max(int(os.environ.get("WCDIM_THREADS", "1")), 0)
    except ValueError:
        return 1


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_PARSE) from None


def _load(path: str):
    text = _read(path)
    try:
        return parse_scene(text), text
    except CoefficientOutOfRange as exc:
        raise CliError(f"{path}: {exc}", EXIT_COEFF) from None
    except SceneError as exc:
        raise CliError(f"{path}: {exc}", EXIT_PARSE) from None


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def parse_scales(text: str, D: float) -> list[float]:
    """``RATIO:KMIN:KMAX`` (ladder ``D * RATIO**k``) or a comma-separated list of scales."""
    if ":" in text:
        ratio, kmin, kmax = text.split(":")
        return default_scales(D, float(Fraction(ratio)), int(kmin), int(kmax))
    return [float(Fraction(s)) for s in text.split(",")]


def cmd_bound(args) -> int:
    cfg, _ = _load(args.scene)
    x0 = bound_x0(cfg)
    print(fmt(x0))
    if args.csv:
        D = cfg.domain.diameter_bound
        curve = x_curve(cfg.system.envelopes(), default_t_grid(D, args.t_points))
        lines = ["t,x"] + [f"{csv_num(t)},{csv_num(x)}" for t, x in curve.samples]
        _emit("\n".join(lines) + "\n", args.csv)
    return 0


def cmd_attractor(args) -> int:
    cfg, _ = _load(args.scene)
    opts = resolve_options(cfg, {"points": args.points, "seed": args.seed, "burn_in": args.burn_in})
    cloud = chaos_game(cfg.system, opts["points"], seed=opts["seed"], burn_in=opts["burn_in"])
    d = cloud.dimension
    lines = [",".join(f"x{i + 1}" for i in range(d))]
    lines += [",".join(csv_num(v) for v in row) for row in cloud.points.tolist()]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_cover(args) -> int:
    cfg, _ = _load(args.scene)
    exponent = bound_x0(cfg) if args.exponent == "auto" else float(args.exponent)
    rows = cover_table(cfg.system.envelopes(), cfg.domain.diameter_bound, args.depth, exponent)
    lines = ["depth,max_bound,sum_at_x0,word_count"]
    lines += [f"{r['depth']},{csv_num(r['max_bound'])},{csv_num(r['sum_at_x0'])},{r['word_count']}" for r in rows]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _read_cloud(path: str) -> np.ndarray:
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise CliError(f"{path}: not a point-cloud CSV: {exc}", EXIT_PARSE) from None
    if data.size == 0:
        raise CliError(f"{path}: no points", EXIT_PARSE)
    return data


def _is_cloud(path: str) -> bool:
    first = next((ln for ln in _read(path).splitlines() if ln.strip()), "")
    return first.strip().startswith("x1")


def cmd_boxdim(args) -> int:
    if _is_cloud(args.input):
        pts = _read_cloud(args.input)
        if args.scene:
            dom = _load(args.scene)[0].domain
        else:
            lo, hi = pts.min(axis=0), pts.max(axis=0)
            hi = np.where(hi > lo, hi, lo + 1.0)
            dom = MetricDomain(pts.shape[1], "euclidean", tuple(lo), tuple(hi))
        cloud = PointCloud(pts)
        opts = {"box_ratio": 0.5, "box_kmin": 2, "box_kmax": 9}
    else:
        cfg, _ = _load(args.input)
        dom = cfg.domain
        opts = resolve_options(cfg, {"points": args.points, "seed": args.seed})
        cloud = chaos_game(cfg.system, opts["points"], seed=opts["seed"], burn_in=opts["burn_in"])
    D = dom.diameter_bound
    if args.scales:
        scales = parse_scales(args.scales, D)
    else:
        scales = default_scales(opts.get("box_base", D), opts["box_ratio"], opts["box_kmin"], opts["box_kmax"])
    series = box_counts(cloud, dom, scales)
    window = (0, len(scales) - 1) if args.full_window else None
    fit = fit_dimension(series, window).fit
    if args.csv:
        lines = ["epsilon,count"] + [f"{csv_num(e)},{n}" for e, n in zip(series.scales, series.counts)]
        _emit("\n".join(lines) + "\n", args.csv)
    summary = {"slope": fit.slope, "r2": fit.r2, "window_lo": fit.window_lo, "window_hi": fit.window_hi}
    print(json.dumps(summary, indent=2))
    return 0


def cmd_verify(args) -> int:
    cfg, text = _load(args.scene)
    overrides = {"pairs": args.pairs, "points": args.points, "seed": args.seed}
    report = build_report(cfg, text, overrides, workers=_workers())
    _emit(dumps(report), args.out)
    verdict = report["verdict"]
    if not verdict["validator_pass"]:
        bad = [name for name, v in report["validator"].items() if not v["pass"]]
        print(f"validator rejected map(s): {', '.join(bad)}", file=sys.stderr)
        return EXIT_VALIDATOR
    if not verdict["bound_consistent"]:
        print("box-counting slope exceeds x0 + tolerance", file=sys.stderr)
        return EXIT_BOUND
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wcdim", description="Hausdorff dimension bounds for weak-contraction IFSs")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="print the dimension bound x0")
    p.add_argument("scene")
    p.add_argument("--csv", help="also write the x(t) curve as t,x CSV to this path ('-' for stdout)")
    p.add_argument("--t-points", type=int, default=64, help="geometric grid size on [1e-6 D, D]")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("attractor", help="sample the attractor with the chaos game")
    p.add_argument("scene")
    p.add_argument("--points", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_attractor)

    p = sub.add_parser("cover", help="word-cover upper bounds per depth")
    p.add_argument("scene")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--exponent", default="auto", help="exponent for the cover sums, or 'auto' for x0")
    p.add_argument("--out")
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("boxdim", help="box-counting dimension of a cloud CSV or a scene")
    p.add_argument("input", help="point-cloud CSV (header x1,...) or scene file")
    p.add_argument("--scene", help="scene supplying the domain box for a cloud CSV")
    p.add_argument("--scales", help="RATIO:KMIN:KMAX, e.g. 1/3:2:7, or a comma-separated list")
    p.add_argument("--full-window", action="store_true", help="fit over all scales")
    p.add_argument("--points", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--csv", help="write epsilon,count CSV to this path")
    p.set_defaults(func=cmd_boxdim)

    p = sub.add_parser("verify", help="full JSON report with verdicts")
    p.add_argument("scene")
    p.add_argument("--out")
    p.add_argument("--pairs", type=int)
    p.add_argument("--points", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for attr in ("csv", "out"):
        if getattr(args, attr, None) == "-":
            setattr(args, attr, None)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"wcdim: {exc}", file=sys.stderr)
        return exc.code
    except (InvalidCoefficient, EvaluatesOutsideUnit, GridTooCoarse) as exc:
        print(f"wcdim: invalid coefficient: {exc}", file=sys.stderr)
        return EXIT_COEFF
    except (WcdimError, ValueError) as exc:
        print(f"wcdim: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
