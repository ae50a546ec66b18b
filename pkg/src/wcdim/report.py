"""The end-to-end ``verify`` pipeline: bound, validation, covers and box counting."""
from __future__ import annotations

import json
import math

import numpy as np

from . import __version__
from .attractor import chaos_game, diameter_estimate
from .boxdim import box_counts, default_scales, fit_dimension
from .coeff import global_infimum
from .cover import compute_K, depth_for_epsilon, iter_levels, premeasure_sum
from .errors import DegenerateFit
from .ifs import validate_weak_contraction
from .moran import MoranProblem, solve_moran, x_curve
from .scene import SceneConfig, scene_digest

SCHEMA = 1

DEFAULTS = {
    "seed": 0,
    "points": 100_000,
    "burn_in": 100,
    "pairs": 100_000,
    "t_points": 64,
    "box_ratio": 0.5,
    "box_kmin": 2,
    "box_kmax": 9,
    "bound_tolerance": 0.03,
}


def resolve_options(cfg: SceneConfig, overrides: dict | None = None) -> dict:
    """Scene options over defaults, command-line overrides over both."""
    opts = dict(DEFAULTS)
    opts.update({k: v for k, v in cfg.options.items() if k in DEFAULTS or k in ("slack", "box_base")})
    opts.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return opts


def default_t_grid(D: float, n: int = 64) -> np.ndarray:
    return np.geomspace(1e-6 * D, D, n)


def bound_x0(cfg: SceneConfig) -> float:
    infima = [global_infimum(w.coefficient) for w in cfg.system.maps]
    return solve_moran(MoranProblem(tuple(infima)))


def cover_table(envelopes, D: float, depth: int, exponent: float) -> list[dict]:
    rows = []
    for level in iter_levels(envelopes, D):
        rows.append(
            {
                "depth": level.depth,
                "max_bound": level.max_bound,
                "sum_at_x0": premeasure_sum(level, exponent),
                "word_count": level.word_count,
            }
        )
        if level.depth >= depth:
            break
    return rows


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def build_report(cfg: SceneConfig, scene_text: str, overrides: dict | None = None, workers: int = 1) -> dict:
    opts = resolve_options(cfg, overrides)
    sys = cfg.system
    dom = cfg.domain
    D = dom.diameter_bound
    envelopes = sys.envelopes()

    validation = {}
    for j, w in enumerate(sys.maps):
        rep = validate_weak_contraction(
            w, dom, n_pairs=opts["pairs"], seed=[opts["seed"], j], slack=opts.get("slack"), workers=workers
        )
        validation[w.name or f"map{j + 1}"] = rep.summary()
    validator_pass = all(v["pass"] for v in validation.values())

    infima = [env.value_at_zero for env in envelopes]
    x0 = solve_moran(MoranProblem(tuple(infima)))
    curve = x_curve(envelopes, default_t_grid(D, opts["t_points"]))
    K = compute_K(envelopes, D)

    eps = D / 100
    depth = depth_for_epsilon(envelopes, D, eps)
    cover = {
        "epsilon": eps,
        "depth": depth,
        "exponent": x0,
        "rows": cover_table(envelopes, D, depth, x0),
    }

    cloud = chaos_game(sys, opts["points"], seed=opts["seed"], burn_in=opts["burn_in"])
    diam, diam_exact = diameter_estimate(cloud, dom, return_exact=True)
    scales = default_scales(opts.get("box_base", D), opts["box_ratio"], opts["box_kmin"], opts["box_kmax"])
    series = box_counts(cloud, dom, scales)
    box = {"epsilon": list(series.scales), "count": list(series.counts)}
    try:
        fit = fit_dimension(series).fit
        box.update(slope=fit.slope, intercept=fit.intercept, r2=fit.r2, window_lo=fit.window_lo, window_hi=fit.window_hi)
        bound_consistent = fit.slope <= x0 + opts["bound_tolerance"]
    except DegenerateFit:
        # constant counts: a finite set, dimension 0
        box.update(slope=None, intercept=None, r2=None, window_lo=None, window_hi=None)
        bound_consistent = True

    report = {
        "schema": SCHEMA,
        "version": __version__,
        "inputs": {
            "scene_sha256": scene_digest(scene_text),
            "seed": opts["seed"],
            "points": opts["points"],
            "burn_in": opts["burn_in"],
            "pairs": opts["pairs"],
            "box_scales": {
                "base": opts.get("box_base", D),
                "ratio": opts["box_ratio"],
                "kmin": opts["box_kmin"],
                "kmax": opts["box_kmax"],
            },
            "bound_tolerance": opts["bound_tolerance"],
        },
        "domain": {"dimension": dom.dimension, "metric": dom.metric, "diameter_bound": D},
        "maps": [w.name for w in sys.maps],
        "coefficient_infima": infima,
        "x0": x0,
        "K": K,
        "x_curve": [list(s) for s in curve.samples],
        "validator": validation,
        "cover_upper_bounds": cover,
        "attractor": {"n_points": len(cloud), "diameter": diam, "diameter_exact": diam_exact},
        "boxdim": box,
        "verdict": {
            "validator_pass": validator_pass,
            "bound_consistent": bound_consistent,
            "diameter_within_bound": diam <= D,
        },
    }
    return _clean(report)


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"
