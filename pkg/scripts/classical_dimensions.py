"""Box-counting slopes of the Cantor set and the Sierpinski triangle against x0.

    python3 scripts/classical_dimensions.py --points 100000 --seeds 0 1 2 3 4
"""
import argparse
import math

from wcdim.attractor import chaos_game
from wcdim.boxdim import box_counts, default_scales, fit_dimension
from wcdim.coeff import CoefficientFunction
from wcdim.ifs import IFSystem, MetricDomain, SimilarityMap, WeakContraction
from wcdim.report import bound_x0
from wcdim.scene import load_scene


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=100_000)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--scenes", default="scenes")
    args = ap.parse_args()

    runs = {
        "cantor": (1 / 3, 2, 7, math.log(2) / math.log(3)),
        "sierpinski": (0.5, 2, 8, math.log(3) / math.log(2)),
    }
    print("scene,seed,x0,slope,r2,exact")
    for name, (ratio, kmin, kmax, exact) in runs.items():
        cfg = load_scene(f"{args.scenes}/{name}.scene")
        x0 = bound_x0(cfg)
        scales = default_scales(1.0, ratio, kmin, kmax)
        for seed in args.seeds:
            cloud = chaos_game(cfg.system, args.points, seed=seed)
            fit = fit_dimension(box_counts(cloud, cfg.domain, scales)).fit
            print(f"{name},{seed},{x0:.10f},{fit.slope:.10f},{fit.r2:.6f},{exact:.10f}")


if __name__ == "__main__":
    main()
