"""Write the x(t) curve of a scene as CSV, with the envelope values alongside.

    python3 scripts/x_curve.py scenes/piecewise.scene --points 200 > x_curve.csv
"""
import argparse

from wcdim.moran import x_curve
from wcdim.report import default_t_grid
from wcdim.scene import load_scene


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("scene")
    ap.add_argument("--points", type=int, default=128)
    args = ap.parse_args()

    cfg = load_scene(args.scene)
    envs = cfg.system.envelopes()
    grid = default_t_grid(cfg.domain.diameter_bound, args.points)
    curve = x_curve(envs, grid)
    names = [w.name for w in cfg.system.maps]
    print("t,x," + ",".join(f"env_{n}" for n in names))
    for t, x in curve.samples:
        print(f"{t:.17g},{x:.17g}," + ",".join(f"{e(t):.17g}" for e in envs))


if __name__ == "__main__":
    main()
