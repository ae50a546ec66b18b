"""Word-cover sums per depth, and the bound check at a chosen distance t.

The cover sum at exponent x0 stays bounded as the depth grows; this prints
it next to the largest word bound so the shrinking covers can be seen.

    python3 scripts/cover_sums.py scenes/weak.scene --depth 12 --t 0.05
"""
import argparse

from wcdim.cover import depth_for_epsilon, proof_bound_check
from wcdim.report import bound_x0, cover_table
from wcdim.scene import load_scene


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("scene")
    ap.add_argument("--depth", type=int, default=10)
    ap.add_argument("--t", type=float, default=None, help="distance for the bound check (default D/10)")
    args = ap.parse_args()

    cfg = load_scene(args.scene)
    envs = cfg.system.envelopes()
    D = cfg.domain.diameter_bound
    x0 = bound_x0(cfg)
    print(f"# x0 = {x0:.12g}, D = {D:.12g}")
    print("depth,max_bound,sum_at_x0,word_count")
    for r in cover_table(envs, D, args.depth, x0):
        print(f"{r['depth']},{r['max_bound']:.6e},{r['sum_at_x0']:.12g},{r['word_count']}")

    t = args.t if args.t is not None else D / 10
    n = depth_for_epsilon(envs, D, t) + 2
    chk = proof_bound_check(envs, D, t, n)
    print(f"# bound check at t={t:g}, depth {n}: lhs {chk.lhs:.6g} <= grouped {chk.grouped:.6g}"
          f" <= rhs {chk.rhs:.6g}: {chk.holds}")


if __name__ == "__main__":
    main()
