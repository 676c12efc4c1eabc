"""Rayleigh quotient under node-density and grid-extent changes at one eps.

Usage: python3 scripts/resolution_study.py --d 2 --p 3 --cls radial --eps 1e-3
"""
import argparse
from dataclasses import replace

from pdnls.exponents import ProblemParams
from pdnls.minimize import SolveConfig, solve_ground_state


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--k", type=int, default=None)
    ap.add_argument("--cls", default="radial", choices=["radial", "Gk", "full"])
    ap.add_argument("--eps", type=float, default=1e-3)
    ap.add_argument("--factors", type=float, nargs="+", default=[0.5, 0.75, 1.0, 1.25, 1.5])
    args = ap.parse_args()
    params = ProblemParams(d=args.d, p=args.p, k=args.k)
    base = SolveConfig()
    ref = solve_ground_state(params, args.eps, args.cls, base).rayleigh
    print(f"reference R = {ref:.10g}")
    for f in args.factors:
        cfg = replace(base, grid=replace(base.grid, resolution=f * base.grid.resolution))
        res = solve_ground_state(params, args.eps, args.cls, cfg)
        print(f"resolution x{f:<5} R = {res.rayleigh:.10g}  rel change {res.rayleigh / ref - 1:+.2e}  "
              f"nodes {res.minimizer.values.size}")


if __name__ == "__main__":
    main()
