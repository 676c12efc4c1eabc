"""Sweep eps for one class and print the fitted small-eps rate against the prediction.

Usage: python3 scripts/rate_sweep.py --d 2 --p 3 --cls radial --eps-min 1e-5 --points 7
"""
import argparse

import numpy as np

from pdnls.exponents import ProblemParams, predicted_rate
from pdnls.minimize import compensated_series, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--k", type=int, default=None)
    ap.add_argument("--cls", default="radial", choices=["radial", "Gk", "full"])
    ap.add_argument("--eps-max", type=float, default=1e-2)
    ap.add_argument("--eps-min", type=float, default=1e-5)
    ap.add_argument("--points", type=int, default=7)
    args = ap.parse_args()
    params = ProblemParams(d=args.d, p=args.p, k=args.k)
    pred = predicted_rate(params, args.cls)
    sw = sweep(params, np.geomspace(args.eps_max, args.eps_min, args.points), args.cls,
               with_log_correction=pred.log_power != 0)
    comp = compensated_series(sw.eps, sw.rayleigh, pred.power, pred.log_power)
    print(f"{'eps':>12} {'R':>14} {'compensated':>12} {'iters':>6} converged")
    for r, c in zip(sw.results, comp):
        print(f"{r.eps:12.4e} {r.rayleigh:14.8g} {c:12.6g} {r.iterations:6d} {r.converged}")
    if sw.fit is None:
        print(f"no fit: {sw.fit_error}")
    else:
        print(f"slope {sw.fit.slope:.4f} (predicted {pred.power:.4f}, log power {pred.log_power:+.3f}), "
              f"rms log residual {sw.fit.residual:.2e}")


if __name__ == "__main__":
    main()
