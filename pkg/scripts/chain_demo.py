"""Solve every class of the symmetry chain at one eps and grade each inequality.

Usage: python3 scripts/chain_demo.py --d 4 --k 2 --p 2.5 --eps 1e-3
"""
import argparse

from pdnls.exponents import ProblemParams
from pdnls.minimize import verify_chain


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--d", type=int, default=4)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--p", type=float, default=2.5)
    ap.add_argument("--eps", type=float, default=1e-3)
    args = ap.parse_args()
    rep = verify_chain(ProblemParams(d=args.d, p=args.p, k=args.k), args.eps)
    for e in rep.entries:
        name = f"G{e.k}" if e.cls == "Gk" else e.cls
        print(f"{name:>7}  R = {e.rayleigh:.8g}  +- {e.uncertainty:.2e}  converged={e.converged}")
    for g in rep.gaps:
        print(f"{g['lower']} < {g['upper']}: gap {g['gap']:.3e}, uncertainty {g['uncertainty']:.3e} -> {g['verdict']}")
    print(f"verdict: {rep.verdict}")


if __name__ == "__main__":
    main()
