"""Calibrate the Knapp-set constants for every (d, k) with 2 <= d <= 6 and write the package table.

Usage: python3 scripts/calibrate_knapp.py [--out src/pdnls/data/knapp_constants.json]
"""
import argparse
import json
from pathlib import Path

from pdnls import __version__
from pdnls.bessel import calibrate_knapp_constants


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default = Path(__file__).resolve().parents[1] / "src" / "pdnls" / "data" / "knapp_constants.json"
    ap.add_argument("--out", type=Path, default=default)
    ap.add_argument("--d-max", type=int, default=6)
    args = ap.parse_args()
    table = {}
    for d in range(2, args.d_max + 1):
        for k in range(1, d):
            c = calibrate_knapp_constants(d, k)
            table[f"{d},{k}"] = c.to_dict()
            print(f"d={d} k={k} alpha={c.alpha:.4g} beta={c.beta:.4g} c0={c.c0:.4g} "
                  f"c1={c.c1:.4g} c2={c.c2:.4g}")
    doc = {"generator": "scripts/calibrate_knapp.py", "version": __version__, "constants": table}
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
