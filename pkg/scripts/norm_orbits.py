"""Print ||f o r_n|| / ||f|| for a map given as an expression.

    python3 scripts/norm_orbits.py "z + i" --n 8
    python3 scripts/norm_orbits.py "z - 1/z" --p 3 --battery kernels
"""
import argparse

from halfplane_iso.classify import NagyBound
from halfplane_iso.cli import parse_map
from halfplane_iso.oracle import battery, nagy_probe


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("expr")
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--k", type=float, default=10.0)
    ap.add_argument("--battery", default="standard")
    args = ap.parse_args()

    rep = nagy_probe(parse_map(args.expr), args.p, battery(args.battery), args.n, NagyBound(args.k))
    names = sorted({row.name for row in rep.orbit}, key=[row.name for row in rep.orbit].index)
    print("n   " + "  ".join(f"{name:>20}" for name in names))
    for n in range(args.n + 1):
        cells = {row.name: row.ratio for row in rep.orbit if row.n == n}
        print(f"{n:<3} " + "  ".join(f"{cells[name]:20.12g}" for name in names))
    print(f"passed={rep.passed} within_horizon={rep.within_horizon} predicted_exit={rep.predicted_exit}")
    if rep.note:
        print(rep.note)


if __name__ == "__main__":
    main()
