"""Powers of a two-arc outer function: ||f^j||_p^p against the arc measure.

    python3 scripts/outer_limit.py --measure 0.5 --powers 24
"""
import argparse

from halfplane_iso.conformal import OuterFunctionSpec
from halfplane_iso.oracle import outer_limit_check


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--measure", type=float, default=0.5, help="normalised length of the |f| = 1 arc")
    ap.add_argument("--off", type=float, default=0.5, help="|f| on the rest of the circle")
    ap.add_argument("--powers", type=int, default=24)
    ap.add_argument("--p", type=float, default=2.0)
    args = ap.parse_args()

    spec = OuterFunctionSpec.two_arc(args.measure, off_arc=args.off)
    rep = outer_limit_check(spec, args.measure, range(1, args.powers + 1), args.p)
    for row in rep.orbit:
        print(f"{row.n:3d}  {row.ratio:.10f}  (+- {row.error:.1e})")
    print(f"limit residual {rep.residuals[0].residual:.2e}, {rep.note}, passed={rep.passed}")


if __name__ == "__main__":
    main()
