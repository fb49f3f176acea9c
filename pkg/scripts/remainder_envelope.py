"""|count - prediction| against the error budget on a log-spaced t grid.

    python scripts/remainder_envelope.py --omega 4,4,4 --region full
"""
import argparse
import os

import numpy as np

from latstretch.asymptotics import predict, remainder
from latstretch.counting import RegionKind
from latstretch.domain import Exponents, StretchFactors, balanced_factors


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--omega", default="4,4,4")
    p.add_argument("--region", default="full", choices=[r.value for r in RegionKind])
    p.add_argument("--balanced", action="store_true", help="use the balanced stretch instead of the identity")
    p.add_argument("--t-min", type=float, default=10.0)
    p.add_argument("--t-max", type=float, default=200.0)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    args = p.parse_args()

    exponents = Exponents.parse(args.omega)
    A = balanced_factors(exponents) if args.balanced else StretchFactors.identity(exponents.d)
    region = RegionKind(args.region)
    ts = np.geomspace(args.t_min, args.t_max, args.points)
    rem, ratio = [], []
    print(f"{'t':>9} {'remainder':>14} {'budget':>12} {'ratio':>8}")
    for t in ts:
        r = remainder(exponents, A, float(t), region, args.threads)
        b = predict(exponents, A, float(t), region).error_budget
        rem.append(abs(r))
        ratio.append(abs(r) / b)
        print(f"{t:9.2f} {r:14.2f} {b:12.2f} {abs(r) / b:8.3f}")
    slope = np.polyfit(np.log(ts), np.log(rem), 1)[0]
    print(f"log-log slope of |remainder|: {slope:.4f}; max ratio {max(ratio):.3f}")


if __name__ == "__main__":
    main()
