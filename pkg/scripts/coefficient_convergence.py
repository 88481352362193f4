"""|C_n(t) - c_n| over a log t sweep, with the t^{-1/2} (log t)^n envelope."""

import argparse
import math

import numpy as np

from winding import expansion as ex


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-max", type=int, default=4)
    p.add_argument("--rho", type=float, default=1.0)
    args = p.parse_args()
    ts = np.geomspace(1e2, 1e8, 13)
    print("n  " + "  ".join(f"{t:9.2e}" for t in ts))
    for n in range(args.n_max + 1):
        c = ex.c_coeff(n, args.rho)
        gaps = [abs(ex.C_coeff(n, t, args.rho) - c) for t in ts]
        print(f"{n}  " + "  ".join(f"{g:9.3e}" for g in gaps))
        env = [g * math.sqrt(t) / max(1.0, math.log(t)) ** n for g, t in zip(gaps, ts)]
        print("   " + "  ".join(f"{e:9.3e}" for e in env) + "   (gap * sqrt t / (log t)^n)")
        print(f"   envelope peak near t = e^{2 * n} = {math.exp(2 * n):.3g}")


if __name__ == "__main__":
    main()
