"""Recover the local-expansion coefficients g_1, g_2 from the density itself.

At theta fixed, r_N(t) L^{N+1} -> g_{N+1}(theta)/(2 pi sqrt pi) with
L = log(sqrt t).  A cubic fit in 1/L over t = 1e10..1e80 gives the limit,
compared here with the closed form and with the form that omits the 2^{k-n}
weight (which doubles g_1).
"""

import argparse

import numpy as np

from winding import expansion as ex
from winding.density import INV_2PI_SQRTPI


def intercept(theta, N, exps):
    ts = [10.0 ** k for k in exps]
    x = np.array([1 / ex.log_sqrt(t) for t in ts])
    r = np.array([ex.theorem2_residual(theta, t, N) * ex.log_sqrt(t) ** (N + 1) for t in ts])
    return np.polyfit(x, r, 3)[-1]


def main():
    p = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    p.add_argument("--thetas", type=float, nargs="+", default=[0.0, 0.3, 1.0])
    args = p.parse_args()
    exps = (10, 14, 20, 30, 40, 60, 80)
    P = np.polynomial.polynomial.polyval
    print("N+1  theta   extrapolated   closed form    without 2^{k-n}")
    for N in (0, 1):
        for th in args.thetas:
            got = intercept(th, N, exps)
            mine = INV_2PI_SQRTPI * ex.g_eval(N + 1, th)
            other = INV_2PI_SQRTPI * P(th, ex.g_poly_unweighted(N + 1))
            print(f"{N + 1:3d}  {th:5.2f}  {got:+.7f}   {mine:+.7f}   {other:+.7f}")


if __name__ == "__main__":
    main()
