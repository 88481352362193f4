"""Acceptance criteria, one printed PASS/FAIL line each.

A criterion that does not hold as stated is printed as FAIL; the test then
asserts what was actually observed, and a strict xfail pins the stated form.
"""

import math
import time

import numpy as np
import pytest
from scipy import integrate

from winding import expansion as ex
from winding import verify as v
from winding.density import density_f2, interval_probability
from winding.montecarlo import SimConfig, histogram_density, sample_batch, simulate_winding
from winding.numerics import EULER_GAMMA, SQRT_PI

T_DECAY = (1e2, 1e3, 1e4, 1e5)


def timed(f, *a):
    s = time.perf_counter()
    r = f(*a)
    return r, time.perf_counter() - s


def test_criterion_1_rational_expansion(report):
    err, dt = timed(v.gexp_identity_error, 2024)
    ok = err < 1e-12 and dt < 1.0
    report(1, ok, f"rational expansion identity: max scaled error {err:.2e} over 1e4 draws in {dt:.2f}s")
    assert ok


def test_criterion_2_fraction_pair(report):
    err, dt = timed(v.pair_identity_error, 2024)
    ok = err < 1e-12 and dt < 1.0
    report(2, ok, f"fraction pair identity: max scaled error {err:.2e} over 1e4 draws in {dt:.2f}s")
    assert ok


def test_criterion_3_formula_equivalence(report):
    err, dt = timed(v.formula_gap)
    ok = err < 1e-8 and dt < 30
    report(3, ok, f"|f1 - f2| on the 7x4x3 grid: {err:.2e} in {dt:.2f}s")
    assert ok


def test_criterion_4_normalization(report):
    err, dt = timed(v.normalization_error)
    ok = err < 1e-6 and dt < 30
    report(4, ok, f"max |mass - 1| for t in {v.T_GRID}, rho=1: {err:.2e} in {dt:.2f}s")
    assert ok


def known_constants():
    g1_closed = SQRT_PI * (EULER_GAMMA + math.log(0.5))
    return {
        "c0": abs(ex.c_coeff(0) - SQRT_PI),
        "g0": abs(ex.g_eval(0, 0.0) - 2 * SQRT_PI),
        "g0_quad": abs(ex.g_quadrature(0, 0.0) - 2 * SQRT_PI),
        # the stated constant 2 sqrt(pi)(gamma + log 1/2), against quadrature of the defining integral
        "g1_stated": abs(ex.g_quadrature(1, 0.0) - 2 * g1_closed),
        "g1_derived": abs(ex.g_quadrature(1, 0.0) - g1_closed),
        "c1": abs(ex.c_coeff_quadrature(1) - SQRT_PI * (math.log(2) - EULER_GAMMA)),
    }


def test_criterion_5_known_constants(report):
    e, dt = timed(known_constants)
    ok = e["c0"] < 1e-10 and e["g0"] < 1e-10 and e["g1_stated"] < 1e-8 and e["c1"] < 1e-8 and dt < 5
    report(5, ok, f"c0 {e['c0']:.1e}, g0 {e['g0']:.1e}, c1 {e['c1']:.1e}; g1 vs 2*sqrt(pi)(gamma+log 1/2) "
                  f"{e['g1_stated']:.2e}, vs sqrt(pi)(gamma+log 1/2) {e['g1_derived']:.1e} in {dt:.2f}s")
    assert e["c0"] < 1e-10 and e["g0"] < 1e-10 and e["g0_quad"] < 1e-8 and e["c1"] < 1e-8
    # the first correction is half the stated constant; the defining integral and the
    # large-time extrapolation of the density (test_expansion) both give the smaller value
    assert e["g1_derived"] < 1e-8
    assert ex.g_quadrature(1, 0.0) / (2 * SQRT_PI * (EULER_GAMMA + math.log(0.5))) == pytest.approx(0.5, rel=1e-8)


@pytest.mark.xfail(strict=True, reason="stated g_1 constant is twice the value of its defining integral")
def test_criterion_5_stated_g1():
    assert known_constants()["g1_stated"] < 1e-8


def spitzer_check():
    thetas = (0.0, 1.0, -1.0, 5.0, -5.0)
    ts = (1e4, 1e6, 1e8)
    out = {"sup": [], "C": []}
    for t in ts:
        L = ex.log_sqrt(t)
        sup = max(abs(L * density_f2(th * L, t, 1.0) - 1 / (math.pi * (1 + th * th))) for th in thetas)
        base = 2 * abs(ex.C_coeff(0, t) / SQRT_PI - 1) / math.pi
        out["sup"].append(sup)
        out["C"].append((sup - base) * L)
    r0 = [abs(ex.theorem1_residual(0.0, t, 1.0, 0)) for t in (1e4, 1e8)]
    out["ratio"] = r0[0] / r0[1]
    s0 = [abs(ex.log_sqrt(t) * density_f2(0.0, t, 1.0) - 1 / math.pi) for t in (1e4, 1e8)]
    out["ratio_plain"] = s0[0] / s0[1]
    return out


def test_criterion_6_spitzer(report):
    o, dt = timed(spitzer_check)
    C = np.array(o["C"])
    stable = bool(np.all(C > 0) and np.all(np.abs(C / C.mean() - 1) <= 0.5))
    ratio_ok = abs(o["ratio"] - 2) <= 0.6
    ok = stable and ratio_ok and dt < 60
    report(6, ok, f"fitted C {np.round(C, 4).tolist()}; N=0 residual ratio 1e4->1e8 {o['ratio']:.2f} "
                  f"(against the bare 1/pi limit: {o['ratio_plain']:.2f}) in {dt:.1f}s")
    assert ok


def lll_check():
    ts = (1e4, 1e6, 1e8)
    raw = [ex.lll_exact(0.0, 1.0, t) - 1 / math.pi for t in ts]
    corrected = [ex.lll_exact(0.0, 1.0, t) - ex.lll_correction(0.0, 1.0, t, 1) for t in ts]
    return raw, corrected


def test_criterion_7_local_limit(report):
    (raw, corr), dt = timed(lll_check)
    shrinking = abs(raw[0]) > abs(raw[1]) > abs(raw[2])
    ratio = abs(corr[0]) / abs(corr[2])
    ok = shrinking and abs(ratio - 4) <= 1.5 and dt < 60
    report(7, ok, f"|L P - 1/pi| {[f'{abs(r):.4f}' for r in raw]}; after G_1 correction ratio 1e4->1e8 "
                  f"{ratio:.2f} in {dt:.1f}s")
    assert ok


def C_gaps(n):
    return [v.C_gap(n, t) for t in T_DECAY]


def test_criterion_8_coefficient_convergence(report):
    s = time.perf_counter()
    gaps = {n: C_gaps(n) for n in range(5)}
    slope = v.C0_slope(T_DECAY)
    dt = time.perf_counter() - s
    bad = [n for n, g in gaps.items() if not all(b < a for a, b in zip(g, g[1:]))]
    ok = not bad and slope <= -0.45 and dt < 30
    detail = ", ".join(f"n={n}: " + "/".join(f"{x:.3g}" for x in gaps[n]) for n in bad)
    report(8, ok, f"C_0 slope {slope:.3f}; not monotone over t=1e2..1e5 for n in {bad}"
                  + (f" ({detail})" if bad else "") + f"; in {dt:.1f}s")
    assert slope <= -0.45
    for n in range(3):
        assert n not in bad
    # for n >= 3 the gap behaves like t^{-1/2} (log t)^n, which peaks near t = e^{2n}; it
    # decreases once t is past that point
    assert v.C_decay_violation(4, (1e4, 1e5, 1e6, 1e7)) < 1.0


def test_criterion_8_bump_is_real():
    # independent quadrature of C_4 at t = 1e2 and 1e3 reproduces the growing gap
    def C(n, t):
        a = 1 / (4 * t)

        def f(z):
            b = 0.5 * math.log(4 * z + math.sqrt(16 * z * z - 1 / t ** 2))
            return math.exp(-(z + a)) / math.sqrt(z + a) * ex.P_poly(n, b)

        return sum(integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
                   for lo, hi in [(a, 2 * a), (2 * a, 0.05), (0.05, 1.0), (1.0, 60.0)])

    g = [abs(C(4, t) - ex.c_coeff(4)) for t in (1e2, 1e3)]
    assert g[1] > g[0]
    assert g == pytest.approx([v.C_gap(4, 1e2), v.C_gap(4, 1e3)], rel=1e-7)


@pytest.mark.xfail(strict=True, reason="|C_n - c_n| rises before it falls for n = 3, 4 on t = 1e2..1e5")
def test_criterion_8_stated_monotonicity():
    assert v.C_decay_violation(4, T_DECAY) < 1.0


@pytest.mark.slow
def test_criterion_9_monte_carlo(report):
    cfg = SimConfig(t=10.0, rho=1.0, n_paths=1_000_000, master_seed=2024)
    batch, dt = timed(sample_batch, cfg)
    edges = np.linspace(-6, 6, 41)
    h = histogram_density(batch, edges)
    exact = np.array([interval_probability(a, b, 10.0) for a, b in zip(edges[:-1], edges[1:])]) / h.widths
    z = (h.densities - exact) / h.std_errors
    good = int(np.sum(np.abs(z) <= 3.5))
    repro = all(simulate_winding(cfg, i) == batch[i] for i in (0, 123_456, 999_999))
    ok = good >= 38 and repro and dt < 300
    report(9, ok, f"{good}/40 bins with |z| <= 3.5 (max |z| {np.abs(z).max():.2f}), "
                  f"seed-reproducible {repro}, {dt:.0f}s")
    assert ok


def test_criterion_10_dual_representations(report):
    s = time.perf_counter()
    e = {"A": v.A_dual_error(8), "P": v.P_dual_error(8), "c": v.c_dual_error(8), "g": v.g_dual_error(8)}
    dt = time.perf_counter() - s
    ok = e["A"] < 1e-12 and e["P"] < 1e-12 and e["c"] < 1e-8 and e["g"] < 1e-8 and dt < 30
    report(10, ok, ", ".join(f"{k}_n {x:.1e}" for k, x in e.items()) + f" for n <= 8 in {dt:.1f}s")
    assert ok
