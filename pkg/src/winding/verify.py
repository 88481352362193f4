"""Invariant suites shared by the ``verify`` command and the test suite.

Every check returns a :class:`Check` row: the worst observed error, the
threshold it is held to, and whether it passed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expansion as ex
from .density import density_f1, density_f2, interval_probability, total_mass
from .numerics import QuadratureSpec

SUITES = ("algebra", "density", "coefficients")

THETA_GRID = (0.0, 1.0, -1.0, math.pi / 2, -math.pi / 2, 10.0, -10.0)
T_GRID = (0.5, 1.0, 10.0, 1e4)
RHO_GRID = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class Check:
    name: str
    observed: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.observed < self.threshold)


def gexp_draws(rng: np.random.Generator, n: int):
    """Random valid ``(b, c, d, neg_disc, x, N)`` for the rational expansion.

    ``b, c`` uniform on ``[-5, 5]``, ``sqrt(4d - c^2)`` uniform on
    ``[0.05, 5]``, ``x`` uniform on ``[-4, 4]``, ``N`` uniform on ``0..12``.
    """
    b = rng.uniform(-5, 5, n)
    c = rng.uniform(-5, 5, n)
    s = rng.uniform(0.05, 5, n)
    s2 = s * s
    d = (c * c + s2) / 4.0
    x = rng.uniform(-4, 4, n)
    N = rng.integers(0, 13, n)
    return b, c, d, s2, x, N


def gexp_identity_error(seed: int = 0, n: int = 10_000) -> float:
    """Max of ``|g - sum a_n x^n - q_N| / scale`` over random draws.

    ``scale = max(1, |g|, sum |a_n x^n|, |q_N|)``: the size of the largest
    quantity that enters the identity, so cancellation is not charged as error.
    """
    b, c, d, s2, x, N = gexp_draws(np.random.default_rng(seed), n)
    table = ex.gexp_table(b, c, d, s2, 12)
    powers = x[None, :] ** np.arange(13)[:, None]
    terms = table[1:] * powers * (np.arange(13)[:, None] <= N[None, :])
    partial = terms.sum(axis=0)
    q = ex.gexp_remainder_table(table, c, d, x, N)
    g = (1.0 + b * x) / (1.0 + c * x + d * x * x)
    scale = np.maximum.reduce([np.ones(n), np.abs(g), np.abs(terms).sum(axis=0), np.abs(q)])
    return float(np.max(np.abs(g - partial - q) / scale))


def pair_identity_error(seed: int = 0, n: int = 10_000) -> float:
    """Same check for the fraction pair with ``Q_N`` rebuilt from two remainders.

    Draws: ``theta`` uniform on ``[-10, 10]``, ``x`` on ``(0, 4]``, ``b`` on
    ``[0, 10]``, ``N`` on ``0..8``.
    """
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-10, 10, n)
    x = 4.0 - rng.uniform(0, 4, n)
    b = rng.uniform(0, 10, n)
    N = rng.integers(0, 9, n)
    w = 1.0 + theta * theta
    u = 1.0 + b * x
    lhs = u / (u * u + (theta + ex.HALF_PI * x) ** 2) + u / (u * u + (theta - ex.HALF_PI * x) ** 2)

    terms = np.array([(-1) ** k * ex._P_poly_array(k, b) * ex.A_theta_array(k, theta)
                      / (2.0 ** (k - 1) * w ** ((k + 1) / 2)) * x ** k for k in range(9)])
    terms *= np.arange(9)[:, None] <= N[None, :]
    d = (b * b + math.pi ** 2 / 4.0) / w
    q = np.zeros(n)
    for sign in (1.0, -1.0):
        c = (2.0 * b + sign * math.pi * theta) / w
        s2 = (2.0 * b * theta - sign * math.pi) ** 2 / (w * w)
        table = ex.gexp_table(b, c, d, s2, 8)
        q += ex.gexp_remainder_table(table, c, d, x, N)
    q /= w
    scale = np.maximum.reduce([np.ones(n), np.abs(lhs), np.abs(terms).sum(axis=0), np.abs(q)])
    return float(np.max(np.abs(lhs - terms.sum(axis=0) - q) / scale))


def recurrence_error(seed: int = 0, n: int = 200) -> float:
    rng = np.random.default_rng(seed)
    b, c, d, s2, _, _ = gexp_draws(rng, n)
    worst = 0.0
    for i in range(n):
        p = ex.RationalParams(b[i], c[i], d[i], s2[i])
        a = ex.gexp_coefficients(p, 12)
        r = ex.gexp_coefficients_recurrence(p, 12)
        worst = max(worst, float(np.max(np.abs(a - r) / np.maximum(1.0, np.abs(r)))))
    return worst


def A_dual_error(n_max: int = 8) -> float:
    thetas = np.linspace(-20, 20, 81)
    return max(abs(ex.A_theta(n, th) - ex.A_theta_trig(n, th)) for n in range(n_max + 1) for th in thetas)


def P_dual_error(n_max: int = 8) -> float:
    bs = np.linspace(0, 10, 41)
    return max(abs(ex.P_poly(n, b) - ex.P_poly_complex(n, b)) / max(1.0, abs(ex.P_poly_complex(n, b)))
               for n in range(n_max + 1) for b in bs)


def c_dual_error(n_max: int = 8) -> float:
    return max(abs(ex.c_coeff(n, rho) - ex.c_coeff_quadrature(n, rho)) / max(1.0, abs(ex.c_coeff(n, rho)))
               for n in range(n_max + 1) for rho in (1.0, 2.0))


def g_dual_error(n_max: int = 8) -> float:
    return max(abs(ex.g_eval(n, th) - ex.g_quadrature(n, th)) / max(1.0, abs(ex.g_eval(n, th)))
               for n in range(n_max + 1) for th in (0.0, 1.0, 3.0))


def formula_gap() -> float:
    return max(abs(density_f1(th, t, r) - density_f2(th, t, r))
               for th in THETA_GRID for t in T_GRID for r in RHO_GRID)


def normalization_error(spec: QuadratureSpec | None = None) -> float:
    kw = {} if spec is None else {"spec": spec}
    return max(abs(total_mass(t, 1.0, **kw) - 1.0) for t in T_GRID)


def interval_total_error() -> float:
    return max(abs(interval_probability(-math.inf, math.inf, t) - 1.0) for t in T_GRID)


def C_gap(n: int, t: float) -> float:
    return abs(ex.C_coeff(n, t) - ex.c_coeff(n))


def C_decay_violation(n_max: int, ts) -> float:
    """Largest ratio ``gap(t_{i+1}) / gap(t_i)``; strict decrease means < 1."""
    worst = 0.0
    for n in range(n_max + 1):
        gaps = [C_gap(n, t) for t in ts]
        worst = max(worst, max(g1 / g0 for g0, g1 in zip(gaps, gaps[1:])))
    return worst


def C0_slope(ts=(1e2, 1e3, 1e4, 1e5)) -> float:
    lx = np.log10(ts)
    ly = np.log10([C_gap(0, t) for t in ts])
    return float(np.polyfit(lx, ly, 1)[0])


def run_suite(name: str, seed: int = 0) -> list[Check]:
    if name == "algebra":
        return [
            Check("rational expansion identity", gexp_identity_error(seed), 1e-12),
            Check("fraction pair identity", pair_identity_error(seed), 1e-12),
            Check("closed form vs recurrence", recurrence_error(seed), 1e-10),
            Check("A_n binomial vs cosine", A_dual_error(), 1e-12),
            Check("P_n binomial vs complex power", P_dual_error(), 1e-12),
        ]
    if name == "density":
        return [
            Check("f1 vs f2 on grid", formula_gap(), 1e-8),
            Check("normalization", normalization_error(), 1e-6),
            Check("interval probability over the line", interval_total_error(), 1e-6),
        ]
    if name == "coefficients":
        return [
            Check("c_n moments vs quadrature", c_dual_error(), 1e-8),
            Check("g_n moments vs quadrature", g_dual_error(), 1e-8),
            Check("C_0 gap ratio t=1e5 vs t=1e2", C_gap(0, 1e5) / C_gap(0, 1e2), 1.0),
            Check("C_n gap decreasing, n<=2, t=1e2..1e5", C_decay_violation(2, (1e2, 1e3, 1e4, 1e5)), 1.0),
            Check("C_n gap decreasing, n<=4, t=1e4..1e7", C_decay_violation(4, (1e4, 1e5, 1e6, 1e7)), 1.0),
            Check("C_0 gap log-log slope, t=1e2..1e5", C0_slope(), -0.45),
        ]
    raise ValueError(f"unknown suite {name!r}")
