"""Large-time expansions of the winding density.

Two expansions in powers of ``x = 1/log(sqrt t)``:

* the scaled one, for ``log(sqrt t) f(theta log(sqrt t), t; rho)``, whose
  leading term is the Cauchy density (Spitzer's law); its coefficients are
  ``A_n(theta) C_n(t; rho)``;
* the unscaled one, for ``log(sqrt t) f(theta, t; 1)``, with polynomial
  coefficients ``g_n(theta)``; integrating those over ``(alpha, beta)`` gives
  corrections to the local limit theorem.

Both come from expanding the rational function ``(1+bx)/(1+cx+dx^2)`` in
powers of ``x`` with an exact remainder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .density import HALF_PI, INV_2PI_SQRTPI, _half_arcosh, _z_weight, density_f2, interval_probability
from .errors import DegenerateDenominator, DomainError, HypothesisViolated, InvalidRange
from .numerics import (
    DEFAULT_SPEC,
    QuadratureSpec,
    adaptive_quad,
    integrate_semi_infinite,
    IntegrandEnvelope,
    log_moment,
)

MAX_ORDER = 12


# ---------------------------------------------------------------------------
# rational expansion


@dataclass(frozen=True)
class RationalParams:
    """``g(x) = (1 + b x) / (1 + c x + d x^2)`` with ``c^2 - 4d < 0``.

    ``neg_disc`` may carry ``4d - c^2`` when the caller knows it in closed
    form; computing it as ``4d - c*c`` can cancel badly near the boundary.
    """

    b: float
    c: float
    d: float
    neg_disc: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.neg_disc is None:
            object.__setattr__(self, "neg_disc", 4.0 * self.d - self.c * self.c)
        if not self.neg_disc > 0:
            raise HypothesisViolated(
                f"need c^2 - 4d < 0, got c={self.c!r}, d={self.d!r}")

    def __call__(self, x):
        return (1.0 + self.b * x) / (1.0 + self.c * x + self.d * x * x)


def _re_im_over_s(c: float, s2: float, n: int) -> tuple[float, float]:
    """``Re w^n`` and ``Im(w^n)/s`` for ``w = c + i s``, ``s^2 = s2``.

    Written as binomial sums in ``s^2`` so nothing is divided by ``s``; the
    formula stays exact as ``s -> 0``.
    """
    re, im = [], []
    for j in range(n + 1):
        term = math.comb(n, j) * c ** (n - j)
        if j % 2 == 0:
            re.append(term * (-s2) ** (j // 2))
        else:
            im.append(term * (-s2) ** (j // 2))
    return math.fsum(re), math.fsum(im)


def gexp_coefficient(p: RationalParams, n: int) -> float:
    """``a_n = ((-1)^n / 2^n) Re((1 + i (2b-c)/s) (c + i s)^n)`` with ``s = sqrt(4d - c^2)``; ``n >= -1``."""
    if n == -1:
        # (c + i s)^{-1} = (c - i s) / (4d)
        return -2.0 * (p.c + (2.0 * p.b - p.c)) / (4.0 * p.d)
    re, im_s = _re_im_over_s(p.c, p.neg_disc, n)
    return (-0.5) ** n * (re - (2.0 * p.b - p.c) * im_s)


def gexp_coefficients(p: RationalParams, N: int) -> np.ndarray:
    """``[a_{-1}, a_0, ..., a_N]`` from the closed form; ``out[n + 1] = a_n``."""
    if N < 0:
        raise DomainError("N must be >= 0")
    return np.array([gexp_coefficient(p, n) for n in range(-1, N + 1)])


def gexp_coefficients_recurrence(p: RationalParams, N: int) -> np.ndarray:
    """Same coefficients from ``a_{n+2} + c a_{n+1} + d a_n = 0``, ``a_0 = 1``, ``a_1 = b - c``."""
    a = [-p.b / p.d, 1.0, p.b - p.c]
    for _ in range(N - 1):
        a.append(-p.c * a[-1] - p.d * a[-2])
    return np.array(a[: N + 2])


def gexp_remainder(p: RationalParams, x: float, N: int, coeffs: np.ndarray | None = None) -> float:
    """Exact remainder ``q_N(x) = g(x) - sum_{n<=N} a_n x^n``.

    ``q_N(x) = -x^{N+1} (d a_{N-1} + c a_N + x d a_N) / (1 + c x + d x^2)``.
    """
    if coeffs is None:
        coeffs = gexp_coefficients(p, N)
    a_prev, a_n = coeffs[N], coeffs[N + 1]
    den = 1.0 + p.c * x + p.d * x * x
    return -x ** (N + 1) * (p.d * a_prev + p.c * a_n + x * p.d * a_n) / den


def gexp_table(b, c, d, neg_disc, N: int) -> np.ndarray:
    """Vectorized closed form: row ``n + 1`` holds ``a_n`` for every parameter triple.

    Arrays ``b, c, d, neg_disc`` broadcast together; plain sums instead of
    compensated ones, so use :func:`gexp_coefficients` for single values.
    """
    b, c, d, s2 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (b, c, d, neg_disc)))
    if np.any(~(s2 > 0)):
        raise HypothesisViolated("need c^2 - 4d < 0 for every entry")
    out = np.empty((N + 2,) + b.shape)
    out[0] = -b / d
    k = 2.0 * b - c
    for n in range(N + 1):
        re = np.zeros(b.shape)
        im = np.zeros(b.shape)
        for j in range(n + 1):
            term = math.comb(n, j) * c ** (n - j) * (-s2) ** (j // 2)
            if j % 2 == 0:
                re += term
            else:
                im += term
        out[n + 1] = (-0.5) ** n * (re - k * im)
    return out


def gexp_remainder_table(table: np.ndarray, c, d, x, N) -> np.ndarray:
    """Vectorized :func:`gexp_remainder`; ``N`` may vary per entry."""
    N = np.asarray(N)
    a_prev = np.take_along_axis(table, N[None, ...], axis=0)[0]
    a_n = np.take_along_axis(table, (N + 1)[None, ...], axis=0)[0]
    return -x ** (N + 1) * (d * a_prev + c * a_n + x * d * a_n) / (1.0 + c * x + d * x * x)


def gexp_partial_sum(p: RationalParams, x: float, N: int, coeffs: np.ndarray | None = None) -> float:
    if coeffs is None:
        coeffs = gexp_coefficients(p, N)
    return math.fsum(coeffs[n + 1] * x ** n for n in range(N + 1))


# ---------------------------------------------------------------------------
# fraction-pair expansion


def A_theta(n: int, theta: float) -> float:
    """``A_n(theta)``: binomial form ``sum_{k even} C(n+1,k) (-1)^{k/2} theta^k / (1+theta^2)^{(n+1)/2}``."""
    if n < 0:
        raise DomainError("n must be >= 0")
    num = math.fsum(math.comb(n + 1, k) * (-1) ** (k // 2) * theta ** k for k in range(0, n + 2, 2))
    return num / (1.0 + theta * theta) ** ((n + 1) / 2)


def A_theta_trig(n: int, theta: float) -> float:
    """``cos((n+1) beta)`` with ``beta = atan(theta)``."""
    return math.cos((n + 1) * math.atan(theta))


def P_poly(n: int, b: float) -> float:
    """``P_n(b) = sum_{k even} C(n,k) (2b)^{n-k} (-1)^{k/2} pi^k``."""
    if n < 0:
        raise DomainError("n must be >= 0")
    return math.fsum(math.comb(n, k) * (2.0 * b) ** (n - k) * (-1) ** (k // 2) * math.pi ** k
                     for k in range(0, n + 1, 2))


def A_theta_array(n: int, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    num = np.zeros(theta.shape)
    for k in range(0, n + 2, 2):
        num = num + math.comb(n + 1, k) * (-1) ** (k // 2) * theta ** k
    return num / (1.0 + theta * theta) ** ((n + 1) / 2)


def P_poly_complex(n: int, b: float) -> float:
    return ((2.0 * b + 1j * math.pi) ** n).real


def _P_poly_array(n: int, b: np.ndarray) -> np.ndarray:
    out = np.zeros_like(b)
    for k in range(0, n + 1, 2):
        out = out + math.comb(n, k) * (-1) ** (k // 2) * math.pi ** k * (2.0 * b) ** (n - k)
    return out


def fraction_pair(theta: float, x: float, b: float) -> float:
    """``(1+bx)/((1+bx)^2+(theta+pi x/2)^2) + (1+bx)/((1+bx)^2+(theta-pi x/2)^2)``."""
    u = 1.0 + b * x
    d1 = u * u + (theta + HALF_PI * x) ** 2
    d2 = u * u + (theta - HALF_PI * x) ** 2
    if d1 == 0.0 or d2 == 0.0:
        raise DegenerateDenominator(f"fraction pair singular at theta={theta!r}, x={x!r}, b={b!r}")
    return u / d1 + u / d2


def fraction_pair_terms(theta: float, x: float, b: float, N: int) -> np.ndarray:
    """Terms ``n = 0..N`` of the expansion of :func:`fraction_pair` in powers of ``x``."""
    w = 1.0 + theta * theta
    return np.array([(-1) ** n * P_poly(n, b) * A_theta(n, theta) / (2.0 ** (n - 1) * w ** ((n + 1) / 2))
                     * x ** n for n in range(N + 1)])


def fraction_pair_params(theta: float, b: float) -> tuple[RationalParams, RationalParams]:
    """Rational-expansion parameters of the two fractions after factoring out ``1/(1+theta^2)``."""
    w = 1.0 + theta * theta
    d = (b * b + math.pi ** 2 / 4.0) / w
    s2 = (2.0 * b * theta - math.pi) ** 2 / (w * w)
    s2m = (2.0 * b * theta + math.pi) ** 2 / (w * w)
    return (RationalParams(b, (2.0 * b + math.pi * theta) / w, d, s2),
            RationalParams(b, (2.0 * b - math.pi * theta) / w, d, s2m))


def fraction_pair_remainder(theta: float, x: float, b: float, N: int) -> float:
    """``Q_N = (q_N^(1) + q_N^(2)) / (1 + theta^2)``."""
    p1, p2 = fraction_pair_params(theta, b)
    return (gexp_remainder(p1, x, N) + gexp_remainder(p2, x, N)) / (1.0 + theta * theta)


# ---------------------------------------------------------------------------
# scaled (Spitzer) expansion


@dataclass(frozen=True)
class ScalingContext:
    """``t``, ``rho`` and the derived expansion variable ``x = 1/log(sqrt t)``."""

    t: float
    rho: float = 1.0

    def __post_init__(self):
        _check_t(self.t)
        if not self.rho > 0:
            raise DomainError("rho must be positive")

    @property
    def x(self) -> float:
        return 1.0 / log_sqrt(self.t)

    def b(self, z):
        """``(1/2) log(4z/rho^2 + sqrt((4z/rho^2)^2 - 1/t^2))`` for ``z >= rho^2/4t``."""
        a = self.rho * self.rho / (4.0 * self.t)
        z = np.asarray(z, dtype=float)
        if np.any(z < a):
            raise DomainError("b(z) needs z >= rho^2/4t")
        return b_of(np.sqrt(z - a), self.t, self.rho)

    def b0(self, z):
        return 0.5 * np.log(8.0 * np.asarray(z, dtype=float) / (self.rho * self.rho))


def _check_order(n):
    if n < 0:
        raise DomainError("order must be >= 0")
    if n > MAX_ORDER:
        raise DomainError(f"orders above {MAX_ORDER} are not supported")


def c_coeff(n: int, rho: float = 1.0) -> float:
    """Limit coefficient ``c_n = sum_{k even} C(n,k) (-1)^{k/2} pi^k M_{n-k}(8/rho^2)``.

    ``M_j(a) = int_0^inf e^{-z} z^{-1/2} log(a z)^j dz`` comes from
    :func:`~winding.numerics.log_moment`.
    """
    _check_order(n)
    if not rho > 0:
        raise DomainError("rho must be positive")
    scale = 8.0 / (rho * rho)
    return math.fsum(math.comb(n, k) * (-1) ** (k // 2) * math.pi ** k * log_moment(n - k, scale)
                     for k in range(0, n + 1, 2))


def c_coeff_quadrature(n: int, rho: float = 1.0, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``c_n = int_0^inf e^{-z} z^{-1/2} P_n(log(8z/rho^2)/2) dz`` by direct quadrature."""
    _check_order(n)
    scale = 8.0 / (rho * rho)

    def g(z):
        return np.exp(-z) / np.sqrt(z) * _P_poly_array(n, 0.5 * np.log(scale * z))

    return integrate_semi_infinite(g, 0.0, IntegrandEnvelope(1.0, -0.5), spec,
                                   points=[1e-8, 1e-6, 1e-4, 1e-2, 1.0, 4.0], label=f"c_{n} quadrature")


def b_of(u, t: float, rho: float):
    """``b = (1/2) log(4z/rho^2 + sqrt((4z/rho^2)^2 - 1/t^2))`` on ``z = rho^2/4t + u^2``.

    Computed as ``(arcosh(4tz/rho^2) - log t) / 2`` so nothing overflows.
    """
    a = rho * rho / (4.0 * t)
    return _half_arcosh(u, a) - 0.5 * math.log(t)


def _check_t(t):
    if not t > 2:
        raise DomainError(f"the expansions need t > 2, got {t!r}")


@lru_cache(maxsize=4096)
def _C_cached(n, t, rho, spec):
    a = rho * rho / (4.0 * t)
    upper = math.sqrt(spec.tail_length())

    def g(u):
        return _z_weight(u, a) * _P_poly_array(n, b_of(u, t, rho))

    pts = [0.0, upper]
    k = math.sqrt(a)
    while k < upper:
        pts.append(k)
        k *= 4.0
    return adaptive_quad(g, pts, spec.tightened(rel_tol=1e-12), f"C_{n} integral")[0]


def C_coeff(n: int, t: float, rho: float = 1.0, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Finite-time coefficient ``C_n(t; rho) = int_{rho^2/4t}^inf e^{-(z+rho^2/4t)}/sqrt(z+rho^2/4t) P_n(b) dz``."""
    _check_order(n)
    _check_t(t)
    if not rho > 0:
        raise DomainError("rho must be positive")
    return _C_cached(int(n), float(t), float(rho), spec)


def log_sqrt(t: float) -> float:
    return 0.5 * math.log(t)


@dataclass(frozen=True)
class ExpansionCoefficients:
    """Coefficient tables up to order ``N`` at one ``(theta, t, rho)``."""

    order: int
    theta: float
    t: float
    rho: float
    A_theta: np.ndarray
    c: np.ndarray
    C: np.ndarray
    g: tuple[np.ndarray, ...]

    @property
    def beta_angle(self) -> float:
        return math.atan(self.theta)


def expansion_coefficients(N: int, theta: float, t: float, rho: float = 1.0,
                           spec: QuadratureSpec = DEFAULT_SPEC) -> ExpansionCoefficients:
    _check_order(N)
    _check_t(t)
    return ExpansionCoefficients(
        N, theta, t, rho,
        np.array([A_theta(n, theta) for n in range(N + 1)]),
        np.array([c_coeff(n, rho) for n in range(N + 1)]),
        np.array([C_coeff(n, t, rho, spec) for n in range(N + 1)]),
        tuple(g_poly(n) for n in range(N + 1)),
    )


def theorem1_terms(theta: float, t: float, rho: float, N: int,
                   spec: QuadratureSpec = DEFAULT_SPEC) -> np.ndarray:
    """Individual terms ``n = 0..N`` of the scaled expansion."""
    _check_t(t)
    _check_order(N)
    x = 1.0 / log_sqrt(t)
    w = 1.0 + theta * theta
    return np.array([INV_2PI_SQRTPI * (-1) ** n * A_theta(n, theta) * C_coeff(n, t, rho, spec)
                     / (2.0 ** (n - 1) * w ** ((n + 1) / 2)) * x ** n for n in range(N + 1)])


def theorem1_sum(theta: float, t: float, rho: float, N: int, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Partial sum approximating ``log(sqrt t) f(theta log(sqrt t), t; rho)``."""
    return math.fsum(theorem1_terms(theta, t, rho, N, spec))


def scaled_density(theta: float, t: float, rho: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``log(sqrt t) f(theta log(sqrt t), t; rho)``."""
    L = log_sqrt(t)
    return L * density_f2(theta * L, t, rho, spec)


def theorem1_residual(theta, t, rho, N, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return scaled_density(theta, t, rho, spec) - theorem1_sum(theta, t, rho, N, spec)


# ---------------------------------------------------------------------------
# unscaled (local) expansion


@lru_cache(maxsize=None)
def _g_poly_cached(n: int) -> tuple[float, ...]:
    coef = [0.0] * (n + 1)
    for j in range(0, n + 1, 2):
        terms = []
        for k in range(j, n + 1, 2):
            # (pi/2 + th)^k + (pi/2 - th)^k contributes 2 C(k,j) (pi/2)^{k-j} th^j for even j;
            # the moment carries log(8z)/2 = b_0 to the power n-k
            terms.append(math.comb(n, k) * (-1) ** (k // 2) * 2.0 * math.comb(k, j)
                         * HALF_PI ** (k - j) * 0.5 ** (n - k) * log_moment(n - k, 8.0))
        coef[j] = (-1) ** n * math.fsum(terms)
    return tuple(coef)


def g_poly(n: int) -> np.ndarray:
    """Coefficients (ascending powers of ``theta``) of the polynomial ``g_n``.

    ``g_n(theta) = int_0^inf e^{-z} z^{-1/2} (A_n(b_0, theta) + A_n(b_0, -theta)) dz``
    with ``A_n(b, theta) = (-1)^n Re((b + i(pi/2 + theta))^n)`` and
    ``b_0 = log(8z)/2``, expanded binomially into Gamma-derivative moments.
    Odd-power coefficients vanish identically.
    """
    _check_order(n)
    return np.array(_g_poly_cached(int(n)))


def g_poly_unweighted(n: int) -> np.ndarray:
    """The g_n polynomial with ``log(8z)^{n-k}`` moments and no ``2^{k-n}`` factor.

    Kept for comparison only.  It disagrees with the density for every
    ``n >= 1``; at ``n = 1`` it is exactly twice :func:`g_poly`.
    """
    _check_order(n)
    coef = [0.0] * (n + 1)
    for j in range(0, n + 1, 2):
        coef[j] = (-1) ** n * math.fsum(
            math.comb(n, k) * (-1) ** (k // 2) * 2.0 * math.comb(k, j) * HALF_PI ** (k - j)
            * log_moment(n - k, 8.0) for k in range(j, n + 1, 2))
    return np.array(coef)


def g_eval(n: int, theta):
    return np.polynomial.polynomial.polyval(theta, g_poly(n))


def A_local(n: int, b, theta):
    """``(-1)^n Re((b + i(pi/2 + theta))^n)``."""
    return (-1) ** n * ((b + 1j * (HALF_PI + theta)) ** n).real


def g_quadrature(n: int, theta: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``g_n(theta)`` by direct quadrature of its defining integral."""
    _check_order(n)

    def g(z):
        b0 = 0.5 * np.log(8.0 * z)
        return np.exp(-z) / np.sqrt(z) * (A_local(n, b0, theta) + A_local(n, b0, -theta))

    return integrate_semi_infinite(g, 0.0, IntegrandEnvelope(1.0, -0.5), spec,
                                   points=[1e-8, 1e-6, 1e-4, 1e-2, 1.0, 4.0], label=f"g_{n} quadrature")


def theorem2_terms(theta: float, t: float, N: int) -> np.ndarray:
    _check_t(t)
    _check_order(N)
    x = 1.0 / log_sqrt(t)
    return np.array([INV_2PI_SQRTPI * g_eval(n, theta) * x ** n for n in range(N + 1)])


def theorem2_sum(theta: float, t: float, N: int, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Partial sum approximating ``log(sqrt t) f(theta, t; 1)``."""
    return math.fsum(theorem2_terms(theta, t, N))


def theorem2_residual(theta, t, N, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return log_sqrt(t) * density_f2(theta, t, 1.0, spec) - theorem2_sum(theta, t, N, spec)


def G_coeff(n: int, alpha: float, beta: float) -> float:
    """``G_n = (1/(2 pi sqrt pi)) int_alpha^beta g_n(theta) dtheta`` (exact polynomial integration)."""
    if not alpha < beta:
        raise InvalidRange(f"need alpha < beta, got {alpha!r}, {beta!r}")
    if not (math.isfinite(alpha) and math.isfinite(beta)):
        raise InvalidRange("G_n needs finite bounds")
    anti = np.polynomial.polynomial.polyint(g_poly(n))
    P = np.polynomial.polynomial.polyval
    return INV_2PI_SQRTPI * (P(beta, anti) - P(alpha, anti))


def lll_correction(alpha: float, beta: float, t: float, N: int) -> float:
    """``sum_{n<=N} G_n / (log sqrt t)^n``, the expansion of ``log(sqrt t) P(alpha < Theta_t < beta)``."""
    _check_t(t)
    _check_order(N)
    x = 1.0 / log_sqrt(t)
    return math.fsum(G_coeff(n, alpha, beta) * x ** n for n in range(N + 1))


def lll_exact(alpha: float, beta: float, t: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return log_sqrt(t) * interval_probability(alpha, beta, t, 1.0, spec)
