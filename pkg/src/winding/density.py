"""Exact density of the winding angle of planar Brownian motion.

The path starts at ``(rho, 0)``; ``theta`` is the continuous angle at time
``t``.  Two integral formulas for the density are implemented independently
(a hyperbolic-angle form and a ``z`` form that differ by a change of
variables), together with the joint radius/angle density they descend from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import DomainError, InvalidRange
from .numerics import (
    DEFAULT_SPEC,
    QuadratureSpec,
    adaptive_quad,
    arcosh1p,
    bessel_ie_series,
    integrate_finite,
)

HALF_PI = 0.5 * math.pi
INV_2PI_SQRTPI = 1.0 / (2.0 * math.pi * math.sqrt(math.pi))


@dataclass(frozen=True)
class DensityQuery:
    theta: float
    t: float
    rho: float

    def __post_init__(self):
        _check_t_rho(self.t, self.rho)
        if not math.isfinite(self.theta):
            raise DomainError("theta must be finite")


@dataclass(frozen=True)
class JointQuery:
    r: float
    theta: float
    t: float
    rho: float

    def __post_init__(self):
        _check_t_rho(self.t, self.rho)
        if not self.r > 0:
            raise DomainError("r must be positive")


def _check_t_rho(t, rho):
    if not (t > 0 and math.isfinite(t)):
        raise DomainError(f"t must be positive, got {t!r}")
    if not (rho > 0 and math.isfinite(rho)):
        raise DomainError(f"rho must be positive, got {rho!r}")


def gaussian_term(theta: float, t: float, rho: float) -> float:
    """The explicit (non-integral) part of the density, supported on |theta| < pi/2."""
    if not abs(theta) < HALF_PI:
        return 0.0
    a = rho * rho / (4.0 * t)
    s = math.sin(theta)
    return rho * math.exp(-2.0 * a * s * s) * math.cos(theta) / math.sqrt(2.0 * math.pi * t)


def _pair(h, theta):
    """h/(h^2+(theta+pi/2)^2) + h/(h^2+(theta-pi/2)^2)."""
    h2 = h * h
    dp = theta + HALF_PI
    dm = theta - HALF_PI
    return h / (h2 + dp * dp) + h / (h2 + dm * dm)


# ---------------------------------------------------------------------------
# joint density


def _nu_cutoff(x: float, theta: float) -> float:
    return max(20.0, 10.0 * x + 30.0 / max(abs(theta), 1.0))


def joint_density(r: float, theta: float, t: float, rho: float,
                  spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Joint density of ``(|Z_t|, Theta_t)`` with respect to ``r dr dtheta``.

    Evaluates ``(1/(pi t)) exp(-(r^2+rho^2)/2t) int_0^inf cos(nu theta) I_nu(rho r/t) dnu``.
    The Bessel factor is carried exponentially scaled, so the Gaussian prefactor
    becomes ``exp(-(r-rho)^2/2t)`` and nothing overflows for large ``rho r/t``.
    The ``nu`` range is cut at ``max(20, 10 x + 30/max(|theta|, 1))`` where
    ``x = rho r / t``: past ``nu ~ x`` the function ``I_nu(x)`` falls off faster
    than geometrically, and well before the cut it is below double precision
    relative to ``I_0(x)``.
    """
    JointQuery(r, theta, t, rho)
    x = rho * r / t
    pref = math.exp(-(r - rho) ** 2 / (2.0 * t)) / (math.pi * t)
    if pref == 0.0:
        return 0.0
    cut = _nu_cutoff(x, theta)
    # oscillation period of cos(nu theta) sets the initial panel width
    n0 = int(min(400, max(4, cut * abs(theta) / math.pi)))
    breaks = np.linspace(0.0, cut, n0 + 1)

    def g(nu):
        return np.cos(nu * theta) * bessel_ie_series(nu, x)

    inner = spec.tightened(abs_tol=spec.abs_tol / max(pref, 1e-300))
    val = adaptive_quad(g, breaks, inner, "joint density nu-integral")[0]
    return max(pref * val, 0.0)


def radial_density(r: float, t: float, rho: float) -> float:
    """Density of ``|Z_t|`` w.r.t. ``r dr``: ``(1/t) exp(-(r^2+rho^2)/2t) I_0(rho r/t)``."""
    x = rho * r / t
    return math.exp(-(r - rho) ** 2 / (2.0 * t)) * float(bessel_ie_series(0.0, x)) / t


# ---------------------------------------------------------------------------
# the two density formulas


def _omega_cut(a: float, spec: QuadratureSpec) -> float:
    """Point past which exp(-a cosh w) sinh(w/2) is negligible."""
    level = spec.tail_length() + 10.0
    w = float(np.arccosh(max(1.0, level / a)))
    for _ in range(6):
        w = float(np.arccosh(max(1.0, (level + 0.5 * w) / a)))
    return max(w, 1.0)


def density_f1(theta: float, t: float, rho: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Winding density from the hyperbolic-angle integral.

    ``f = gaussian_term + rho e^{-a}/(2 pi sqrt(2 pi t))
    int_0^inf e^{-a cosh w} sinh(w/2) [pair(w/2, theta)] dw`` with
    ``a = rho^2/4t``.  At ``theta = +-pi/2`` the pair behaves like ``2/w`` at
    the origin, which ``sinh(w/2)`` cancels; quadrature nodes are interior so
    no special casing is needed.
    """
    DensityQuery(theta, t, rho)
    a = rho * rho / (4.0 * t)
    pref = rho / (2.0 * math.pi * math.sqrt(2.0 * math.pi * t))
    cut = _omega_cut(a, spec)

    def g(w):
        h = 0.5 * w
        # e^{-a} e^{-a cosh w} = e^{-2a cosh^2(w/2)}
        c = np.cosh(h)
        return np.exp(-2.0 * a * c * c) * np.sinh(h) * _pair(h, theta)

    peak = float(np.arcsinh(1.0 / (2.0 * a)))
    breaks = [0.0, cut]
    breaks += [p for p in (2.0 * abs(theta + HALF_PI), 2.0 * abs(theta - HALF_PI),
                           peak, 0.5 * peak, peak + 2.0, 1.0) if 0.0 < p < cut]
    breaks += [p for p in np.geomspace(1e-3, cut, 8)[:-1]]
    inner = spec.tightened(abs_tol=spec.abs_tol / pref)
    val = adaptive_quad(g, sorted(breaks), inner, "density_f1 omega-integral")[0]
    return gaussian_term(theta, t, rho) + pref * val


def _u_breaks(a: float, upper: float, theta: float) -> list[float]:
    sa = math.sqrt(a)
    pts = [0.0, upper]
    k = sa
    while k < upper:
        pts.append(k)
        k *= 4.0
    for d in (abs(theta + HALF_PI), abs(theta - HALF_PI)):
        # where (1/2) arcosh(z/a) equals d
        u = math.sqrt(2.0 * a) * math.sinh(d) if d < 300 else math.inf
        if 0.0 < u < upper:
            pts.append(u)
    return sorted(pts)


def _z_weight(u, a):
    """e^{-(z+a)}/sqrt(z+a) * dz/du on z = a + u^2."""
    s = 2.0 * a + u * u
    return np.exp(-s) / np.sqrt(s) * 2.0 * u


def _half_arcosh(u, a):
    """(1/2) arcosh(z/a) on z = a + u^2, accurate down to u -> 0."""
    return 0.5 * arcosh1p(u * u / a)


def density_f2(theta: float, t: float, rho: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Winding density from the ``z`` integral over ``[rho^2/4t, inf)``.

    The integrand contains ``(1/2) arcosh(4 t z / rho^2)``, which vanishes like
    a square root at the lower end and produces an inverse-square-root spike
    there when ``theta = +-pi/2``.  Integrating in ``u`` with
    ``z = rho^2/4t + u^2`` removes it: the transformed integrand is analytic at
    ``u = 0`` for every ``theta``.
    """
    DensityQuery(theta, t, rho)
    a = rho * rho / (4.0 * t)
    upper = math.sqrt(spec.tail_length())

    def g(u):
        return _z_weight(u, a) * _pair(_half_arcosh(u, a), theta)

    inner = spec.tightened(abs_tol=spec.abs_tol / INV_2PI_SQRTPI)
    val = adaptive_quad(g, _u_breaks(a, upper, theta), inner, "density_f2 z-integral")[0]
    return gaussian_term(theta, t, rho) + INV_2PI_SQRTPI * val


def density(theta: float, t: float, rho: float = 1.0, spec: QuadratureSpec = DEFAULT_SPEC,
            formula: str = "f2") -> float:
    if formula == "f1":
        return density_f1(theta, t, rho, spec)
    if formula == "f2":
        return density_f2(theta, t, rho, spec)
    raise ValueError(f"unknown formula {formula!r}")


# ---------------------------------------------------------------------------
# interval probabilities


def _arctan_span(hi, lo, h):
    """int_lo^hi h/(h^2+y^2) dy without cancellation when lo, hi share a sign."""
    hi = np.broadcast_to(np.asarray(hi, dtype=float), np.shape(h))
    lo = np.broadcast_to(np.asarray(lo, dtype=float), np.shape(h))
    plain = np.arctan(hi / h) - np.arctan(lo / h)
    with np.errstate(divide="ignore"):
        pos = np.arctan(h / lo) - np.arctan(h / hi)      # both > 0
        neg = np.arctan(h / -hi) - np.arctan(h / -lo)    # both < 0
    return np.where(lo > 0, pos, np.where(hi < 0, neg, plain))


def interval_probability(alpha: float, beta: float, t: float, rho: float = 1.0,
                         spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``P(alpha < Theta_t < beta)``; either bound may be infinite.

    The ``theta`` integral of the ``z``-form density is done in closed form
    (each fraction integrates to an arctangent, the Gaussian term to an error
    function), leaving one ``z`` quadrature.  No truncation in ``theta`` is
    involved.
    """
    if not alpha < beta:
        raise InvalidRange(f"need alpha < beta, got {alpha!r}, {beta!r}")
    _check_t_rho(t, rho)
    a = rho * rho / (4.0 * t)
    lo = max(alpha, -HALF_PI)
    hi = min(beta, HALF_PI)
    gauss = 0.0
    if lo < hi:
        k = math.sqrt(2.0 * a)
        gauss = 0.5 * (erf(k * math.sin(hi)) - erf(k * math.sin(lo)))
    upper = math.sqrt(spec.tail_length())

    def g(u):
        h = _half_arcosh(u, a)
        span = (_arctan_span(beta + HALF_PI, alpha + HALF_PI, h)
                + _arctan_span(beta - HALF_PI, alpha - HALF_PI, h))
        return _z_weight(u, a) * span

    pts = sorted(set(_u_breaks(a, upper, alpha if math.isfinite(alpha) else 0.0)
                     + _u_breaks(a, upper, beta if math.isfinite(beta) else 0.0)))
    inner = spec.tightened(abs_tol=spec.abs_tol / INV_2PI_SQRTPI)
    val = adaptive_quad(g, pts, inner, "interval probability z-integral")[0]
    p = gauss + INV_2PI_SQRTPI * val
    return min(max(p, 0.0), 1.0)


def total_mass(t: float, rho: float = 1.0, spec: QuadratureSpec = DEFAULT_SPEC,
               formula: str = "f2") -> float:
    """``int f dtheta`` over the whole line by direct quadrature of the density.

    Uses ``theta = tan(phi)``: the density decays like ``theta^-2``, so
    ``f(tan phi) sec^2 phi`` stays bounded up to ``phi = pi/2``.
    """
    dens = density_f1 if formula == "f1" else density_f2
    cusp = math.atan(HALF_PI)

    def g(phi):
        th = np.tan(phi)
        return np.array([dens(float(v), t, rho, spec) for v in th]) * (1.0 + th * th)

    # the pair of fractions peaks at theta = +-pi/2
    half = integrate_finite(g, 0.0, HALF_PI, spec.tightened(rel_tol=1e-9),
                            points=[cusp, 0.5 * cusp, 0.5 * (cusp + HALF_PI)],
                            label="total mass")
    return 2.0 * half


# ---------------------------------------------------------------------------
# joint-to-marginal oracle


def marginal_consistency(theta: float, t: float, rho: float,
                         spec: QuadratureSpec = QuadratureSpec(rel_tol=1e-8, abs_tol=1e-11)) -> float:
    """``int_0^inf p(r, theta, t; rho) r dr`` by nested quadrature of :func:`joint_density`.

    Slow; meant as an independent check on :func:`density_f1` and :func:`density_f2`.
    """
    DensityQuery(theta, t, rho)
    sd = math.sqrt(t)
    rmax = rho + sd * math.sqrt(2.0 * spec.tail_length())

    def g(r):
        return np.array([joint_density(float(v), theta, t, rho, spec) * v for v in r])

    pts = [0.0, rmax] + [p for p in (0.5 * rho, rho, rho + sd, rho + 3 * sd) if p < rmax]
    return integrate_finite(g, 0.0, rmax, spec, points=pts, label="marginal r-integral")
