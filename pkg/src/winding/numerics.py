"""Quadrature kernels and special functions used throughout the package.

The integrator is a globally adaptive 21-point Gauss-Kronrod scheme that
evaluates the integrand on whole arrays of nodes at once, so integrands must
accept and return numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import DomainError, EnvelopeViolated, InvalidRange, NonConvergence, NonFiniteSample

ArrayFunc = Callable[[np.ndarray], np.ndarray]

EULER_GAMMA = 0.57721566490153286060651209008240243
SQRT_PI = math.sqrt(math.pi)

GAMMA_DERIVATIVE_CEILING = 12


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for every integral in the package.

    An integral is accepted once its estimated error is below
    ``max(abs_tol, rel_tol * |I|)``.  Semi-infinite ranges are cut at
    ``a + tail_length() / decay_rate`` where the envelope tail is below
    ``abs_tol`` for ``e^{-z} poly(log z)`` envelopes.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-13
    max_subdivisions: int = 4000
    tail_floor: float = 40.0
    tail_margin: float = 10.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("rel_tol and abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")

    def tail_length(self) -> float:
        return max(self.tail_floor, -math.log(self.abs_tol) + self.tail_margin)

    def tightened(self, rel_tol=None, abs_tol=None) -> "QuadratureSpec":
        return replace(
            self,
            rel_tol=self.rel_tol if rel_tol is None else min(self.rel_tol, rel_tol),
            abs_tol=self.abs_tol if abs_tol is None else min(self.abs_tol, abs_tol),
        )


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class IntegrandEnvelope:
    """Dominating shape ``(z-a)^singular_exponent * exp(-decay_rate (z-a))``."""

    decay_rate: float = 1.0
    singular_exponent: float = 0.0

    def __post_init__(self):
        if not self.decay_rate > 0:
            raise DomainError("decay_rate must be positive")
        if not (-1.0 < self.singular_exponent <= 0.0):
            raise DomainError("singular_exponent must lie in (-1, 0]")


# 21-point Kronrod extension of the 10-point Gauss-Legendre rule (QUADPACK qk21).
_XGK = np.array([
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208931966548,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
])
_WG = np.array([
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(21)
# Gauss nodes sit at odd positions of _XGK.
for _i, _w in zip(range(1, 10, 2), _WG):
    GAUSS_WEIGHTS[_i] = _w
    GAUSS_WEIGHTS[20 - _i] = _w
del _i, _w

_EPS = np.finfo(float).eps


def _gk_panel(f: ArrayFunc, a: np.ndarray, b: np.ndarray, label: str):
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        bad = x[~np.isfinite(fx)][0]
        raise NonFiniteSample(f"{label}: integrand not finite at z={bad!r}", label=label)
    kron = fx @ KRONROD_WEIGHTS
    gauss = fx @ GAUSS_WEIGHTS
    mean = 0.5 * kron
    resabs = np.abs(fx) @ KRONROD_WEIGHTS
    resasc = np.abs(fx - mean[:, None]) @ KRONROD_WEIGHTS
    err = np.abs(kron - gauss) * np.abs(half)
    resasc = resasc * np.abs(half)
    resabs = resabs * np.abs(half)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc > 0) & (err > 0), scaled, err)
    err = np.maximum(err, 50.0 * _EPS * resabs)
    return kron * half, err, resabs


def adaptive_quad(f: ArrayFunc, points: Sequence[float], spec: QuadratureSpec = DEFAULT_SPEC,
                  label: str = "integral") -> tuple[float, float]:
    """Integrate ``f`` over ``[points[0], points[-1]]`` using ``points`` as initial breaks.

    Returns ``(value, error_estimate)``.  Each sweep bisects the intervals whose
    error exceeds both their share of the tolerance and a tenth of the largest
    error; interval order is kept by position, so results are reproducible bit
    for bit.
    """
    pts = np.unique(np.asarray(points, dtype=float))
    if pts.size < 2:
        raise InvalidRange(f"{label}: need a non-empty range")
    a, b = pts[:-1], pts[1:]
    vals, errs, absv = _gk_panel(f, a, b, label)
    while True:
        total = math.fsum(vals)
        err = float(np.sum(errs))
        # no double-precision sum beats eps * int |f|; asking for more only
        # burns the subdivision budget on roundoff
        floor = 100.0 * _EPS * float(np.sum(absv))
        tol = max(spec.abs_tol, spec.rel_tol * abs(total), floor)
        if err <= tol:
            return total, err
        n = vals.size
        if n >= spec.max_subdivisions:
            raise NonConvergence(
                f"{label}: no convergence after {n} subintervals "
                f"(estimate {total:.6g}, error {err:.3g}, tolerance {tol:.3g})",
                label=label, estimate=total, error=err)
        # bisect the intervals that carry the error; the second condition keeps
        # the budget from being spread evenly before singular ends are resolved
        split = (errs > tol / n) & (errs >= 0.1 * errs.max())
        # cap growth so the subdivision budget is respected
        if n + split.sum() > spec.max_subdivisions:
            order = np.argsort(-errs, kind="stable")[: max(1, spec.max_subdivisions - n)]
            split[:] = False
            split[order] = True
        sa, sb = a[split], b[split]
        sm = 0.5 * (sa + sb)
        na = np.concatenate([sa, sm])
        nb = np.concatenate([sm, sb])
        nv, ne, nabs = _gk_panel(f, na, nb, label)
        keep = ~split
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        absv = np.concatenate([absv[keep], nabs])
        order = np.argsort(a, kind="stable")
        a, b, vals, errs, absv = a[order], b[order], vals[order], errs[order], absv[order]


def _interior_breaks(points, lo, hi):
    if points is None:
        return []
    return [p for p in points if lo < p < hi]


def integrate_finite(f: ArrayFunc, a: float, b: float, spec: QuadratureSpec = DEFAULT_SPEC, *,
                     lower_exponent: float = 0.0, upper_exponent: float = 0.0,
                     points: Sequence[float] | None = None, label: str = "integral") -> float:
    """Integral of ``f`` over ``[a, b]``.

    ``lower_exponent``/``upper_exponent`` declare power-law endpoint behaviour
    ``|z - endpoint|^s`` with ``s`` in (-1, 0].  A non-zero exponent triggers
    the substitution ``z = endpoint +- u^(1/(1+s))``, which makes the
    transformed integrand bounded at that end.
    """
    if not a < b:
        raise InvalidRange(f"{label}: need a < b, got a={a!r}, b={b!r}")
    for s in (lower_exponent, upper_exponent):
        if not -1.0 < s <= 0.0:
            raise DomainError("endpoint exponent must lie in (-1, 0]")
    breaks = _interior_breaks(points, a, b)
    if lower_exponent == 0.0 and upper_exponent == 0.0:
        return adaptive_quad(f, [a, *breaks, b], spec, label)[0]
    if lower_exponent != 0.0 and upper_exponent != 0.0:
        m = breaks[len(breaks) // 2] if breaks else 0.5 * (a + b)
        left = integrate_finite(f, a, m, spec, lower_exponent=lower_exponent,
                                points=breaks, label=label)
        right = integrate_finite(f, m, b, spec, upper_exponent=upper_exponent,
                                 points=breaks, label=label)
        return left + right

    s = lower_exponent if lower_exponent != 0.0 else upper_exponent
    p = 1.0 / (1.0 + s)
    if lower_exponent != 0.0:
        def g(u):
            return p * u ** (p - 1.0) * f(a + u ** p)
        ubreaks = [(z - a) ** (1.0 / p) for z in breaks]
    else:
        def g(u):
            return p * u ** (p - 1.0) * f(b - u ** p)
        ubreaks = [(b - z) ** (1.0 / p) for z in breaks]
    return adaptive_quad(g, [0.0, *ubreaks, (b - a) ** (1.0 / p)], spec, label)[0]


def integrate_semi_infinite(f: ArrayFunc, a: float, env: IntegrandEnvelope = IntegrandEnvelope(),
                            spec: QuadratureSpec = DEFAULT_SPEC, *,
                            points: Sequence[float] | None = None,
                            label: str = "integral") -> float:
    """Integral of ``f`` over ``[a, inf)`` for integrands dominated by ``env``.

    The range is cut at ``a + spec.tail_length() / env.decay_rate``.  After
    integrating, the integrand is sampled at the cut; if the implied tail
    ``|f(Z)| / decay_rate`` is far above the tolerance the envelope was wrong
    and :class:`EnvelopeViolated` is raised instead of returning a silently
    truncated value.
    """
    cut = a + spec.tail_length() / env.decay_rate
    value = integrate_finite(f, a, cut, spec, lower_exponent=env.singular_exponent,
                             points=points, label=label)
    probe = np.asarray(f(np.array([cut, cut + 1.0 / env.decay_rate])), dtype=float)
    tail = float(np.max(np.abs(probe))) / env.decay_rate
    if not math.isfinite(tail) or tail > 1e3 * max(spec.abs_tol, spec.rel_tol * abs(value)):
        raise EnvelopeViolated(
            f"{label}: integrand is {tail:.3g} at the truncation point z={cut:.6g}, "
            "larger than its declared envelope allows", label=label, estimate=value)
    return value


# ---------------------------------------------------------------------------
# special functions


def arcosh1p(eps):
    """``arcosh(1 + eps)`` for ``eps >= 0``, accurate to full relative precision."""
    eps = np.asarray(eps, dtype=float)
    if np.any(eps < 0):
        raise DomainError("arcosh argument must be >= 1")
    with np.errstate(over="ignore"):
        big = np.log1p(eps + np.sqrt(eps) * np.sqrt(eps + 2.0))
    e = np.minimum(eps, 1e-6)
    small = np.sqrt(2.0 * e) * (1.0 - e / 12.0 + 3.0 * e * e / 160.0)
    out = np.where(eps < 1e-6, small, big)
    huge = eps > 1e150
    if np.any(huge):
        out = np.where(huge, np.log(2.0) + np.log(np.where(huge, eps, 1.0) + 1.0), out)
    return out if out.ndim else float(out)


def arcosh(y):
    """``log(y + sqrt(y^2 - 1))`` for ``y >= 1``."""
    y = np.asarray(y, dtype=float)
    if np.any(~(y >= 1.0)):
        raise DomainError("arcosh requires y >= 1")
    return arcosh1p(y - 1.0)


def _series_terms(nu, x):
    """Upper summation index for the ascending Bessel series at ``x``."""
    half = 0.5 * float(np.max(x))
    return int(half + 10.0 * math.sqrt(half + 1.0) + 30)


def bessel_ie_series(nu, x):
    """Exponentially scaled ``exp(-x) I_nu(x)`` from the ascending series.

    Vectorised over ``nu`` and ``x`` (broadcast together).  All terms are
    positive, so summing in log space loses nothing to cancellation.
    """
    nu = np.asarray(nu, dtype=float)
    x = np.asarray(x, dtype=float)
    nu, x = np.broadcast_arrays(nu, x)
    k = np.arange(_series_terms(nu, x) + 1, dtype=float)
    with np.errstate(divide="ignore"):
        logx2 = np.log(0.5 * x)[..., None]
    logt = ((nu[..., None] + 2.0 * k) * logx2
            - gammaln(k + 1.0) - gammaln(nu[..., None] + k + 1.0))
    out = np.exp(logsumexp(logt, axis=-1) - x)
    # I_nu(0) = [nu == 0]
    out = np.where(x == 0, np.where(nu == 0, 1.0, 0.0), out)
    return out


def _bessel_integral(nu: float, x: float, spec: QuadratureSpec) -> float:
    first = adaptive_quad(lambda w: np.exp(x * np.cos(w)) * np.cos(nu * w),
                          [0.0, 0.5 * math.pi, math.pi], spec, "bessel_i cosine integral")[0] / math.pi
    nearest = round(nu)
    if abs(nu - nearest) < 1e-14:
        return first
    # e^{-x cosh w - nu w} < e^{-60} beyond this point
    cut = float(arcosh(max(1.0, 60.0 / x)))
    if nu > 0:
        cut = min(cut, 60.0 / nu) if cut > 0 else 60.0 / nu
    cut = max(cut, 1.0)
    second = adaptive_quad(lambda w: np.exp(-x * np.cosh(w) - nu * w),
                           [0.0, 0.5 * cut, cut], spec, "bessel_i hyperbolic integral")[0]
    return first - math.sin(nu * math.pi) / math.pi * second


def bessel_i(nu: float, x: float, spec: QuadratureSpec = DEFAULT_SPEC, method: str = "auto") -> float:
    """Modified Bessel function ``I_nu(x)`` for real ``nu >= 0`` and ``x > 0``.

    ``method="integral"`` uses the representation

        I_nu(x) = 1/pi int_0^pi e^{x cos w} cos(nu w) dw
                  - sin(nu pi)/pi int_0^inf e^{-x cosh w - nu w} dw,

    ``method="series"`` the ascending power series.  The integral form cancels
    catastrophically when ``I_nu(x)`` is tiny next to ``I_0(x)`` (small x,
    large nu); ``"auto"`` uses the integral unless that cancellation would cost
    more than three digits.
    """
    if not (nu >= 0):
        raise DomainError(f"bessel_i needs nu >= 0, got {nu!r}")
    if not (x > 0):
        raise DomainError(f"bessel_i needs x > 0, got {x!r}")
    if method == "series":
        return float(np.exp(x) * bessel_ie_series(nu, x)) if x < 700 else math.inf
    if method == "auto":
        # log of the leading series term versus log I_0(x) <= x
        lead = nu * math.log(0.5 * x) - math.lgamma(nu + 1.0)
        if lead - x < math.log(1e-3):
            return bessel_i(nu, x, spec, "series")
    elif method != "integral":
        raise ValueError(f"unknown method {method!r}")
    # the integrands are O(e^x); roundoff sets the attainable absolute floor
    inner = replace(spec, rel_tol=min(spec.rel_tol, 1e-13), abs_tol=1e-13 * math.exp(min(x, 700.0)))
    return _bessel_integral(float(nu), float(x), inner)


def gamma_half_closed_form(m: int) -> float:
    """Closed forms of the first three derivatives of Gamma at 1/2."""
    psi = -EULER_GAMMA - 2.0 * math.log(2.0)
    if m == 0:
        return SQRT_PI
    if m == 1:
        return SQRT_PI * psi
    if m == 2:
        return SQRT_PI * (psi * psi + math.pi ** 2 / 2.0)
    raise ValueError("closed form only for m <= 2")


def _gamma_derivative_quad(m: int, spec: QuadratureSpec) -> float:
    # z in (0, 1]: z = e^{-s} turns the log and z^{-1/2} singularities into
    # the smooth integrand e^{-e^{-s}} e^{-s/2} (-s)^m on s in [0, inf).
    cut = 2.0 * spec.tail_length()
    while m * math.log(cut) - 0.5 * cut > math.log(spec.abs_tol) - 30.0:
        cut *= 1.5
    sign = -1.0 if m % 2 else 1.0

    def near(s):
        return sign * np.exp(-np.exp(-s) - 0.5 * s) * s ** m

    peak = max(2.0 * m, 1.0)
    head = integrate_finite(near, 0.0, cut, spec, points=[peak / 4, peak / 2, peak, 2 * peak],
                            label=f"Gamma^({m})(1/2), z<1")

    # z in [1, inf): plain e^{-z} z^{-1/2} (log z)^m
    def far(z):
        return np.exp(-z) / np.sqrt(z) * np.log(z) ** m

    tail = integrate_semi_infinite(far, 1.0, IntegrandEnvelope(1.0, 0.0), spec,
                                   points=[2.0, 5.0, 10.0, 20.0], label=f"Gamma^({m})(1/2), z>1")
    return head + tail


@lru_cache(maxsize=None)
def _gamma_derivative_cached(m: int) -> float:
    return _gamma_derivative_quad(m, DEFAULT_SPEC.tightened(rel_tol=1e-13, abs_tol=1e-300))


def gamma_derivative_half(m: int, spec: QuadratureSpec | None = None) -> float:
    """``Gamma^{(m)}(1/2) = int_0^inf e^{-z} z^{-1/2} (log z)^m dz`` by quadrature.

    Results for the default accuracy are memoised.  Orders above 12 are
    refused: the alternating binomial sums that consume these values lose
    too many digits beyond that point.
    """
    m = int(m)
    if m < 0:
        raise DomainError("m must be >= 0")
    if m > GAMMA_DERIVATIVE_CEILING:
        raise NonConvergence(f"Gamma derivative order {m} exceeds the supported ceiling "
                             f"{GAMMA_DERIVATIVE_CEILING}", label=f"Gamma^({m})(1/2)")
    if spec is None:
        return _gamma_derivative_cached(m)
    return _gamma_derivative_quad(m, spec)


def log_moment(m: int, a: float) -> float:
    """``int_0^inf e^{-z} z^{-1/2} (log(a z))^m dz`` via the binomial expansion in ``log a``."""
    if not a > 0:
        raise DomainError(f"log_moment needs a > 0, got {a!r}")
    m = int(m)
    if m < 0:
        raise DomainError("m must be >= 0")
    la = math.log(a)
    return math.fsum(math.comb(m, j) * la ** j * gamma_derivative_half(m - j) for j in range(m + 1))
