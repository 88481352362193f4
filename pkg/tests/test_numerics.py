import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from winding.errors import (
    DomainError,
    EnvelopeViolated,
    InvalidRange,
    NonConvergence,
    NonFiniteSample,
)
from winding.numerics import (
    DEFAULT_SPEC,
    EULER_GAMMA,
    GAUSS_WEIGHTS,
    KRONROD_WEIGHTS,
    NODES,
    SQRT_PI,
    IntegrandEnvelope,
    QuadratureSpec,
    adaptive_quad,
    arcosh,
    arcosh1p,
    bessel_i,
    bessel_ie_series,
    gamma_derivative_half,
    gamma_half_closed_form,
    integrate_finite,
    integrate_semi_infinite,
    log_moment,
)


def gamma_derivative_oracle(m):
    """Gamma^(m)(1/2) = Gamma(1/2) * B_m(psi, psi', ...), complete Bell polynomial."""
    psi = [special.polygamma(k, 0.5) for k in range(m)]
    bell = [1.0]
    for j in range(m):
        bell.append(sum(math.comb(j, k) * bell[j - k] * psi[k] for k in range(j + 1)))
    return SQRT_PI * bell[m]


def bessel_series_oracle(nu, x, terms=60):
    return sum((x / 2) ** (2 * k + nu) / (math.factorial(k) * math.gamma(nu + k + 1)) for k in range(terms))


# --- spec and rule --------------------------------------------------------


def test_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(rel_tol=0)
    with pytest.raises(DomainError):
        QuadratureSpec(abs_tol=-1)
    with pytest.raises(DomainError):
        QuadratureSpec(max_subdivisions=0)


def test_tail_length_rule():
    assert DEFAULT_SPEC.tail_length() == 40.0
    assert QuadratureSpec(abs_tol=1e-30).tail_length() == pytest.approx(-math.log(1e-30) + 10)
    # e^{-Z}/sqrt(Z) tail bound sits below abs_tol at the cut
    z = DEFAULT_SPEC.tail_length()
    assert math.exp(-z) / math.sqrt(z) < DEFAULT_SPEC.abs_tol


def test_envelope_validation():
    with pytest.raises(DomainError):
        IntegrandEnvelope(decay_rate=0)
    with pytest.raises(DomainError):
        IntegrandEnvelope(singular_exponent=-1.0)


def test_kronrod_rule_exact_to_degree_31():
    for k in range(32):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert NODES ** k @ KRONROD_WEIGHTS == pytest.approx(exact, abs=1e-14)


def test_gauss_subrule_is_10_point_legendre():
    x, w = np.polynomial.legendre.leggauss(10)
    used = GAUSS_WEIGHTS != 0
    assert np.allclose(np.sort(NODES[used]), np.sort(x), atol=1e-15)
    assert np.allclose(np.sort(GAUSS_WEIGHTS[used]), np.sort(w), atol=1e-15)


# --- integrators ----------------------------------------------------------


def test_constant_integrand():
    assert integrate_finite(lambda z: np.ones_like(z), 0.0, 1.0) == pytest.approx(1.0, abs=1e-15)


def test_exp_cos_matches_bessel_series():
    val = integrate_finite(lambda w: np.exp(np.cos(w)), 0.0, math.pi)
    assert val == pytest.approx(math.pi * bessel_series_oracle(0, 1.0), rel=1e-13)
    assert bessel_series_oracle(0, 1.0) == pytest.approx(1.266066, abs=1e-6)


def test_inverse_sqrt_endpoint():
    val = integrate_finite(lambda z: 1 / np.sqrt(z), 0.0, 1.0, lower_exponent=-0.5)
    assert val == pytest.approx(2.0, rel=1e-13)
    val = integrate_finite(lambda z: 1 / np.sqrt(1 - z), 0.0, 1.0, upper_exponent=-0.5)
    assert val == pytest.approx(2.0, rel=1e-13)
    # both ends singular: Beta(1/2, 1/2) = pi
    val = integrate_finite(lambda z: 1 / np.sqrt(z * (1 - z)), 0.0, 1.0,
                           lower_exponent=-0.5, upper_exponent=-0.5)
    assert val == pytest.approx(math.pi, rel=1e-12)


def test_semi_infinite_basics():
    assert integrate_semi_infinite(lambda z: np.exp(-z), 0.0) == pytest.approx(1.0, rel=1e-13)
    env = IntegrandEnvelope(1.0, -0.5)
    assert integrate_semi_infinite(lambda z: np.exp(-z) / np.sqrt(z), 0.0, env) == pytest.approx(SQRT_PI, rel=1e-12)
    psi_half = special.digamma(0.5)
    val = integrate_semi_infinite(lambda z: np.exp(-z) / np.sqrt(z) * np.log(z), 0.0, env,
                                  points=[1.0])
    assert val == pytest.approx(SQRT_PI * psi_half, rel=1e-11)
    assert val == pytest.approx(-3.480231, abs=1e-6)


def test_semi_infinite_decay_rate():
    val = integrate_semi_infinite(lambda z: np.exp(-3.0 * (z - 2.0)), 2.0, IntegrandEnvelope(3.0))
    assert val == pytest.approx(1 / 3, rel=1e-13)


def test_envelope_guard_fires():
    with pytest.raises(EnvelopeViolated):
        integrate_semi_infinite(lambda z: np.exp(-0.01 * z), 0.0)


def test_invalid_range_and_nonfinite():
    with pytest.raises(InvalidRange):
        integrate_finite(lambda z: z, 1.0, 1.0)
    with pytest.raises(NonFiniteSample), np.errstate(divide="ignore"):
        integrate_finite(lambda z: 1.0 / (z - 0.5), 0.0, 1.0, points=[0.5 + 1e-3])


def test_subdivision_budget_raises_with_label():
    spec = QuadratureSpec(rel_tol=1e-14, abs_tol=1e-300, max_subdivisions=3)
    with pytest.raises(NonConvergence) as info:
        adaptive_quad(lambda z: np.sin(50 * z) ** 2, [0.0, 10.0], spec, "wiggly")
    assert info.value.label == "wiggly"
    assert info.value.estimate is not None


def test_repeated_calls_bit_identical():
    f = lambda z: np.exp(-z) * np.cos(3 * z) / np.sqrt(z)
    env = IntegrandEnvelope(1.0, -0.5)
    vals = {integrate_semi_infinite(f, 0.0, env) for _ in range(3)}
    assert len(vals) == 1


@given(st.floats(0.1, 5.0), st.floats(-3.0, 3.0), st.floats(0.0, 5.0))
def test_polynomial_times_exp(k, lo, width):
    hi = lo + width + 0.1
    val = integrate_finite(lambda z: z * np.exp(k * z), lo, hi)
    anti = lambda z: np.exp(k * z) * (z / k - 1 / k ** 2)
    assert val == pytest.approx(anti(hi) - anti(lo), rel=1e-11, abs=1e-12)


# --- arcosh ---------------------------------------------------------------


def test_arcosh_examples():
    assert arcosh(1.0) == 0.0
    assert arcosh(math.cosh(2.0)) == pytest.approx(2.0, rel=1e-14)
    eps = 1e-12
    assert arcosh(1 + eps) == pytest.approx(math.sqrt(2 * eps), rel=1e-3)
    # arcosh1p sees the exact offset
    assert arcosh1p(eps) == pytest.approx(math.sqrt(2 * eps), rel=1e-12)


def test_arcosh_domain():
    with pytest.raises(DomainError):
        arcosh(0.5)
    with pytest.raises(DomainError):
        arcosh1p(-1e-3)


@given(st.floats(1e-6, 30.0))
def test_arcosh_inverts_cosh(y):
    # cosh(y) - 1 = 2 sinh(y/2)^2 keeps the small-y offset exact
    assert arcosh1p(2.0 * math.sinh(0.5 * y) ** 2) == pytest.approx(y, rel=1e-12)
    # through cosh itself the offset carries an eps/y^2 rounding error
    if y > 0.1:
        assert arcosh(math.cosh(y)) == pytest.approx(y, rel=1e-12)


@given(st.floats(0.0, 1e300))
def test_arcosh1p_matches_numpy(eps):
    ref = np.arccosh(1.0 + eps) if eps > 1e-3 else np.arcsinh(math.sqrt(eps * (eps + 2.0)))
    assert arcosh1p(eps) == pytest.approx(float(ref), rel=1e-13, abs=1e-300)


# --- Bessel ---------------------------------------------------------------


def test_bessel_examples():
    assert bessel_i(0, 1.0) == pytest.approx(bessel_series_oracle(0, 1.0), rel=1e-13)
    assert bessel_i(0.5, 1.0) == pytest.approx(math.sqrt(2 / math.pi) * math.sinh(1.0), rel=1e-13)
    assert bessel_i(0.5, 1.0) == pytest.approx(0.937674, abs=1e-6)
    three_terms = bessel_series_oracle(3, 0.1, terms=3)
    assert bessel_i(3, 0.1) == pytest.approx(three_terms, rel=1e-10)
    assert bessel_i(3, 0.1) == pytest.approx(0.05 ** 3 / 6, rel=2e-3)


def test_bessel_domain():
    with pytest.raises(DomainError):
        bessel_i(-0.5, 1.0)
    with pytest.raises(DomainError):
        bessel_i(1.0, 0.0)


def test_bessel_random_against_series():
    rng = np.random.default_rng(7)
    nu = rng.uniform(0, 5, 1000)
    x = rng.uniform(1e-3, 10, 1000)
    got = np.array([bessel_i(a, b) for a, b in zip(nu, x)])
    ref = np.exp(x) * bessel_ie_series(nu, x)
    assert np.max(np.abs(got / ref - 1)) < 1e-10
    assert np.max(np.abs(ref / special.iv(nu, x) - 1)) < 1e-12


@pytest.mark.parametrize("nu,x", [(0.3, 2.0), (1.0, 5.0), (2.5, 0.7), (4.0, 9.0)])
def test_bessel_integral_form_against_scipy(nu, x):
    assert bessel_i(nu, x, method="integral") == pytest.approx(special.iv(nu, x), rel=1e-11)


@pytest.mark.parametrize("nu,x", [(1.0, 1.0), (1.5, 3.0), (2.3, 0.8), (3.0, 6.0)])
def test_bessel_derivative_recurrence(nu, x):
    h = 1e-5
    deriv = (bessel_i(nu, x + h) - bessel_i(nu, x - h)) / (2 * h)
    assert 2 * deriv == pytest.approx(bessel_i(nu - 1, x) + bessel_i(nu + 1, x), rel=1e-8)


def test_bessel_integer_order_drops_hyperbolic_term():
    assert bessel_i(2.0, 3.0, method="integral") == pytest.approx(special.iv(2, 3.0), rel=1e-12)
    assert bessel_i(2.0 + 1e-15, 3.0, method="integral") == pytest.approx(special.iv(2, 3.0), rel=1e-13)


def test_bessel_unknown_method():
    with pytest.raises(ValueError):
        bessel_i(1.0, 1.0, method="magic")


# --- Gamma derivatives and log moments -------------------------------------


@pytest.mark.parametrize("m", range(13))
def test_gamma_derivatives_against_polygamma(m):
    assert gamma_derivative_half(m) == pytest.approx(gamma_derivative_oracle(m), rel=1e-12)


def test_gamma_derivative_examples():
    assert gamma_derivative_half(0) == pytest.approx(1.772454, abs=1e-6)
    assert gamma_derivative_half(1) == pytest.approx(-3.480231, abs=1e-6)
    # the closed form sqrt(pi)((gamma + 2 log 2)^2 + pi^2/2)
    assert gamma_derivative_half(2) == pytest.approx(15.580177, abs=1e-6)
    for m in range(3):
        assert gamma_derivative_half(m) == pytest.approx(gamma_half_closed_form(m), rel=1e-13)


def test_gamma_derivative_ceiling_and_domain():
    with pytest.raises(NonConvergence):
        gamma_derivative_half(13)
    with pytest.raises(DomainError):
        gamma_derivative_half(-1)


def test_gamma_derivative_custom_spec():
    spec = QuadratureSpec(rel_tol=1e-8)
    assert gamma_derivative_half(3, spec) == pytest.approx(gamma_derivative_oracle(3), rel=1e-8)


def test_log_moment_examples():
    for a in (0.25, 1.0, 8.0, 100.0):
        assert log_moment(0, a) == pytest.approx(SQRT_PI, rel=1e-14)
    assert log_moment(1, 8.0) == pytest.approx(SQRT_PI * (math.log(2) - EULER_GAMMA), rel=1e-13)
    assert log_moment(1, 8.0) == pytest.approx(0.205483, abs=1e-6)
    assert log_moment(1, 1.0) == pytest.approx(-3.480231, abs=1e-6)
    with pytest.raises(DomainError):
        log_moment(1, 0.0)
    with pytest.raises(DomainError):
        log_moment(-1, 1.0)


@pytest.mark.parametrize("m", range(7))
@pytest.mark.parametrize("a", [0.25, 1.0, 8.0])
def test_log_moment_against_direct_quadrature(m, a):
    f = lambda z: np.exp(-z) / np.sqrt(z) * np.log(a * z) ** m
    ref = integrate_semi_infinite(f, 0.0, IntegrandEnvelope(1.0, -0.5), points=[1e-6, 1e-3, 1 / a, 1.0])
    assert log_moment(m, a) == pytest.approx(ref, rel=1e-9, abs=1e-9)
