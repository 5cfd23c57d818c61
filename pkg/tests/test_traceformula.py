import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from selberg_det import geodesics as geo
from selberg_det import groupdata as gd
from selberg_det import traceformula as tf
from selberg_det import zetas as zt
from selberg_det.errors import DomainError, IllConditionedError, TailError, ValidationError
from selberg_det.regdet import AsymptoticCoefficients
from selberg_det.traceformula import TestFunctionPair

MOD = gd.MODULAR_GROUP
TRIV = gd.build_induced_rep(gd.builtin("psl2z"))
SP = tf.modular_scattering_provider()


@pytest.fixture(scope="module")
def geodata():
    classes = geo.enumerate_classes(1e6)
    return tf.GeodesicData.from_classes(classes, TRIV, norm_max=1e6)


def _relation_residual(term, log_z, s, beta, h=1e-3, h2=1e-4):
    """d/ds X(s) - d/ds[(2s - 1)^{-1} d/ds log Z_X(s)] by central differences."""

    def x(u):
        return term(TestFunctionPair.resolvent(u, beta), MOD).value.real

    def inner(u):
        return ((log_z(u + h2, MOD) - log_z(u - h2, MOD)) / (2 * h2)).real / (2 * u - 1)

    lhs = (x(s + h) - x(s - h)) / (2 * h)
    rhs = (inner(s + h) - inner(s - h)) / (2 * h)
    return lhs - rhs


# --- test functions --------------------------------------------------------


def test_pair_validation():
    with pytest.raises(DomainError):
        TestFunctionPair.resolvent(2, beta=0.5)
    with pytest.raises(DomainError):
        TestFunctionPair.resolvent(1.0)
    with pytest.raises(DomainError):
        TestFunctionPair.heat(0)


def test_heat_pair_is_fourier_pair():
    p = TestFunctionPair.heat(0.7)
    for u in (0.0, 0.4, 1.3):
        val, _ = integrate.quad(lambda r: p.h(r) * math.cos(r * u), -np.inf, np.inf, epsabs=1e-13)
        assert abs(val / (2 * math.pi) - p.g(u)) < 1e-12


def test_resolvent_pair_is_fourier_pair():
    p = TestFunctionPair.resolvent(2.3, beta=1.7)
    for u in (0.0, 0.8):
        if u == 0:
            val, _ = integrate.quad(lambda r: p.h(r).real, 0, np.inf, epsabs=1e-13)
        else:
            val, _ = integrate.quad(lambda r: p.h(r).real, 0, np.inf, weight="cos", wvar=u)
        assert abs(val / math.pi - p.g(u).real) < 1e-10


def test_line_quadrature_gaussian():
    r = tf.line_quadrature(lambda x: np.exp(-x * x))
    assert abs(r.value - math.sqrt(math.pi)) < 1e-13
    half = tf.line_quadrature(lambda x: np.exp(-x), half_line=True)
    assert abs(half.value - 1) < 1e-13
    cut = tf.line_quadrature(lambda x: 1 / (1 + x * x), r_max=3.0)
    assert abs(cut.value - 2 * math.atan(3.0)) < 1e-12


# --- identity --------------------------------------------------------------


@pytest.mark.parametrize("s,beta", [(2.0, 1.5), (1.8, 1.5), (2.7 + 0.4j, 2.5), (3.0, 0.8)])
def test_identity_dual_path(s, beta):
    p = TestFunctionPair.resolvent(s, beta)
    q = tf.identity_term(p, MOD, "quadrature").value
    r = tf.identity_term(p, MOD, "residue").value
    assert abs(q - r) < 1e-8
    tf.identity_term(p, MOD)  # auto mode cross-checks internally


def test_identity_digamma_closed_form():
    # summing the residue series gives (n|F|/2 pi)(psi(beta + 1/2) - psi(s))
    s, beta = 2.4, 1.5
    val = tf.identity_term(TestFunctionPair.resolvent(s, beta), MOD, "residue").value
    expected = MOD.area / (2 * math.pi) * (special.digamma(beta + 0.5) - special.digamma(s))
    assert abs(val - expected) < 1e-13


@pytest.mark.parametrize("s", [1.8, 2.2])
@pytest.mark.parametrize("beta", [1.5, 2.5])
def test_identity_relation(s, beta):
    assert abs(_relation_residual(tf.identity_term, zt.log_zeta_identity, s, beta)) < 1e-5


def test_identity_heat_scaling():
    t = 1e-3
    val = tf.identity_term(TestFunctionPair.heat(t), MOD).value.real
    assert abs(t * val - 1 / 6) < 0.02 / 6


@pytest.mark.parametrize("t", [0.05, 1.0, 4.0])
def test_identity_heat_split_vs_direct(t):
    p = TestFunctionPair.heat(t)
    assert abs(tf.identity_term(p, MOD, "split").value - tf.identity_term(p, MOD, "quadrature").value) < 1e-10


def test_identity_linear_in_dimension():
    d2 = dataclasses.replace(MOD, rep_dim=2)
    for p in (TestFunctionPair.resolvent(2.0), TestFunctionPair.heat(0.3)):
        assert tf.identity_term(p, d2).value == 2 * tf.identity_term(p, MOD).value


def test_identity_bad_method():
    with pytest.raises(DomainError):
        tf.identity_term(TestFunctionPair.heat(1.0), MOD, "residue")


# --- elliptic --------------------------------------------------------------


def test_elliptic_empty():
    d = dataclasses.replace(MOD, elliptic_orders=(), elliptic_rep_angles=())
    assert tf.elliptic_term(TestFunctionPair.heat(1.0), d).value == 0
    assert tf.elliptic_term(TestFunctionPair.resolvent(2.0), d).value == 0


@pytest.mark.parametrize("s", [1.8, 2.2])
@pytest.mark.parametrize("beta", [1.5, 2.5])
def test_elliptic_relation(s, beta):
    assert abs(_relation_residual(tf.elliptic_term, zt.log_zeta_elliptic, s, beta)) < 1e-5


def test_elliptic_step_doubling():
    p = TestFunctionPair.heat(1.0)
    coarse = tf.elliptic_term(p, MOD, step=0.1).value
    fine = tf.elliptic_term(p, MOD, step=0.05).value
    assert abs(coarse - fine) < 1e-9


def test_elliptic_heat_limit():
    # E(t) -> sum tr chi(R^m) / (2 nu sin^2(pi m / nu)) = 1/4 + 4/9 for PSL(2, Z)
    assert abs(tf.elliptic_at_zero(MOD) - 25 / 36) < 1e-15
    assert abs(tf.elliptic_term(TestFunctionPair.heat(1e-4), MOD).value - 25 / 36) < 1e-3


# --- parabolic -------------------------------------------------------------


def test_parabolic_k_zero_c_zero():
    d = dataclasses.replace(MOD, nonsingularity_degree=0, cusp_data=(gd.CuspData(0),))
    assert zt.parabolic_constant(d) == 0
    assert tf.parabolic_term(TestFunctionPair.heat(1.0), d).value == 0
    assert tf.parabolic_term(TestFunctionPair.resolvent(2.0), d).value == 0


@pytest.mark.parametrize("s", [1.8, 2.2])
@pytest.mark.parametrize("beta", [1.5, 2.5])
def test_parabolic_relation_offset(s, beta):
    # the relation misses by exactly -k/(s - 1/2)^3: Z_P would need (s - 1/2)^{+k/2}
    k = MOD.nonsingularity_degree
    res = _relation_residual(tf.parabolic_term, zt.log_zeta_parabolic, s, beta)
    assert abs(res + k / (s - 0.5) ** 3) < 1e-5

    def flipped(u, d):
        return zt.log_zeta_parabolic(u, d) + k * np.log(u - 0.5)

    assert abs(_relation_residual(tf.parabolic_term, flipped, s, beta)) < 1e-5


def test_parabolic_heat_pieces_vs_scipy():
    t = 1.0
    pieces = tf.parabolic_heat_pieces(t, MOD)
    integrand = lambda r: special.psi(1 + 1j * r).real * math.exp(-(r * r + 0.25) * t)  # noqa: E731
    j, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=1e-13)
    p1 = -j / math.pi
    p2 = -2 * math.log(2) * math.exp(-t / 4) / math.sqrt(4 * math.pi * t)
    p3 = 0.5 * math.exp(-t / 4)
    assert abs(pieces["P1"] - p1) < 1e-8
    assert abs(pieces["P2"] - p2) < 1e-8
    assert abs(pieces["P3"] - p3) < 1e-8
    total = tf.parabolic_term(TestFunctionPair.heat(t), MOD).value.real
    assert abs(total - (p1 + p2 + p3)) < 1e-8


def test_digamma_log_constant():
    assert abs(tf.digamma_log_constant() + math.pi / 2) < 1e-10


# --- hyperbolic and theta --------------------------------------------------


def test_hyperbolic_negligible_at_small_t(geodata):
    h = tf.hyperbolic_term(TestFunctionPair.heat(0.01), geodata, TRIV)
    assert abs(h.value) < 1e-10


def test_hyperbolic_tail_error():
    classes = geo.enumerate_classes(1e3)
    with pytest.raises(TailError):
        tf.hyperbolic_term(TestFunctionPair.heat(1.0), classes, TRIV)


def test_hyperbolic_heat_direct():
    classes = geo.enumerate_classes(1e4)
    t = 0.2
    direct = 0.0
    for c in classes:
        for k in range(1, 30):
            n = c.norm**k
            direct += math.log(c.norm) / (math.sqrt(n) - 1 / math.sqrt(n)) * math.exp(-math.log(n) ** 2 / (4 * t))
    direct *= math.exp(-t / 4) / math.sqrt(math.pi * t)
    got = tf.hyperbolic_term(TestFunctionPair.heat(t), classes, TRIV, tail_tol=1e-6).value
    assert abs(got - direct) < 1e-13


def test_theta_domain(geodata):
    for t in (1e-5, 60.0):
        with pytest.raises(DomainError):
            tf.heat_theta_geometric(t, MOD, geodata, TRIV, SP)


def test_theta_leading_coefficient(geodata):
    ts = np.geomspace(1e-3, 1e-1, 12)
    samples = [(t, tf.heat_theta_geometric(t, MOD, geodata, TRIV, SP).value.real) for t in ts]
    fit = tf.fit_small_t(samples)
    assert abs(fit.alpha - 1 / 6) < 0.02 / 6


def test_theta_analytic_coefficients(geodata):
    c = tf.theta_asymptotics(MOD, SP)
    assert abs(c.alpha - 1 / 6) < 1e-15
    assert abs(c.beta - 1 / (2 * math.sqrt(math.pi))) < 1e-15
    assert abs(c.delta - 41 / 36) < 1e-9
    for t in (1e-4, 1e-3):
        theta = tf.heat_theta_geometric(t, MOD, geodata, TRIV, SP).value.real
        # remainder is O(sqrt t log t)
        assert abs(theta - c.model(t)) < 0.1 * math.sqrt(t) * abs(math.log(t))


# --- scattering ------------------------------------------------------------


def test_provider_invariant():
    assert SP.symmetry_residual < 1e-8
    with pytest.raises(ValidationError):
        tf.ScatteringProvider(phi=lambda s: 2.0, phi_log_deriv=lambda s: 0.0, K0=1.0)


def test_provider_log_derivative():
    for s in (2.0, 0.7 + 3j, 0.5 + 0.01j):
        h = 1e-5
        fd = (tf._modular_log_phi(s + h) - tf._modular_log_phi(s - h)) / (2 * h)
        assert abs(fd - SP.phi_log_deriv(s)) < 1e-6


def test_provider_k0():
    # phi(1/2) = -1 for the modular group
    assert abs(SP.phi(0.5 + 1e-7) + 1) < 1e-5
    assert SP.K0 == -1


@pytest.mark.parametrize("t", [0.5, 1.0])
def test_continuous_term_dirichlet_oracle(t):
    # C1 on the critical line rewritten through the functional equation of zeta
    c1 = tf.continuous_term(TestFunctionPair.heat(t), SP).value
    j, _ = integrate.quad(lambda r: special.psi(0.5 + 1j * r).real * math.exp(-r * r * t), -np.inf, np.inf, epsabs=1e-13)
    lam = tf._von_mangoldt(20000)
    n = np.arange(2, 20001)
    dsum = float(np.sum(lam[2:] / n * np.exp(-np.log(n) ** 2 / t)))
    root = math.sqrt(math.pi / t)
    expected = -math.exp(-t / 4) / (2 * math.pi) * (2 * math.log(math.pi) * root - 2 * j - 4 * (math.pi / 2 - dsum * root))
    assert abs(c1 - expected) < 1e-10


def test_scattering_correction_two_routes():
    grid = tf.LaplaceInversionGrid.sample(lambda q: -SP.phi_log_deriv(0.5 + q), step=0.04)
    for t in (0.5, 1.0, 3.0):
        closed = tf.scattering_correction(t, SP).value
        assert abs(grid.heat(t).value - closed) < 1e-10
    assert abs(tf.scattering_correction(1e-4, SP).value - 0.25) < 1e-2
    with pytest.raises(TailError):
        grid.heat(0.05)
    with pytest.raises(TailError):
        tf.scattering_correction(10.0, SP)


def test_scattering_correction_needs_route():
    bare = tf.ScatteringProvider(SP.phi, SP.phi_log_deriv, SP.K0)
    with pytest.raises(DomainError):
        tf.scattering_correction(1.0, bare)


def test_laplace_grid_exact_transform():
    # G(q) = 2q/(q^2 - 1/4 + 1) is the transform of e^{-t}
    grid = tf.LaplaceInversionGrid.sample(lambda q: 2 * q / (q * q + 0.75), step=0.02, y_max=20)
    for t in (0.3, 1.0, 2.5):
        assert abs(grid.heat(t).value - math.exp(-t)) < 1e-9


def test_corrected_theta_is_spectral(geodata):
    # theta - R sums e^{-lambda t} over the discrete spectrum: 1 + O(e^{-91 t})
    ts = np.linspace(0.5, 1.4, 10)
    vals = [
        tf.heat_theta_geometric(t, MOD, geodata, TRIV, SP).value.real - tf.scattering_correction(t, SP).value.real
        for t in ts
    ]
    assert all(abs(v - 1) < 1e-8 for v in vals)
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))


# --- small-t fit -----------------------------------------------------------


def test_fit_recovers_model():
    true = AsymptoticCoefficients(0.3, -0.2, 0.7, 1.1)
    ts = np.geomspace(1e-4, 5e-2, 10)
    fit = tf.fit_small_t([(t, true.model(t)) for t in ts])
    for a, b in zip((fit.alpha, fit.beta, fit.gamma, fit.delta), (0.3, -0.2, 0.7, 1.1)):
        assert abs(a - b) < 1e-6
    assert fit.fit_residual < 1e-9


def test_fit_pure_inverse():
    ts = np.geomspace(1e-3, 1e-1, 9)
    fit = tf.fit_small_t([(t, 2.5 / t) for t in ts])
    assert abs(fit.alpha - 2.5) < 1e-8
    assert max(abs(fit.beta), abs(fit.gamma), abs(fit.delta)) < 1e-8


def test_fit_errors():
    ts = np.geomspace(1e-3, 1e-1, 7)
    with pytest.raises(DomainError):
        tf.fit_small_t([(t, 1 / t) for t in ts])
    narrow = np.linspace(0.05, 0.1, 10)
    with pytest.raises(DomainError):
        tf.fit_small_t([(t, 1 / t) for t in narrow])
    wide = np.geomspace(1e-3, 1e-1, 10)
    with pytest.raises(IllConditionedError):
        tf.fit_small_t([(t, 1 / t) for t in wide], cond_max=10.0)


@settings(max_examples=25, deadline=None)
@given(
    st.floats(-2, 2),
    st.floats(-2, 2),
    st.floats(-2, 2),
    st.floats(-2, 2),
)
def test_fit_is_linear(a, b, c, d):
    ts = np.geomspace(1e-4, 1e-1, 10)
    coeffs = AsymptoticCoefficients(a, b, c, d)
    fit = tf.fit_small_t([(t, coeffs.model(t)) for t in ts])
    assert abs(fit.alpha - a) < 1e-8 and abs(fit.delta - d) < 1e-6
