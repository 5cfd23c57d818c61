import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selberg_det import groupdata as gd
from selberg_det import jl
from selberg_det import laplacedet as ld
from selberg_det import traceformula as tf
from selberg_det import zetas as zt
from selberg_det.errors import DomainError, MissingDivisorError, PoleError
from selberg_det.specfun import EvalResult


@pytest.fixture(scope="module")
def level6():
    return jl.level_data(6)


@pytest.fixture(scope="module")
def level1():
    return jl.level_data(1)


def _mu_by_sieve(n_max):
    mu = [1] * (n_max + 1)
    prime = [True] * (n_max + 1)
    for p in range(2, n_max + 1):
        if prime[p]:
            for k in range(p, n_max + 1, p):
                if k > p:
                    prime[k] = False
                mu[k] = -mu[k]
            for k in range(p * p, n_max + 1, p * p):
                mu[k] = 0
    return mu


# --- arithmetic ---------------------------------------------------------------


def test_moebius_examples():
    assert [jl.moebius(n) for n in (1, 6, 12, 30, 7)] == [1, 1, 0, -1, -1]


def test_moebius_matches_sieve():
    mu = _mu_by_sieve(3000)
    assert all(jl.moebius(n) == mu[n] for n in range(1, 3001))


def test_moebius_sum_over_divisors():
    for n in range(1, 300):
        assert sum(jl.moebius(d) for d in jl.divisors(n)) == (n == 1)


def test_beta_examples():
    assert [jl.beta_coeff(a) for a in (1, 2, 3, 4, 6, 8)] == [1, -2, -2, 1, 4, 0]


def test_beta_prime_powers():
    for p in (2, 3, 5, 7):
        assert [jl.beta_coeff(p**k) for k in range(4)] == [1, -2, 1, 0]


def test_beta_multiplicative():
    for a in range(1, 10001):
        for b in range(1, 10000 // a + 1):
            if math.gcd(a, b) == 1:
                assert jl.beta_coeff(a * b) == jl.beta_coeff(a) * jl.beta_coeff(b)


def test_bad_arguments():
    for bad in (0, -3, 2.0, True):
        with pytest.raises(DomainError):
            jl.moebius(bad)


# --- dimension combinator -----------------------------------------------------


def test_combinator_examples():
    assert jl.newform_dimension_combinator({1: 0, 2: 0}, 2) == 0
    assert jl.newform_dimension_combinator({1: 5, 7: 3}, 7) == 3 - 10
    assert jl.newform_dimension_combinator({1: 1, 2: 3, 4: 7}, 4) == 2


def test_combinator_missing_divisor():
    with pytest.raises(MissingDivisorError):
        jl.newform_dimension_combinator({1: 1, 2: 3}, 4)
    with pytest.raises(MissingDivisorError):
        jl.oldform_expansion({1: 1}, 6)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 200), st.data())
def test_moebius_round_trip(n, data):
    divs = jl.divisors(n)
    delta = {m: data.draw(st.integers(-50, 50)) for m in divs}
    new = {m: jl.newform_dimension_combinator(delta, m) for m in divs}
    assert jl.oldform_expansion(new, n) == delta[n]


def test_round_trip_exhaustive_random():
    import random

    rng = random.Random(7)
    for n in range(1, 201):
        divs = jl.divisors(n)
        delta = {m: rng.randint(-100, 100) for m in divs}
        new = {m: jl.newform_dimension_combinator(delta, m) for m in divs}
        assert jl.oldform_expansion(new, n) == delta[n]


# --- level data -----------------------------------------------------------------


def test_level_data_divisor_closure(level6):
    assert sorted(level6.by_divisor) == [1, 2, 3, 6]
    assert level6.exponents() == [(1, 4), (2, -2), (3, -2), (6, 1)]
    with pytest.raises(MissingDivisorError):
        jl.LevelData(6, {m: level6.by_divisor[m] for m in (1, 2, 6)})
    with pytest.raises(DomainError):
        jl.LevelData(2, {1: level6.by_divisor[1], 2: level6.by_divisor[2], 3: level6.by_divisor[3]})
    with pytest.raises(DomainError):
        jl.level_data(4)


def test_level_data_descriptors(level6):
    for m, cusps in ((1, 1), (2, 2), (3, 2), (6, 4)):
        d = level6.by_divisor[m]
        assert d.k == cusps and d.K == -cusps
        assert d.descriptor.rep_dim == gd.gamma0_subgroup(m).index
        assert abs(d.descriptor.area - math.pi / 3) < 1e-12


# --- new-form zeta ---------------------------------------------------------------


@pytest.mark.parametrize("kind", ["I", "E", "P", "H"])
def test_level_one_is_identity(kind, level1):
    for s in (2.0, 1.5 + 0.5j):
        assert jl.newform_zeta(kind, s, level1) == level1.by_divisor[1].zeta[kind](s)


def test_prime_level(level6):
    data = jl.level_data(3)
    s = 2.3
    for kind in "IEPH":
        z = jl.newform_zeta(kind, s, data).value
        direct = data.by_divisor[3].zeta[kind](s).value * data.by_divisor[1].zeta[kind](s).value ** -2
        assert abs(z - direct) < 1e-12 * abs(direct)


def test_level_six_identity_zeta(level6):
    # exponents 4, -2, -2, 1 on indices 1, 3, 4, 12 give twice the area of PSL(2, Z)
    s = 2.0
    z = jl.newform_zeta("I", s, level6).value
    expected = cmath.exp(2 * zt.log_zeta_identity(s, gd.MODULAR_GROUP))
    assert abs(z - expected) < 1e-12 * abs(expected)


def test_level_six_has_no_parabolic_part(level6):
    # a cocompact partner leaves nothing parabolic: Z_P^new = 1 and F = 1
    for s in (1.7, 2.0, 3.1 + 0.4j):
        assert abs(jl.newform_zeta("P", s, level6).value - 1) < 1e-12
        f, _ = jl.jl_determinant_F(s, level6)
        assert abs(f.value - 1) < 1e-12


def test_pole_on_zero_factor():
    zero = {k: (lambda s: EvalResult(0j, 0.0, "closed_form")) for k in "IEPH"}
    one = {k: (lambda s: EvalResult(1 + 0j, 0.0, "closed_form")) for k in "IEPH"}
    data = jl.LevelData(2, {1: jl.DivisorData(zero), 2: jl.DivisorData(one)})
    with pytest.raises(PoleError):
        jl.newform_zeta("H", 2.0, data)
    flipped = jl.LevelData(2, {1: jl.DivisorData(one), 2: jl.DivisorData(zero)})
    assert jl.newform_zeta("H", 2.0, flipped).value == 0


def test_newform_zeta_bad_kind(level1):
    with pytest.raises(DomainError):
        jl.newform_zeta("X", 2.0, level1)


# --- determinant assembly ------------------------------------------------------


def test_F_level_one(level1):
    s = 2.0
    f, rhs = jl.jl_determinant_F(s, level1)
    sp = tf.modular_scattering_provider()
    assert abs(f.value - (s - 0.5) ** 1 * sp.phi(s)) < 1e-14
    assert abs(rhs.value - cmath.exp(level1.by_divisor[1].log_det(s).value)) < 1e-14


def test_F_exponent_sum(level6):
    assert sum(e for _, e in level6.exponents()) == 1


def test_F_log_space_matches_direct_product():
    data = jl.level_data(2)
    s = 2.0
    f, rhs = jl.jl_determinant_F(s, data)
    sp1, sp2 = data.by_divisor[1].provider, data.by_divisor[2].provider
    k_sum = -2 * sp1.K0 + sp2.K0
    direct_f = (s - 0.5) ** (-k_sum) * sp1.phi(s) ** -2 * sp2.phi(s)
    direct_rhs = cmath.exp(data.by_divisor[1].log_det(s).value) ** -2 * cmath.exp(data.by_divisor[2].log_det(s).value)
    assert abs(f.value - direct_f) < 1e-12 * abs(direct_f)
    assert abs(rhs.value - direct_rhs) < 1e-12 * abs(direct_rhs)


def test_F_branch_point(level1):
    with pytest.raises(PoleError):
        jl.jl_determinant_F(0.5, level1)


# --- congruence scattering data ---------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 6])
def test_gamma0_provider_functional_equation(n):
    sp = tf.gamma0_scattering_provider(n)
    sub = gd.gamma0_subgroup(n)
    for s in (0.5 + 2j, 0.7 + 1j):
        assert ld.functional_eq_residual(s, sub, sp, degree=24) < 1e-6


def test_gamma0_provider_squarefree_only():
    with pytest.raises(DomainError):
        tf.gamma0_scattering_provider(4)
