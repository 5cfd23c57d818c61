"""Moebius and new-form combinators over congruence levels.

New-form objects at level n combine the level-m objects for m | n with
exponents beta(n/m), beta = mu * mu:

    Z^new_{X,n}(s) = prod_{m | n} Z_{X,m}(s)^{beta(n/m)},

and the determinant assembly multiplies the level-m determinants of
A(Gamma_0(m)) - s(1 - s) the same way, with the elementary factor

    F(s) = (s - 1/2)^{-sum_m K_m beta(n/m)} prod_m phi_m(s)^{beta(n/m)}.

The quaternion side of that identity is not computed here;
``jl_determinant_F`` returns the congruence side for external comparison.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Literal, Mapping

from . import groupdata as gd
from . import laplacedet as ld
from . import traceformula as tf
from . import transferop as to
from . import zetas as zt
from .errors import DomainError, MissingDivisorError, PoleError
from .groupdata import FuchsianDescriptor
from .specfun import EvalResult
from .traceformula import ScatteringProvider

__all__ = [
    "moebius",
    "beta_coeff",
    "divisors",
    "DivisorData",
    "LevelData",
    "level_data",
    "newform_zeta",
    "jl_determinant_F",
    "newform_dimension_combinator",
    "oldform_expansion",
]

_ROUNDING = 16 * 2.0**-52

Kind = Literal["I", "E", "P", "H"]
KINDS = ("I", "E", "P", "H")


def _check_positive(n):
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise DomainError(f"expected an integer >= 1, got {n!r}")


def divisors(n: int) -> list[int]:
    _check_positive(n)
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


@lru_cache(maxsize=None)
def moebius(n: int) -> int:
    _check_positive(n)
    sign, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            sign = -sign
        p += 1
    return -sign if n > 1 else sign


@lru_cache(maxsize=None)
def beta_coeff(a: int) -> int:
    """(mu * mu)(a) = sum_{l | a} mu(l) mu(a/l)."""
    return sum(moebius(l) * moebius(a // l) for l in divisors(a))


@dataclass(frozen=True)
class DivisorData:
    """Level-m ingredients.

    ``zeta[kind]`` maps s to Z_{kind,m}(s) as an EvalResult; ``log_det`` maps
    s to log det(A(Gamma_0(m)) - s(1 - s)) as an EvalResult.
    """

    zeta: Mapping[str, Callable[[complex], EvalResult]]
    provider: ScatteringProvider | None = None
    K: complex = 0.0
    k: int = 0
    log_det: Callable[[complex], EvalResult] | None = None
    descriptor: FuchsianDescriptor | None = None


@dataclass(frozen=True)
class LevelData:
    level: int
    by_divisor: Mapping[int, DivisorData]

    def __post_init__(self):
        _check_positive(self.level)
        missing = [m for m in divisors(self.level) if m not in self.by_divisor]
        if missing:
            raise MissingDivisorError(f"level {self.level}: no data for divisors {missing}")
        extra = [m for m in self.by_divisor if m < 1 or self.level % m]
        if extra:
            raise DomainError(f"level {self.level}: {extra} do not divide the level")

    def exponents(self) -> list[tuple[int, int]]:
        """(m, beta(n/m)) for m | n, ascending in m."""
        return [(m, beta_coeff(self.level // m)) for m in divisors(self.level)]


def _zeta_callables(sub, rep, d: FuchsianDescriptor, degree: int) -> dict[str, Callable]:
    def closed(fn):
        def ev(s):
            v = cmath.exp(fn(complex(s), d))
            return EvalResult(v, _ROUNDING * abs(v), "closed_form")

        return ev

    return {
        "I": closed(zt.log_zeta_identity),
        "E": closed(zt.log_zeta_elliptic),
        "P": closed(zt.log_zeta_parabolic),
        "H": lambda s: to.zeta_via_transfer(s, sub, rep, degree),
    }


def level_data(n: int, degree: int = 24) -> LevelData:
    """Built-in LevelData for Gamma_0(m), m | n, n squarefree, trivial chi."""
    _check_positive(n)
    if moebius(n) == 0:
        raise DomainError("built-in level data needs a squarefree level")
    out = {}
    for m in divisors(n):
        sub = gd.gamma0_subgroup(m)
        rep = gd.build_induced_rep(sub)
        d = gd.fuchsian_from_subgroup(sub)
        sp = tf.gamma0_scattering_provider(m)
        cfg = ld.DetAssemblyConfig(degree=degree)

        def log_det(s, sub=sub, rep=rep, sp=sp, cfg=cfg):
            parts = ld.factorized_parts(s, sub, None, rep, sp, cfg)
            value = cfg.c1 * s * (s - 1) + cfg.c2 + sum(parts["log"].values())
            # Z enters squared
            return EvalResult(value, 2 * parts["zeta_rel_error"] + _ROUNDING * abs(value), "factorized")

        out[m] = DivisorData(_zeta_callables(sub, rep, d, degree), sp, sp.K0, d.nonsingularity_degree, log_det, d)
    return LevelData(n, out)


def _combine(factors: list[tuple[EvalResult, int]], what: str) -> EvalResult:
    if len(factors) == 1 and factors[0][1] == 1:
        return factors[0][0]
    log_total, rel_err, zero = 0j, 0.0, False
    for r, e in factors:
        if e == 0:
            continue
        v = complex(r.value)
        if v == 0:
            if e < 0:
                raise PoleError(f"{what}: zero factor raised to {e}")
            zero = True
            continue
        log_total += e * cmath.log(v)
        rel_err += abs(e) * r.abs_error_estimate / abs(v)
    if zero:
        return EvalResult(0j, 0.0, "log_space")
    value = cmath.exp(log_total)
    return EvalResult(value, abs(value) * rel_err, "log_space")


def newform_zeta(kind: Kind, s, data: LevelData) -> EvalResult:
    """prod_{m | n} Z_{kind,m}(s)^{beta(n/m)}, assembled in log space."""
    if kind not in KINDS:
        raise DomainError(f"kind must be one of {KINDS}")
    factors = [(data.by_divisor[m].zeta[kind](s), e) for m, e in data.exponents() if e != 0]
    return _combine(factors, f"Z_{kind}")


def jl_determinant_F(s, data: LevelData) -> tuple[EvalResult, EvalResult]:
    """(F(s), prod_{m | n} det(A(Gamma_0(m)) - s(1-s))^{beta(n/m)})."""
    s = complex(s)
    if s == 0.5:
        raise PoleError("F has a branch point at s = 1/2")
    exps = [(m, e) for m, e in data.exponents() if e != 0]
    k_sum = sum(complex(data.by_divisor[m].K) * e for m, e in exps)
    phis = []
    for m, e in exps:
        sp = data.by_divisor[m].provider
        if sp is None:
            raise DomainError(f"level {m}: no scattering provider")
        v = sp.phi(s)
        phis.append((EvalResult(v, _ROUNDING * abs(v), "closed_form"), e))
    power = cmath.exp(-k_sum * cmath.log(s - 0.5))
    f = _combine([(EvalResult(power, _ROUNDING * abs(power), "closed_form"), 1)] + phis, "F")
    dets = []
    for m, e in exps:
        fn = data.by_divisor[m].log_det
        if fn is None:
            raise DomainError(f"level {m}: no determinant evaluator")
        r = fn(s)
        v = cmath.exp(r.value)
        dets.append((EvalResult(v, abs(v) * math.expm1(r.abs_error_estimate), r.method_tag), e))
    return f, _combine(dets, "det")


def newform_dimension_combinator(deltas: Mapping[int, int], n: int) -> int:
    """delta_new(n) = sum_{m | n} beta(n/m) delta(m)."""
    divs = divisors(n)
    missing = [m for m in divs if m not in deltas]
    if missing:
        raise MissingDivisorError(f"no multiplicity for divisors {missing}")
    return sum(beta_coeff(n // m) * int(deltas[m]) for m in divs)


def oldform_expansion(new: Mapping[int, int], n: int) -> int:
    """delta(n) = sum_{m | n} d(n/m) delta_new(m), the inverse of the combinator."""
    divs = divisors(n)
    missing = [m for m in divs if m not in new]
    if missing:
        raise MissingDivisorError(f"no multiplicity for divisors {missing}")
    return sum(len(divisors(n // m)) * int(new[m]) for m in divs)
