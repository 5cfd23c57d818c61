"""Complex special functions: log-gamma, digamma, Hurwitz zeta, Barnes zeta/gamma.

Everything here works in double precision and returns an :class:`EvalResult`
carrying the value together with an error estimate claimed by the method.
The implementations are self-contained; scipy and mpmath appear only in the
tests as independent oracles.

Branch conventions
------------------
``log_gamma`` is the analytic continuation of log Gamma from the positive
real axis with its cut along the negative real axis (same convention as
``scipy.special.loggamma``).  On the cut the value from the upper side is
returned.  Non-integer powers ``a**(-z)`` are principal.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import numpy as np

from .errors import DomainError, NumericalOverflowError, PoleError

__all__ = [
    "EvalResult",
    "bernoulli",
    "log_gamma",
    "gamma",
    "digamma",
    "digamma_array",
    "hurwitz_zeta",
    "riemann_zeta",
    "barnes_zeta2",
    "barnes_psi",
    "barnes_gamma2",
    "log_barnes_gamma2",
]

MethodTag = Literal["series", "euler_maclaurin", "recursion_plus_asymptotic", "quadrature"]

EPS = 2.220446049250313e-16
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class EvalResult:
    """A complex value with the absolute error bound its method claims."""

    value: complex
    abs_error_estimate: float
    method_tag: MethodTag

    def __complex__(self) -> complex:
        return complex(self.value)


def _bernoulli_table(n_max: int) -> list[Fraction]:
    # Akiyama-Tanigawa; returns B_0..B_n_max with B_1 = +1/2 convention.
    out = []
    a = [Fraction(0)] * (n_max + 1)
    for m in range(n_max + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out.append(a[0])
    return out


_BERN = _bernoulli_table(40)


def bernoulli(n: int) -> float:
    """Bernoulli number B_n with B_1 = -1/2."""
    if n == 1:
        return -0.5
    return float(_BERN[n])


# B_{2k}/(2k)! and B_{2k}/(2k(2k-1)) for k = 1..20
_EM_COEF = [float(_BERN[2 * k] / math.factorial(2 * k)) for k in range(1, 21)]
_STIRLING = [float(_BERN[2 * k] / (2 * k * (2 * k - 1))) for k in range(1, 21)]
_DIGAMMA = [float(_BERN[2 * k] / (2 * k)) for k in range(1, 21)]


def _as_complex(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"non-finite argument {z!r}")
    return z


def _checked(value: complex, what: str) -> complex:
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise NumericalOverflowError(f"{what} overflowed")
    return value


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


# ---------------------------------------------------------------------------
# Gamma family
# ---------------------------------------------------------------------------

_STIRLING_RADIUS = 15.0
_STIRLING_TERMS = 12


def log_gamma(z) -> EvalResult:
    """log Gamma(z) by upward recursion followed by the Stirling series.

    Raises PoleError at 0, -1, -2, ...
    """
    z = _as_complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"log_gamma pole at {z}")
    shift = max(0, math.ceil(_STIRLING_RADIUS - z.real))
    if abs(z + shift) < _STIRLING_RADIUS:
        shift += math.ceil(_STIRLING_RADIUS)
    x = z + shift
    logx = cmath.log(x)
    acc = (x - 0.5) * logx - x + 0.5 * LOG_2PI
    xinv = 1.0 / x
    xinv2 = xinv * xinv
    p = xinv
    for c in _STIRLING[:_STIRLING_TERMS]:
        acc += c * p
        p *= xinv2
    tail = abs(_STIRLING[_STIRLING_TERMS] * p)
    corr = 0j
    for k in range(shift):
        corr += cmath.log(z + k)
    value = acc - corr
    err = tail + 4 * EPS * (abs(acc) + abs(corr) + shift)
    return EvalResult(_checked(value, "log_gamma"), err, "recursion_plus_asymptotic")


def gamma(z) -> complex:
    """Gamma(z) as exp(log_gamma(z)); zero is never returned."""
    return cmath.exp(log_gamma(z).value)


def digamma(z) -> EvalResult:
    """psi(z) = d/dz log Gamma(z) by recursion plus asymptotic expansion."""
    z = _as_complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"digamma pole at {z}")
    shift = max(0, math.ceil(_STIRLING_RADIUS - z.real))
    if abs(z + shift) < _STIRLING_RADIUS:
        shift += math.ceil(_STIRLING_RADIUS)
    x = z + shift
    xinv = 1.0 / x
    xinv2 = xinv * xinv
    acc = cmath.log(x) - 0.5 * xinv
    p = xinv2
    for c in _DIGAMMA[:_STIRLING_TERMS]:
        acc -= c * p
        p *= xinv2
    tail = abs(_DIGAMMA[_STIRLING_TERMS] * p)
    corr = 0j
    for k in range(shift):
        corr += 1.0 / (z + k)
    value = acc - corr
    err = tail + 4 * EPS * (abs(acc) + sum(abs(1.0 / (z + k)) for k in range(shift)))
    return EvalResult(_checked(value, "digamma"), err, "recursion_plus_asymptotic")


def digamma_array(z) -> np.ndarray:
    """Vectorized digamma for arrays with Re z > 0 (same method as ``digamma``)."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.real <= 0):
        raise DomainError("digamma_array needs Re(z) > 0")
    shift = int(math.ceil(_STIRLING_RADIUS)) + 1
    corr = np.zeros_like(z)
    for k in range(shift):
        corr += 1.0 / (z + k)
    x = z + shift
    xinv2 = 1.0 / (x * x)
    acc = np.log(x) - 0.5 / x
    p = xinv2
    for c in _DIGAMMA[:_STIRLING_TERMS]:
        acc -= c * p
        p = p * xinv2
    return acc - corr


# ---------------------------------------------------------------------------
# Hurwitz zeta
# ---------------------------------------------------------------------------

_EM_TERMS = 15


def _hurwitz_em(z: complex, w: complex) -> tuple[complex, float]:
    """Euler-Maclaurin evaluation with shift M so that Re(w+M) > |z| + 10."""
    m = max(0, math.ceil(abs(z) + 10.0 - w.real) + 1)
    head = 0j
    habs = 0.0
    for n in range(m):
        t = cmath.exp(-z * cmath.log(n + w))
        head += t
        habs += abs(t)
    a = w + m
    loga = cmath.log(a)
    a_mz = cmath.exp(-z * loga)
    acc = a * a_mz / (z - 1.0) + 0.5 * a_mz
    # (z)_{2k-1} a^{-z-2k+1}
    poch = z
    pw = a_mz / a
    ainv2 = 1.0 / (a * a)
    term = 0j
    for k in range(1, _EM_TERMS + 2):
        term = _EM_COEF[k - 1] * poch * pw
        if k == _EM_TERMS + 1:
            break
        acc += term
        poch *= (z + 2 * k - 1) * (z + 2 * k)
        pw *= ainv2
    value = head + acc
    err = 2.0 * abs(term) + 8 * EPS * (habs + abs(acc))
    return value, err


def hurwitz_zeta(z, w) -> EvalResult:
    """Hurwitz zeta sum_{n>=0} (n+w)^{-z}, continued in z to C minus {1}.

    Requires Re(w) > 0.
    """
    z = _as_complex(z)
    w = _as_complex(w)
    if w.real <= 0.0:
        raise DomainError(f"hurwitz_zeta needs Re(w) > 0, got {w}")
    if z == 1.0:
        raise PoleError("hurwitz_zeta pole at z = 1")
    value, err = _hurwitz_em(z, w)
    return EvalResult(_checked(value, "hurwitz_zeta"), err, "euler_maclaurin")


def riemann_zeta(z) -> EvalResult:
    """Riemann zeta as hurwitz_zeta(z, 1)."""
    return hurwitz_zeta(z, 1.0)


# ---------------------------------------------------------------------------
# Barnes double zeta and gamma with periods (1, 1)
# ---------------------------------------------------------------------------


def barnes_zeta2(z, w) -> EvalResult:
    """zeta_2(z, w | 1, 1) = sum_{m,n>=0} (w+m+n)^{-z}.

    The double series collapses to sum_k (k+1)(w+k)^{-z}, which equals
    zeta(z-1, w) + (1-w) zeta(z, w).  That gives the continuation in z with
    poles at z = 1 and z = 2.
    """
    z = _as_complex(z)
    w = _as_complex(w)
    if w.real <= 0.0:
        raise DomainError(f"barnes_zeta2 needs Re(w) > 0, got {w}")
    if z == 1.0 or z == 2.0:
        raise PoleError(f"barnes_zeta2 pole at z = {z}")
    a = hurwitz_zeta(z - 1.0, w)
    b = hurwitz_zeta(z, w)
    value = a.value + (1.0 - w) * b.value
    err = a.abs_error_estimate + abs(1.0 - w) * b.abs_error_estimate
    return EvalResult(_checked(value, "barnes_zeta2"), err, "euler_maclaurin")


_PSI_STEP = 0.02
_PSI_LEVELS = 4


def _richardson_derivative(f, h: float, levels: int = _PSI_LEVELS) -> tuple[complex, float]:
    """f'(0) from central differences along the imaginary axis.

    D(h) = (f(ih) - f(-ih)) / (2ih) has an even error expansion in h, so
    each halving of the step removes one more power h^2 from the error.
    The returned estimate is the gap between the last two extrapolants.
    """
    table = [(f(1j * h / 2**j) - f(-1j * h / 2**j)) / (2j * h / 2**j) for j in range(levels)]
    last = table[-1]
    for m in range(1, levels):
        factor = 4.0**m
        last = table[-1]
        table = [(factor * table[i + 1] - table[i]) / (factor - 1) for i in range(len(table) - 1)]
    return table[0], abs(table[0] - last)


def barnes_psi(order: int, w) -> EvalResult:
    """Psi_N(w) = d/dz zeta_N(z, w | 1, ..., 1) at z = 0 for N in {1, 2}."""
    w = _as_complex(w)
    if w.real <= 0.0:
        raise DomainError(f"barnes_psi needs Re(w) > 0, got {w}")
    if order == 1:
        lg = log_gamma(w)
        return EvalResult(lg.value - 0.5 * LOG_2PI, lg.abs_error_estimate + EPS, "recursion_plus_asymptotic")
    if order != 2:
        raise DomainError(f"barnes_psi order must be 1 or 2, got {order}")
    errs = []

    def f(z):
        r = barnes_zeta2(z, w)
        errs.append(r.abs_error_estimate)
        return r.value

    value, rich_err = _richardson_derivative(f, _PSI_STEP)
    err = rich_err + max(errs) * 2**_PSI_LEVELS / _PSI_STEP + 1e-14 * abs(value)
    return EvalResult(_checked(value, "barnes_psi"), err, "euler_maclaurin")


def log_barnes_gamma2(w) -> EvalResult:
    """log Gamma_2(w) = Psi_2(w) - (w/2) log 2 pi.

    This is the double gamma normalized by Gamma_2(w|1,1) = Gamma_2(w) (2 pi)^{w/2},
    so that Gamma_2(w) = Gamma(w) Gamma_2(w + 1).
    """
    w = _as_complex(w)
    psi = barnes_psi(2, w)
    return EvalResult(psi.value - 0.5 * w * LOG_2PI, psi.abs_error_estimate, psi.method_tag)


def barnes_gamma2(w) -> EvalResult:
    """Barnes double gamma Gamma_2(w) for Re(w) > 0."""
    lg = log_barnes_gamma2(w)
    value = _checked(cmath.exp(lg.value), "barnes_gamma2")
    return EvalResult(value, abs(value) * lg.abs_error_estimate * 1.01, lg.method_tag)
