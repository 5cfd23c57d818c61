"""Selberg zeta function and the gamma-type factors of the complete zeta.

    Z(s)   = prod_{k>=0} prod_P det(1 - chi(P) N(P)^{-k-s})          Re s > 1
    Z_I(s) = ((2 pi)^s Gamma_2(s)^2 / Gamma(s))^{n|F|/2pi}
    Z_E(s) = prod_R prod_{l<nu} Gamma((s+l)/nu)^{(-n(nu-1) + alpha(R,l))/nu}
    Z_P(s) = e^{-c s} 2^{-k s} (s - 1/2)^{-k/2} Gamma(s + 1/2)^{-k}

All products are accumulated as sums of logarithms and exponentiated once.
Non-integer powers use principal branches, so Z_I and Z_E are single valued
only off (-inf, 0].
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from . import specfun as sf
from .errors import DomainError, PoleError, TailError
from .geodesics import GeodesicClass, class_word
from .groupdata import FuchsianDescriptor, InducedRep, alpha_table
from .specfun import EvalResult

__all__ = [
    "ZeroPoleLists",
    "class_eigenvalues",
    "selberg_zeta_euler",
    "log_selberg_zeta_euler",
    "selberg_zeta_log_derivative",
    "hyperbolic_resolvent_term",
    "zeta_identity",
    "log_zeta_identity",
    "zeta_elliptic",
    "log_zeta_elliptic",
    "elliptic_exponents",
    "zeta_parabolic",
    "log_zeta_parabolic",
    "parabolic_constant",
    "complete_zeta",
    "complete_zeta_parts",
    "hadamard_eval",
    "tail_sum_bound",
]

LOG_2PI = math.log(2 * math.pi)
TAIL_SAFETY = 10.0


def _csum(values) -> complex:
    vals = list(values)
    return complex(math.fsum(v.real for v in vals), math.fsum(v.imag for v in vals))


def _check_cut(s: complex, what: str):
    if s.imag == 0 and s.real <= 0:
        raise DomainError(f"{what} is evaluated off (-inf, 0], got s={s}")


# ---------------------------------------------------------------------------
# Euler product
# ---------------------------------------------------------------------------


def class_eigenvalues(classes: Sequence[GeodesicClass], rep: InducedRep) -> np.ndarray:
    """Eigenvalues of U(P), one row per class."""
    if rep.dim == 1 and np.allclose(rep.S, 1) and np.allclose(rep.T, 1):
        return np.ones((len(classes), 1), dtype=complex)
    out = np.empty((len(classes), rep.dim), dtype=complex)
    for i, c in enumerate(classes):
        out[i] = np.linalg.eigvals(rep.evaluate(class_word(c)))
    return out


def tail_sum_bound(x: float, a: float) -> float:
    """Heuristic bound for sum_{N(P) > x} N(P)^{-a}, a > 1, via dpi(N) ~ dN / log N."""
    if a <= 1:
        return math.inf
    return TAIL_SAFETY * x ** (1 - a) / ((a - 1) * math.log(x))


def _euler_tail(sigma: float, dim: int, norm_cut: float, n_min: float) -> float:
    # |log det(1 - chi N^{-k-s})| <= n N^{-k-sigma} / (1 - N^{-k-sigma}), summed over k
    geo = 1.0 / ((1 - 1 / n_min) * (1 - n_min ** -sigma))
    return dim * geo * tail_sum_bound(norm_cut, sigma)


def _euler_k_tail(sigma: float, dim: int, norms: np.ndarray, k_max: int) -> float:
    if norms.size == 0:
        return 0.0
    x = norms ** -(k_max + 1 + sigma)
    return float(dim * np.sum(x / ((1 - 1 / norms) * (1 - x))))


@dataclass
class _EulerData:
    norms: np.ndarray
    logn: np.ndarray
    eig: np.ndarray


def _prepare(classes, rep, eigenvalues=None) -> _EulerData:
    norms = np.array([c.norm for c in classes], dtype=float)
    eig = class_eigenvalues(classes, rep) if eigenvalues is None else np.asarray(eigenvalues)
    return _EulerData(norms, np.log(norms) if norms.size else norms, eig)


def log_selberg_zeta_euler(
    s,
    classes: Sequence[GeodesicClass],
    rep: InducedRep,
    k_max: int = 20,
    norm_max: float | None = None,
    tol: float | None = None,
    eigenvalues: np.ndarray | None = None,
) -> EvalResult:
    """log Z(s) from the truncated Euler product, with a tail estimate.

    ``norm_max`` is the cutoff up to which ``classes`` is complete (defaults
    to the largest norm supplied, or 6 for an empty list, below which no
    classes exist).
    """
    s = complex(s)
    if s.real <= 1:
        raise DomainError(f"Euler product needs Re(s) > 1, got {s}")
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    data = _prepare(classes, rep, eigenvalues)
    dim = rep.dim
    if norm_max is None:
        norm_max = float(data.norms.max()) if data.norms.size else 6.0
    total = 0j
    if data.norms.size:
        terms = []
        for k in range(k_max + 1):
            x = np.exp(-(k + s) * data.logn)[:, None] * data.eig
            terms.append(np.log1p(-x).sum(axis=1))
        flat = np.concatenate(terms)
        total = complex(math.fsum(flat.real), math.fsum(flat.imag))
    n_min = max(6.85, float(data.norms.min()) if data.norms.size else 6.85)
    tail = _euler_tail(s.real, dim, max(norm_max, 6.0), n_min)
    tail += _euler_k_tail(s.real, dim, data.norms, k_max)
    if tol is not None and tail > tol:
        raise TailError(f"tail estimate {tail:g} exceeds tolerance {tol:g}")
    return EvalResult(total, tail + 1e-15 * (abs(total) + 1), "series")


def selberg_zeta_euler(s, classes, rep, k_max: int = 20, norm_max=None, tol=None, eigenvalues=None) -> EvalResult:
    """Z(s) = prod_{k<=k_max} prod_P det(1 - chi(P) N(P)^{-k-s})."""
    lz = log_selberg_zeta_euler(s, classes, rep, k_max, norm_max, tol, eigenvalues)
    v = cmath.exp(lz.value)
    return EvalResult(v, abs(v) * math.expm1(lz.abs_error_estimate), "series")


def selberg_zeta_log_derivative(s, classes, rep, k_max: int = 20, eigenvalues=None) -> complex:
    """d/ds log Z(s), summed term by term."""
    s = complex(s)
    if s.real <= 1:
        raise DomainError(f"Euler product needs Re(s) > 1, got {s}")
    data = _prepare(classes, rep, eigenvalues)
    if not data.norms.size:
        return 0j
    parts = []
    for k in range(k_max + 1):
        x = np.exp(-(k + s) * data.logn)[:, None] * data.eig
        parts.append((data.logn[:, None] * x / (1 - x)).sum(axis=1))
    flat = np.concatenate(parts)
    return complex(math.fsum(flat.real), math.fsum(flat.imag))


def hyperbolic_resolvent_term(
    s,
    beta: float,
    classes: Sequence[GeodesicClass],
    rep: InducedRep,
    norm_max: float | None = None,
    eigenvalues=None,
) -> EvalResult:
    """H(s) = sum_P sum_m tr chi^m(P) log N / (N^{m/2} - N^{-m/2})
    [ N^{-m(s-1/2)}/(2s-1) - N^{-m beta}/(2 beta) ]."""
    s = complex(s)
    if s.real <= 1:
        raise DomainError(f"needs Re(s) > 1, got {s}")
    if not beta > 0.5:
        raise DomainError(f"needs beta > 1/2, got {beta}")
    if not classes:
        return EvalResult(0j, 0.0, "series")
    data = _prepare(classes, rep, eigenvalues)
    a = min(s.real, beta + 0.5)
    m_max = int(math.ceil(40.0 / (a * math.log(data.norms.min())))) + 1
    parts = []
    for m in range(1, m_max + 1):
        tr = (data.eig**m).sum(axis=1)
        half = np.exp(0.5 * m * data.logn)
        w = data.logn / (half - 1 / half)
        br = np.exp(-m * (s - 0.5) * data.logn) / (2 * s - 1) - np.exp(-m * beta * data.logn) / (2 * beta)
        parts.append(tr * w * br)
    flat = np.concatenate(parts)
    total = complex(math.fsum(flat.real), math.fsum(flat.imag))
    if norm_max is None:
        norm_max = float(data.norms.max())
    x = max(norm_max, 6.0)
    # sum_{N > x} log N N^{-a} with dpi ~ dN/log N
    tail = TAIL_SAFETY * rep.dim * 2 * x ** (1 - a) / (a - 1) * (1 / abs(2 * s - 1) + 1 / (2 * beta))
    return EvalResult(total, tail, "series")


# ---------------------------------------------------------------------------
# gamma-type factors
# ---------------------------------------------------------------------------


def log_zeta_identity(s, d: FuchsianDescriptor) -> complex:
    s = complex(s)
    _check_cut(s, "Z_I")
    if s.real <= 0:
        raise DomainError(f"Z_I needs Re(s) > 0, got {s}")
    expo = d.rep_dim * d.area / (2 * math.pi)
    return expo * (s * LOG_2PI + 2 * sf.log_barnes_gamma2(s).value - sf.log_gamma(s).value)


def zeta_identity(s, d: FuchsianDescriptor) -> complex:
    """Z_I(s) = exp((n|F|/2pi) [s log 2pi + 2 log Gamma_2(s) - log Gamma(s)])."""
    return cmath.exp(log_zeta_identity(s, d))


def elliptic_exponents(d: FuchsianDescriptor) -> list[tuple[int, int, float]]:
    """(nu, l, exponent) with exponent (-n(nu-1) + alpha(R,l))/nu, one entry per class and l."""
    table = alpha_table(d)
    out = []
    for r, nu in enumerate(d.elliptic_orders):
        for l in range(nu):
            out.append((nu, l, (-d.rep_dim * (nu - 1) + table[(r, l)]) / nu))
    return out


def log_zeta_elliptic(s, d: FuchsianDescriptor) -> complex:
    s = complex(s)
    _check_cut(s, "Z_E")
    terms = [e * sf.log_gamma((s + l) / nu).value for nu, l, e in elliptic_exponents(d) if e != 0]
    return _csum(terms)


def zeta_elliptic(s, d: FuchsianDescriptor) -> complex:
    """Z_E(s) = prod_R prod_l Gamma((s+l)/nu)^{(-n(nu-1)+alpha(R,l))/nu}."""
    if not d.elliptic_orders:
        return 1 + 0j
    return cmath.exp(log_zeta_elliptic(s, d))


def parabolic_constant(d: FuchsianDescriptor) -> float:
    """c(n, h) = sum over cusps and non-trivial angles of ln|1 - exp(2 pi i theta)|."""
    return math.fsum(
        math.log(abs(1 - cmath.exp(2j * math.pi * th))) for c in d.cusp_data for th in c.theta_angles
    )


def log_zeta_parabolic(s, d: FuchsianDescriptor) -> complex:
    s = complex(s)
    k = d.nonsingularity_degree
    c = parabolic_constant(d)
    if k == 0:
        return -c * s
    if s == 0.5:
        raise PoleError("Z_P has a branch point / pole at s = 1/2")
    return -c * s - k * s * math.log(2) - 0.5 * k * cmath.log(s - 0.5) - k * sf.log_gamma(s + 0.5).value


def zeta_parabolic(s, d: FuchsianDescriptor) -> complex:
    """Z_P(s) = e^{-c s} 2^{-k s} (s - 1/2)^{-k/2} Gamma(s + 1/2)^{-k}."""
    return cmath.exp(log_zeta_parabolic(s, d))


def complete_zeta_parts(s, d: FuchsianDescriptor, classes, rep, k_max: int = 20, norm_max=None) -> dict:
    """The four factors Z_I, Z_E, Z_P, Z at s, keyed identity/elliptic/parabolic/euler."""
    return {
        "identity": zeta_identity(s, d),
        "elliptic": zeta_elliptic(s, d),
        "parabolic": zeta_parabolic(s, d),
        "euler": selberg_zeta_euler(s, classes, rep, k_max, norm_max).value,
    }


def complete_zeta(s, d: FuchsianDescriptor, classes, rep, k_max: int = 20, norm_max=None) -> EvalResult:
    """Z_I Z_E Z_P Z at s (Euler product region Re s > 1)."""
    lz = log_selberg_zeta_euler(s, classes, rep, k_max, norm_max)
    logs = [log_zeta_identity(s, d), log_zeta_elliptic(s, d), log_zeta_parabolic(s, d), lz.value]
    total = _csum(logs)
    v = cmath.exp(total)
    return EvalResult(v, abs(v) * math.expm1(lz.abs_error_estimate), "series")


# ---------------------------------------------------------------------------
# Hadamard products
# ---------------------------------------------------------------------------

Entries = Sequence[tuple[complex, int]]


@dataclass(frozen=True)
class ZeroPoleLists:
    """Zeros and poles of Z as (point, multiplicity) pairs.

    s4_plus holds zeros at -j, s4_minus poles at -j, s5 poles at -j + 1/2.
    k_big is the order of the pole at 1/2, q_poly the coefficients of Q
    (constant term first).
    """

    s1: Entries = ()
    s2: Entries = ()
    s3: Entries = ()
    s4_plus: Entries = ()
    s4_minus: Entries = ()
    s5: Entries = ()
    k_big: float = 0.0
    n0: float = 0.0
    q_poly: tuple[complex, ...] = ()

    def __post_init__(self):
        if len(self.q_poly) > 3:
            raise DomainError("Q has degree at most 2")
        for z, m in self.s1:
            z = complex(z)
            on_line = abs(z.real - 0.5) < 1e-12 and z.imag != 0
            on_segment = z.imag == 0 and 0.5 < z.real <= 1
            if not (on_line or on_segment) or m < 1:
                raise DomainError(f"S1 entry {z} is neither on Re s = 1/2 nor in (1/2, 1]")
        for z, m in self.s5:
            z = complex(z)
            j = 0.5 - z.real
            if z.imag != 0 or j < 1 or j != int(j) or m < 1:
                raise DomainError(f"S5 entry {z} is not of the form -j + 1/2, j >= 1")
        for name in ("s4_plus", "s4_minus"):
            for z, m in getattr(self, name):
                z = complex(z)
                if z.imag != 0 or z.real > -1 or z.real != int(z.real) or m < 1:
                    raise DomainError(f"{name} entry {z} is not a negative integer")


def _primary_log(u: complex, p: int) -> complex:
    """log of (1 - u) exp(sum_{i<=p} u^i / i), principal log of (1 - u)."""
    acc = cmath.log(1 - u)
    for i in range(1, p + 1):
        acc += u**i / i
    return acc


def _sorted(entries: Entries) -> list[tuple[complex, int]]:
    return sorted(((complex(z), int(m)) for z, m in entries), key=lambda e: (abs(e[0]), e[0].real, e[0].imag, e[1]))


def _check_excluded(s: complex, lists: ZeroPoleLists):
    for z, _ in list(lists.s4_minus) + list(lists.s5):
        if s == complex(z):
            raise PoleError(f"s = {s} is a pole")
    if lists.k_big > 0 and s == 0.5:
        raise PoleError("s = 1/2 is a pole")
    if lists.n0 < 0 and s == 0:
        raise PoleError("s = 0 is a pole")


def hadamard_eval(s, lists: ZeroPoleLists, mode: Literal["absolute", "pointwise"] = "absolute") -> EvalResult:
    """Evaluate the Hadamard factorization of Z from finite zero/pole lists.

    absolute:  genus-2 factors over S1, S2, S4+, genus-1 over S5, plain
               factors over S3 and S4-.
    pointwise: plain factors over S1, S2, S3; genus-1 over S4+; the S5
               product is cut after t(N) = N^{(2 Re s - 1)/k} entries, N
               being the number of S1 and S2 points used.

    The error estimate is only the rounding of the finite product; no
    analytic tail is claimed.
    """
    s = complex(s)
    _check_excluded(s, lists)
    logs: list[complex] = []
    logs.append(sum(complex(c) * s**i for i, c in enumerate(lists.q_poly)) if lists.q_poly else 0j)
    if lists.k_big:
        logs.append(-lists.k_big * cmath.log(1 - 2 * s))
    if lists.n0:
        logs.append(lists.n0 * cmath.log(s))
    count = 0
    if mode == "absolute":
        groups = [
            (lists.s3, 0, 1),
            (lists.s4_minus, 0, -1),
            (lists.s1, 2, 1),
            (lists.s2, 2, 1),
            (lists.s4_plus, 2, 1),
            (lists.s5, 1, -1),
        ]
        for entries, p, sign in groups:
            for z, m in _sorted(entries):
                logs.append(sign * m * _primary_log(s / z, p))
                count += m
    elif mode == "pointwise":
        zeros12 = _sorted(list(lists.s1) + list(lists.s2))
        n_zeros = sum(m for _, m in zeros12)
        for entries, p, sign in ((zeros12, 0, 1), (lists.s3, 0, 1), (lists.s4_plus, 1, 1), (lists.s4_minus, 0, -1)):
            for z, m in _sorted(entries):
                logs.append(sign * m * _primary_log(s / z, p))
                count += m
        s5 = _sorted(lists.s5)
        k = s5[0][1] if s5 else 0
        if k:
            t_n = n_zeros ** ((2 * s.real - 1) / k) if n_zeros else 0.0
            used = 0
            for z, m in s5:
                if used >= t_n:
                    break
                logs.append(-m * _primary_log(s / z, 0))
                used += 1
                count += m
    else:
        raise DomainError(f"unknown mode {mode!r}")
    total = _csum(logs)
    v = cmath.exp(total)
    return EvalResult(v, abs(v) * 4 * sf.EPS * (count + 1), "series")
