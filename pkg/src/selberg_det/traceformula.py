"""Geometric side of the Selberg trace formula for (Gamma, chi).

Two test-function families are supported.

``resolvent``:  h(r) = 1/(r^2 + (s-1/2)^2) - 1/(r^2 + beta^2),
                g(u) = e^{-(s-1/2)|u|}/(2s-1) - e^{-beta|u|}/(2 beta).
``heat``:       h(r) = e^{-(r^2+1/4) t},
                g(u) = (4 pi t)^{-1/2} e^{-u^2/4t - t/4}.

Resolvent-kind terms follow the trace formula summed over eigenvalues.
Heat-kind terms follow the form summed over spectral parameters sigma
and sigma' = 1 - sigma, so every heat term is twice the term its pair
would give in the eigenvalue form.  This matters when comparing
against the resolvent kind: the Laplace transform

    int_0^inf (e^{-s(s-1)t} - e^{-(beta^2-1/4)t}) X(t) dt

of a heat term X(t) equals 2 X(s) for the matching resolvent term.

Line integrals over r use a sinh-mapped midpoint rule
(``line_quadrature``), refined by halving the step until two levels
agree.
"""
from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from . import specfun as sf
from . import zetas as zt
from .errors import (
    ConvergenceError,
    DomainError,
    IllConditionedError,
    TailError,
    ValidationError,
)
from .groupdata import FuchsianDescriptor, InducedRep, elliptic_character
from .regdet import AsymptoticCoefficients
from .specfun import EvalResult

__all__ = [
    "TestFunctionPair",
    "ScatteringProvider",
    "modular_scattering_provider",
    "gamma0_scattering_provider",
    "LaplaceInversionGrid",
    "line_quadrature",
    "identity_term",
    "elliptic_term",
    "parabolic_term",
    "hyperbolic_term",
    "continuous_term",
    "scattering_correction",
    "heat_theta_geometric",
    "heat_tail_bound",
    "GeodesicData",
    "theta_asymptotics",
    "fit_small_t",
    "T_MIN",
    "T_MAX",
]

T_MIN = 1e-4
T_MAX = 50.0
EULER_GAMMA = 0.5772156649015329
SQRT_PI = math.sqrt(math.pi)


# ---------------------------------------------------------------------------
# test functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestFunctionPair:
    """A Selberg transform pair (h, g) of resolvent or heat type."""

    __test__ = False  # keep pytest from collecting this class

    kind: Literal["resolvent", "heat"]
    s: complex = 2.0
    beta: float = 1.5
    t: float = 1.0

    def __post_init__(self):
        if self.kind == "resolvent":
            object.__setattr__(self, "s", complex(self.s))
            if not self.beta > 0.5:
                raise DomainError(f"beta must exceed 1/2, got {self.beta}")
            if not self.s.real > 1:
                raise DomainError(f"resolvent pair needs Re(s) > 1, got {self.s}")
        elif self.kind == "heat":
            if not self.t > 0:
                raise DomainError(f"heat pair needs t > 0, got {self.t}")
        else:
            raise DomainError(f"unknown test-function kind {self.kind!r}")

    @classmethod
    def resolvent(cls, s, beta: float = 1.5) -> "TestFunctionPair":
        return cls("resolvent", s=s, beta=beta)

    @classmethod
    def heat(cls, t: float) -> "TestFunctionPair":
        return cls("heat", t=t)

    @property
    def a(self) -> complex:
        """s - 1/2 for the resolvent pair."""
        return self.s - 0.5

    def h(self, r):
        """h as a function of the spectral parameter r (eigenvalue r^2 + 1/4)."""
        r = np.asarray(r, dtype=float)
        if self.kind == "heat":
            return np.exp(-(r * r + 0.25) * self.t)
        a2 = self.a * self.a
        b2 = self.beta**2
        r2 = r * r
        # written as one fraction so large r does not cancel
        return (b2 - a2) / ((r2 + a2) * (r2 + b2))

    def g(self, u):
        u = np.abs(np.asarray(u, dtype=float))
        if self.kind == "heat":
            return np.exp(-u * u / (4 * self.t) - self.t / 4) / math.sqrt(4 * math.pi * self.t)
        return np.exp(-self.a * u) / (2 * self.s - 1) - np.exp(-self.beta * u) / (2 * self.beta)

    def h_at_quarter(self) -> complex:
        """h at eigenvalue 1/4, i.e. r = 0."""
        return complex(self.h(0.0))

    def g0(self) -> complex:
        return complex(self.g(0.0))


# ---------------------------------------------------------------------------
# quadrature on the real line
# ---------------------------------------------------------------------------

_V_MAX = 40.0
_CUTOFF = 1e-17


def line_quadrature(
    f: Callable[[np.ndarray], np.ndarray],
    tol: float = 1e-12,
    scale: float = 1.0,
    r_max: float | None = None,
    step: float | None = None,
    max_levels: int = 8,
    half_line: bool = False,
) -> EvalResult:
    """int_{-inf}^{inf} f(r) dr with r = scale sinh(v) and a midpoint rule in v.

    With ``half_line`` the range is (0, inf) and r = scale e^v, which keeps
    integrands with a kink or a zero at r = 0 smooth in v.  With ``r_max``
    the range is truncated to |r| < r_max and mapped by tanh-sinh instead.
    ``f`` takes an array of r values.  The v-range is cut on each side
    where the mapped integrand drops below 1e-17 of its peak.
    With ``step`` set, a single rule of that step is returned; otherwise
    the step is halved until two levels agree to ``tol`` relative to the
    integral of |f|.
    """
    if r_max is not None:
        # finite range: tanh-sinh map onto (-r_max, r_max) or (0, r_max)
        v_lo, v_hi = -4.5, 4.5
        half = 0.5 * r_max if half_line else r_max
        shift = half if half_line else 0.0

        def mapped(v):
            u = 0.5 * np.pi * np.sinh(v)
            r = shift + half * np.tanh(u)
            return np.asarray(f(r)) * (half * 0.5 * np.pi * np.cosh(v) / np.cosh(u) ** 2)
    elif half_line:
        v_lo, v_hi = -_V_MAX, _V_MAX

        def mapped(v):
            r = scale * np.exp(v)
            return np.asarray(f(r)) * r
    else:
        v_lo, v_hi = -_V_MAX, _V_MAX

        def mapped(v):
            r = scale * np.sinh(v)
            return np.asarray(f(r)) * (scale * np.cosh(v))

    h0 = 0.25
    v = np.arange(v_lo + h0 / 2, v_hi, h0)
    with np.errstate(over="ignore", under="ignore"):
        vals = mapped(v)
    mag = np.abs(vals)
    if not np.all(np.isfinite(mag)):
        raise ConvergenceError("integrand is not finite on the quadrature grid")
    peak = float(mag.max()) if mag.size else 0.0
    if peak == 0.0:
        return EvalResult(0j, 0.0, "quadrature")
    big = np.nonzero(mag > _CUTOFF * peak)[0]
    lo = max(v_lo, float(v[big[0]]) - 2 * h0)
    hi = min(v_hi, float(v[big[-1]]) + 2 * h0)

    def rule(h):
        n = max(1, int(math.ceil((hi - lo) / h)))
        nodes = lo + (np.arange(n) + 0.5) * (hi - lo) / n
        hh = (hi - lo) / n
        with np.errstate(over="ignore", under="ignore"):
            vals = mapped(nodes)
        return complex(np.sum(vals) * hh), float(np.sum(np.abs(vals)) * hh)

    if step is not None:
        val, _ = rule(step)
        return EvalResult(val, math.nan, "quadrature")
    prev, _ = rule(h0)
    h = h0
    err = math.inf
    for _ in range(max_levels):
        h /= 2
        cur, l1 = rule(h)
        err = abs(cur - prev)
        if err <= tol * max(l1, 1e-300):
            return EvalResult(cur, err, "quadrature")
        prev = cur
    raise ConvergenceError(f"line quadrature did not reach tol={tol:g} (last gap {err:g})")


# ---------------------------------------------------------------------------
# scattering data
# ---------------------------------------------------------------------------

PROVIDER_GRID = tuple(0.5 + x + 1j * y for x in (0.15, 0.35, 0.8, 1.4) for y in (0.7, 2.0, 4.5, 8.0, 13.0))


@dataclass(frozen=True)
class ScatteringProvider:
    """Determinant of the scattering matrix, its log-derivative and K0 = tr Phi(1/2).

    ``heat_correction`` optionally supplies R(t), the inverse Laplace transform
    of -(2s-1)^{-1} phi'/phi(s) (see ``scattering_correction``), by a fast
    closed route; ``heat_correction_terms`` its small-t expansion as
    ``(p, j, c)`` for c t^{-p} log(t)^j.
    """

    phi: Callable[[complex], complex]
    phi_log_deriv: Callable[[complex], complex]
    K0: complex
    heat_correction: Callable[[float], float] | None = None
    heat_correction_terms: tuple[tuple[float, int, float], ...] | None = None
    name: str = ""
    symmetry_residual: float = field(default=0.0, compare=False)

    def __post_init__(self):
        worst = 0.0
        for s in PROVIDER_GRID:
            worst = max(worst, abs(self.phi(s) * self.phi(1 - s) - 1))
        if not worst < 1e-8:
            raise ValidationError(f"phi(s) phi(1-s) = 1 fails on the test grid (max deviation {worst:g})")
        object.__setattr__(self, "symmetry_residual", worst)


def _zeta_log_deriv(z: complex) -> complex:
    if abs(z - 1) < 0.5:
        # differentiate the entire (z - 1) zeta(z) so the stencil never meets the pole
        def f(e):
            w = z + e
            if abs(w - 1) < 1e-12:
                return 1.0 + EULER_GAMMA * (w - 1)
            return (w - 1) * sf.riemann_zeta(w).value

        d, _ = sf._richardson_derivative(f, 0.02)
        return d / f(0) - 1 / (z - 1)
    zeta = sf.riemann_zeta(z).value
    d, _ = sf._richardson_derivative(lambda e: sf.riemann_zeta(z + e).value, 0.02)
    return d / zeta


def _modular_log_phi(s) -> complex:
    s = complex(s)
    return (
        0.5 * math.log(math.pi)
        + sf.log_gamma(s - 0.5).value
        - sf.log_gamma(s).value
        + cmath.log(sf.riemann_zeta(2 * s - 1).value)
        - cmath.log(sf.riemann_zeta(2 * s).value)
    )


def _modular_phi(s) -> complex:
    return cmath.exp(_modular_log_phi(s))


def _modular_phi_log_deriv(s) -> complex:
    s = complex(s)
    if abs(s - 0.5) < 1e-6:
        # removable: the poles of psi(s - 1/2) and zeta'/zeta(2s) cancel at 1/2
        eps = 1e-3
        return sum(_modular_phi_log_deriv(s + eps * 1j**k) for k in range(4)) / 4
    return (
        sf.digamma(s - 0.5).value
        - sf.digamma(s).value
        + 2 * _zeta_log_deriv(2 * s - 1)
        - 2 * _zeta_log_deriv(2 * s)
    )


@functools.lru_cache(maxsize=8)
def _von_mangoldt(n_max: int) -> np.ndarray:
    """Lambda(n) for n = 0..n_max."""
    lam = np.zeros(n_max + 1)
    sieve = np.ones(n_max + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(math.isqrt(n_max)) + 1):
        if sieve[p]:
            sieve[p * p:: p] = False
    for p in np.nonzero(sieve)[0]:
        q = int(p)
        while q <= n_max:
            lam[q] = math.log(p)
            q *= int(p)
    return lam


_GL_X, _GL_W = np.polynomial.legendre.leggauss(80)


def _modular_heat_correction(t: float) -> float:
    """R(t) for phi(s) = sqrt(pi) Gamma(s-1/2) zeta(2s-1) / (Gamma(s) zeta(2s)).

    The Gamma ratio contributes (1/sqrt(pi)) int_0^inf e^{-x^2}/(1+e^{-sqrt(t) x}) dx,
    each zeta ratio a Gaussian-smoothed von Mangoldt sum.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    x = 3.5 * (_GL_X + 1)
    w = 3.5 * _GL_W
    gamma_part = float(np.sum(w * np.exp(-x * x) / (1 + np.exp(-math.sqrt(t) * x)))) / SQRT_PI
    n_max = int(math.exp(math.sqrt(48 * t))) + 2
    if n_max > 5_000_000:
        raise TailError(f"von Mangoldt sum for t={t} needs n up to {n_max}")
    lam = _von_mangoldt(n_max)
    n = np.arange(2, n_max + 1)
    ln = np.log(n)
    terms = lam[2:] * (1 - 1 / n) * np.exp(-ln * ln / t)
    dirichlet = math.fsum(terms) / math.sqrt(math.pi * t)
    return math.exp(-t / 4) * (gamma_part + dirichlet)


@functools.lru_cache(maxsize=1)
def modular_scattering_provider() -> ScatteringProvider:
    """phi(s) = sqrt(pi) Gamma(s - 1/2) zeta(2s - 1) / (Gamma(s) zeta(2s)) for PSL(2, Z), trivial chi."""
    return ScatteringProvider(
        phi=_modular_phi,
        phi_log_deriv=_modular_phi_log_deriv,
        K0=-1.0,
        heat_correction=_modular_heat_correction,
        # 1/(1 + e^{-y}) = 1/2 + y/4 + O(y^3) inside the Gamma-ratio integral
        heat_correction_terms=((0.0, 0, 0.25), (-0.5, 0, 1 / (8 * SQRT_PI))),
        name="PSL(2,Z) trivial",
    )


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            n //= p
            if n % p == 0:
                raise DomainError("level must be squarefree")
        p += 1
    if n > 1:
        out.append(n)
    return out


def gamma0_scattering_provider(n: int) -> ScatteringProvider:
    """Scattering determinant of Gamma_0(n), n squarefree, trivial chi.

    Classically Phi_n = phi_1 (x)_{p | n} M_p with det M_p = (p^{2-2s} - 1)/(p^{2s} - 1)
    and M_p(1/2) = I, so K0 = -2^r for r prime factors.  Measured in the
    width-one coordinate of the PSL(2, Z) cusp, as the induced-representation
    trace formula does, the determinant also gains W^{2s-1} with W = n^{2^{r-1}}
    the product of the cusp widths.
    """
    if n == 1:
        return modular_scattering_provider()
    primes = _prime_factors(n)
    cusps = 2 ** len(primes)
    logs = [math.log(p) for p in primes]
    log_w = cusps // 2 * math.log(n)

    def log_m(s, lp):
        return cmath.log(cmath.exp((2 - 2 * s) * lp) - 1) - cmath.log(cmath.exp(2 * s * lp) - 1)

    def phi(s):
        s = complex(s)
        return cmath.exp(cusps * _modular_log_phi(s) + cusps // 2 * sum(log_m(s, lp) for lp in logs) + (2 * s - 1) * log_w)

    def phi_log_deriv(s):
        s = complex(s)
        acc = cusps * _modular_phi_log_deriv(s) + 2 * log_w
        for lp in logs:
            a, b = cmath.exp((2 - 2 * s) * lp), cmath.exp(2 * s * lp)
            acc -= cusps // 2 * 2 * lp * (a / (a - 1) + b / (b - 1))
        return acc

    return ScatteringProvider(phi=phi, phi_log_deriv=phi_log_deriv, K0=-float(cusps), name=f"Gamma_0({n}) trivial")


# ---------------------------------------------------------------------------
# inverse Laplace transforms along a vertical line
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LaplaceInversionGrid:
    """Samples of G(q) on q = q0 + i y, y = 0, step, 2 step, ..., for

        X(t) = e^{-t/4} (1/pi) int_0^inf Re[e^{q^2 t} G(q)] dy,

    the heat function whose transform int_0^inf e^{-(q^2 - 1/4) t} X(t) dt
    equals G(q)/(2q).  G must be analytic for Re q >= q0 and real on the
    real axis.  The trapezoid rule is exponentially accurate here because
    the integrand is analytic in a strip around the line.
    """

    q0: float
    step: float
    values: np.ndarray

    @classmethod
    def sample(cls, G: Callable[[complex], complex], q0: float = 0.75, step: float = 0.02, y_max: float = 14.0):
        ys = np.arange(0.0, y_max + step / 2, step)
        vals = np.array([complex(G(q0 + 1j * y)) for y in ys])
        return cls(q0, step, vals)

    @property
    def y_max(self) -> float:
        return self.step * (len(self.values) - 1)

    def t_min(self, tol: float = 1e-12) -> float:
        """Smallest t whose truncation error stays below tol (relative to the peak of G)."""
        scale = max(1.0, float(np.abs(self.values).max()))
        # e^{(q0^2 - y_max^2) t} scale / (y_max t) < tol, solved crudely
        return (math.log(scale / tol) + 1.0) / (self.y_max**2 - self.q0**2)

    def heat(self, t: float, tol: float = 1e-12) -> EvalResult:
        if t < self.t_min(tol):
            raise TailError(f"contour grid truncated at y={self.y_max:g} is too short for t={t:g}")
        ys = self.step * np.arange(len(self.values))
        q = self.q0 + 1j * ys
        f = np.real(np.exp(q * q * t) * self.values)
        w = np.full(len(ys), self.step)
        w[0] = self.step / 2
        val = math.exp(-t / 4) * float(np.sum(w * f)) / math.pi
        # roundoff is amplified by the e^{q0^2 t} growth of the integrand
        err = math.exp(self.q0**2 * t) * 1e-15 * float(np.sum(w * np.abs(self.values)))
        return EvalResult(val, err, "quadrature")


# ---------------------------------------------------------------------------
# identity
# ---------------------------------------------------------------------------


def _area_factor(d: FuchsianDescriptor) -> float:
    """n |F| / 4 pi."""
    return d.rep_dim * d.area / (4 * math.pi)


def _identity_quadrature(tf: TestFunctionPair, d: FuchsianDescriptor) -> EvalResult:
    c = _area_factor(d)
    if tf.kind == "heat":
        c *= 2.0
    res = line_quadrature(lambda r: r * np.tanh(np.pi * r) * tf.h(r), scale=1.0)
    return EvalResult(c * res.value, c * res.abs_error_estimate, "quadrature")


def _identity_heat_split(tf: TestFunctionPair, d: FuchsianDescriptor) -> EvalResult:
    # r tanh(pi r) = |r| - 2|r|/(e^{2 pi |r|} + 1): the first part integrates to 1/t
    t = tf.t
    c = 2 * _area_factor(d)
    res = line_quadrature(lambda r: r * np.exp(-r * r * t - 2 * np.pi * r) / (1 + np.exp(-2 * np.pi * r)), half_line=True)
    val = c * math.exp(-t / 4) * (1 / t - 4 * res.value.real)
    return EvalResult(complex(val), 4 * c * res.abs_error_estimate, "quadrature")


def _series_with_tail(term, tail_coeffs, k_cut: int) -> complex:
    """sum_{k>=0} term(k + 1/2) as a direct head plus sum_m c_m zeta_H(m, k_cut + 1/2)."""
    x = np.arange(k_cut) + 0.5
    head = np.sum(term(x))
    tail = 0j
    for power, coeff in tail_coeffs:
        if coeff == 0:
            continue
        piece = coeff * sf.hurwitz_zeta(power, k_cut + 0.5).value
        tail += piece
        if abs(piece) < 1e-18 * max(1.0, abs(head)):
            break
    return complex(head) + tail


def _identity_residues(tf: TestFunctionPair, d: FuchsianDescriptor) -> EvalResult:
    """Residue series: -(n|F|/4) tan(pi a) + (n|F|/4) tan(pi beta) + G(s), a = s - 1/2,

    G(s) = -2 (n|F|/4 pi) sum_k [x/(a^2 - x^2) - x/(beta^2 - x^2)],  x = k + 1/2.

    At a tangent pole (s or beta + 1/2 an integer) the tangent is expanded into
    its own partial fractions and merged with G, giving
    2 (n|F|/4 pi) sum_k [1/(x + a) - 1/(x + beta)].
    """
    a, b = tf.a, tf.beta
    c = _area_factor(d)
    k_cut = int(max(64, 4 * max(abs(a), b)))
    m_terms = 60
    near_pole = abs(cmath.cos(math.pi * a)) < 1e-3 or abs(math.cos(math.pi * b)) < 1e-3
    if near_pole:
        coeffs = [(m + 1, (-a) ** m - (-b) ** m) for m in range(1, m_terms)]
        total = _series_with_tail(lambda x: 1 / (x + a) - 1 / (x + b), coeffs, k_cut)
        val = 2 * c * total
    else:
        coeffs = [(3 + 2 * m, b ** (2 * m + 2) - a ** (2 * m + 2)) for m in range(m_terms)]
        # x/(a^2-x^2) - x/(b^2-x^2) = x (b^2 - a^2)/((x^2-a^2)(x^2-b^2))
        total = _series_with_tail(
            lambda x: x * (b * b - a * a) / ((x * x - a * a) * (x * x - b * b)), coeffs, k_cut
        )
        g_s = -2 * c * total
        val = -math.pi * c * cmath.tan(math.pi * a) + math.pi * c * math.tan(math.pi * b) + g_s
    return EvalResult(complex(val), 1e-14 * (1 + abs(val)), "series")


def identity_term(
    tf: TestFunctionPair,
    d: FuchsianDescriptor,
    method: Literal["auto", "quadrature", "residue", "split"] = "auto",
    cross_check_tol: float = 1e-8,
) -> EvalResult:
    """Contribution of the identity, (n|F|/4 pi) int r tanh(pi r) h(r) dr (doubled for heat).

    ``auto`` evaluates the resolvent kind by quadrature and by the residue
    series and raises ConvergenceError if they disagree; the heat kind uses
    the split form, whose 1/t part is exact.
    """
    if tf.kind == "heat":
        if method in ("auto", "split"):
            return _identity_heat_split(tf, d)
        if method == "quadrature":
            return _identity_quadrature(tf, d)
        raise DomainError(f"method {method!r} is not available for the heat kind")
    if method == "quadrature":
        return _identity_quadrature(tf, d)
    if method == "residue":
        return _identity_residues(tf, d)
    if method != "auto":
        raise DomainError(f"method {method!r} is not available for the resolvent kind")
    q = _identity_quadrature(tf, d)
    r = _identity_residues(tf, d)
    gap = abs(q.value - r.value)
    if gap > cross_check_tol * max(1.0, abs(r.value)):
        raise ConvergenceError(f"identity term: quadrature and residue series differ by {gap:g}")
    return EvalResult(r.value, gap + r.abs_error_estimate, "series")


# ---------------------------------------------------------------------------
# elliptic
# ---------------------------------------------------------------------------


def _elliptic_weight(r: np.ndarray, m: int, nu: int) -> np.ndarray:
    """e^{-2 pi r m/nu} / (1 + e^{-2 pi r}) without overflow."""
    return np.exp(-2 * np.pi * r * m / nu - np.logaddexp(0.0, -2 * np.pi * r))


def elliptic_term(tf: TestFunctionPair, d: FuchsianDescriptor, step: float | None = None) -> EvalResult:
    """sum_R sum_{m=1}^{nu-1} tr chi(R^m) / (nu sin(pi m/nu)) int e^{-2pi r m/nu}/(1+e^{-2pi r}) h(r) dr,

    with a factor 1/2 for the resolvent kind.  ``step`` pins the quadrature
    step (used to compare refinement levels).
    """
    if not d.elliptic_orders:
        return EvalResult(0j, 0.0, "quadrature")
    pref = 0.5 if tf.kind == "resolvent" else 1.0
    total = 0j
    err = 0.0
    for nu, alphas in zip(d.elliptic_orders, d.elliptic_rep_angles):
        for m in range(1, nu):
            tr = elliptic_character(nu, alphas, m)
            if tr == 0:
                continue
            res = line_quadrature(lambda r: _elliptic_weight(r, m, nu) * tf.h(r), step=step)
            c = pref * tr / (nu * math.sin(math.pi * m / nu))
            total += c * res.value
            err += abs(c) * (0.0 if step else res.abs_error_estimate)
    return EvalResult(total, err, "quadrature")


def elliptic_at_zero(d: FuchsianDescriptor) -> complex:
    """E(t) at t = 0: sum_R sum_m tr chi(R^m) / (2 nu sin^2(pi m/nu))."""
    return sum(
        (
            elliptic_character(nu, alphas, m) / (2 * nu * math.sin(math.pi * m / nu) ** 2)
            for nu, alphas in zip(d.elliptic_orders, d.elliptic_rep_angles)
            for m in range(1, nu)
        ),
        0j,
    )


# ---------------------------------------------------------------------------
# parabolic
# ---------------------------------------------------------------------------


def _psi_one_plus_ir(r: np.ndarray) -> np.ndarray:
    return sf.digamma_array(1 + 1j * np.asarray(r, dtype=float))


def _parabolic_parts(tf: TestFunctionPair, d: FuchsianDescriptor, step=None) -> tuple[complex, complex, complex, float]:
    """(constant part, digamma integral part, h(1/4) part, quadrature error) for the resolvent scaling."""
    k = d.nonsingularity_degree
    c = zt.parabolic_constant(d)
    if k == 0 and c == 0:
        return 0j, 0j, 0j, 0.0
    first = -(k * math.log(2) + c) * tf.g0()
    second = 0j
    err = 0.0
    if k:
        # psi(1+ir) has even real part and odd imaginary part; h is even
        res = line_quadrature(lambda r: _psi_one_plus_ir(r).real * tf.h(r), step=step)
        second = -k / (2 * math.pi) * res.value
        err = k / (2 * math.pi) * (0.0 if step else res.abs_error_estimate)
    third = k / 4 * tf.h_at_quarter()
    return first, second, third, err


def parabolic_term(tf: TestFunctionPair, d: FuchsianDescriptor, step: float | None = None) -> EvalResult:
    """-(k ln 2 + c) g(0) - (k/2 pi) int psi(1+ir) h(r) dr + (k/4) h(1/4), doubled for heat.

    For the heat kind the three pieces are P1, P2 and P3.
    """
    first, second, third, err = _parabolic_parts(tf, d, step)
    total = first + second + third
    if tf.kind == "heat":
        return EvalResult(2 * total, 2 * err, "quadrature")
    return EvalResult(total, err, "quadrature")


def parabolic_heat_pieces(t: float, d: FuchsianDescriptor) -> dict[str, float]:
    """P1(t), P2(t), P3(t) separately."""
    first, second, third, _ = _parabolic_parts(TestFunctionPair.heat(t), d)
    return {"P1": 2 * second.real, "P2": 2 * first.real, "P3": 2 * third.real}


# ---------------------------------------------------------------------------
# hyperbolic
# ---------------------------------------------------------------------------


def heat_tail_bound(t: float, norm_max: float, dim: int) -> float:
    """Bound on the heat hyperbolic sum over classes with N(P) > norm_max.

    With at most 2 N / log N classes below N the omitted part is at most
    2 dim erfc((log X - t) / (2 sqrt t)).
    """
    x = (math.log(norm_max) - t) / (2 * math.sqrt(t))
    return 2.0 * dim * math.erfc(x)


@dataclass(frozen=True)
class GeodesicData:
    """Norms and chi-eigenvalues of a list of classes, prepared once for repeated heat sums."""

    logn: np.ndarray
    eig: np.ndarray
    norm_max: float
    dim: int

    @classmethod
    def from_classes(cls, classes, rep: InducedRep, eigenvalues=None, norm_max: float | None = None) -> "GeodesicData":
        if not classes:
            raise TailError("no geodesic classes supplied")
        data = zt._prepare(classes, rep, eigenvalues)
        top = float(norm_max if norm_max is not None else data.norms.max())
        return cls(data.logn, data.eig, top, rep.dim)


def _hyperbolic_heat(t, geo: GeodesicData, tail_tol) -> EvalResult:
    tail = heat_tail_bound(t, geo.norm_max, geo.dim)
    if tail > tail_tol:
        raise TailError(f"classes up to norm {geo.norm_max:g} leave a tail of {tail:.2g} at t={t:g}")
    live = geo.logn**2 < 4 * t * 745.0
    logn = geo.logn[live]
    eig = geo.eig[live]
    total = 0.0
    if logn.size:
        k_max = int(math.ceil(math.sqrt(4 * t * 745.0) / logn.min()))
        for k in range(1, k_max + 1):
            kl = k * logn
            keep = kl * kl < 4 * t * 745.0
            if not keep.any():
                break
            tr = (eig[keep] ** k).sum(axis=1).real
            w = logn[keep] / (np.exp(kl[keep] / 2) - np.exp(-kl[keep] / 2))
            total += float(np.sum(tr * w * np.exp(-kl[keep] ** 2 / (4 * t))))
    pref = math.exp(-t / 4) / math.sqrt(math.pi * t)
    return EvalResult(complex(pref * total), tail + 1e-15 * abs(pref * total), "series")


def _geodesic_data(classes, rep, norm_max, eigenvalues) -> GeodesicData:
    if isinstance(classes, GeodesicData):
        return classes
    return GeodesicData.from_classes(classes, rep, eigenvalues, norm_max)


def hyperbolic_term(
    tf: TestFunctionPair,
    classes,
    rep: InducedRep,
    norm_max: float | None = None,
    tail_tol: float = 1e-12,
    eigenvalues=None,
) -> EvalResult:
    """Hyperbolic contribution: the geodesic sum for either kind (doubled for heat)."""
    if tf.kind == "resolvent":
        return zt.hyperbolic_resolvent_term(tf.s, tf.beta, classes, rep, norm_max, eigenvalues)
    return _hyperbolic_heat(tf.t, _geodesic_data(classes, rep, norm_max, eigenvalues), tail_tol)


# ---------------------------------------------------------------------------
# continuous spectrum
# ---------------------------------------------------------------------------


def continuous_term(tf: TestFunctionPair, sp: ScatteringProvider, r_max: float | None = None) -> EvalResult:
    """C1 = -(1/2 pi) int phi'/phi(1/2 + ir) h(r) dr (doubled form for both kinds).

    The integrand is evaluated pointwise through the provider.  The heat
    kind is cut where the Gaussian is below 1e-20; the resolvent kind at
    ``r_max`` (default 60), whose tail is added to the error estimate.
    """
    if tf.kind == "heat":
        cut = math.sqrt(46.0 / tf.t) if r_max is None else r_max
        tail = 0.0
    else:
        cut = 60.0 if r_max is None else r_max
        # |phi'/phi| grows like 4 log r on the line
        tail = (1 + 4 * math.log(cut)) * abs(tf.beta**2 - tf.a**2) / (3 * math.pi * cut**3)

    def f(r):
        return np.array([sp.phi_log_deriv(0.5 + 1j * x).real for x in r]) * tf.h(r)

    res = line_quadrature(f, tol=1e-10, r_max=cut)
    val = -res.value / (2 * math.pi)
    return EvalResult(val, res.abs_error_estimate / (2 * math.pi) + tail, "quadrature")


def scattering_correction(t: float, sp: ScatteringProvider, grid: LaplaceInversionGrid | None = None) -> EvalResult:
    """R(t), the heat function with transform -(2s-1)^{-1} phi'/phi(s).

    C1(t) equals the resonance sum over S2 minus the sum over S3 only up to
    R(t), so sum_{S1 u S2 u S3'} e^{-sigma(1-sigma)t} is theta(t) - R(t).
    The provider's closed form is used when available, else the contour
    grid (which must sample G(q) = -phi'/phi(1/2 + q)).
    """
    if sp.heat_correction is not None and grid is None:
        return EvalResult(complex(sp.heat_correction(t)), 1e-13, "series")
    if grid is None:
        raise DomainError("provider has no closed heat correction; pass a LaplaceInversionGrid")
    return grid.heat(t)


# ---------------------------------------------------------------------------
# heat trace
# ---------------------------------------------------------------------------


def _check_t(t: float):
    if not T_MIN <= t <= T_MAX:
        raise DomainError(f"t must lie in [{T_MIN:g}, {T_MAX:g}], got {t}")


def heat_theta_geometric(
    t: float,
    d: FuchsianDescriptor,
    classes,
    rep: InducedRep,
    sp: ScatteringProvider,
    norm_max: float | None = None,
    tail_tol: float = 1e-12,
    eigenvalues=None,
    hyperbolic: EvalResult | None = None,
) -> EvalResult:
    """theta(t) = I(t) + H(t) + E(t) + P1(t) + P2(t) + P3(t) - C2(t),  C2 = (K0/2) e^{-t/4}.

    H(t) is the geodesic sum; TailError if the classes do not reach far
    enough for this t.  ``classes`` may be a prepared ``GeodesicData``.  A precomputed ``hyperbolic`` value (for instance
    from a contour inversion) replaces the geodesic sum.
    """
    _check_t(t)
    if hyperbolic is None:
        hyperbolic = _hyperbolic_heat(t, _geodesic_data(classes, rep, norm_max, eigenvalues), tail_tol)
    return _theta_from_parts(t, d, sp, hyperbolic)


def _theta_from_parts(t: float, d: FuchsianDescriptor, sp: ScatteringProvider, hyperbolic: EvalResult) -> EvalResult:
    tf = TestFunctionPair.heat(t)
    parts = [identity_term(tf, d), elliptic_term(tf, d), parabolic_term(tf, d), hyperbolic]
    c2 = 0.5 * complex(sp.K0) * math.exp(-t / 4)
    value = sum((p.value for p in parts), 0j) - c2
    err = sum(p.abs_error_estimate for p in parts)
    return EvalResult(complex(value.real, 0.0) if abs(value.imag) < 1e-12 else value, err, "quadrature")


# ---------------------------------------------------------------------------
# small-t asymptotics
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=1)
def digamma_log_constant() -> float:
    """G1 = int_{-inf}^{inf} [Re psi(1+ir) - log(1+r^2)/2] dr."""
    cut = 40.0
    res = line_quadrature(lambda r: _psi_one_plus_ir(r).real - 0.5 * np.log1p(r * r), tol=1e-13, r_max=cut)
    # beyond the cut the integrand is sum_k (-1)^k (1 - B_2k)/(2k) r^{-2k}
    tail = sum((-1) ** k * (1 - sf.bernoulli(2 * k)) / (2 * k) * cut ** (1 - 2 * k) / (2 * k - 1) for k in range(1, 8))
    return res.value.real + 2 * tail


def theta_asymptotics(
    d: FuchsianDescriptor,
    sp: ScatteringProvider,
    corrected: bool = False,
    next_order: bool = False,
) -> AsymptoticCoefficients:
    """Exact alpha, beta, gamma, delta of theta(t) as t -> 0.

    I gives A/t - A/3 (A = n|F|/2 pi), E gives E(0), P1 gives the log t/sqrt t
    and part of the 1/sqrt t coefficient plus -k - k G1/pi, P2 the rest of
    1/sqrt t, P3 - C2 gives (k - K0)/2.

    ``next_order`` adds the sqrt(t) log t and sqrt(t) terms (from the
    e^{-t/4} factor of P1, P2 and the 1/r^2 tail of Re psi(1+ir)), leaving an
    O(t) remainder.  ``corrected`` subtracts the provider's expansion of R(t),
    giving the coefficients of theta - R.
    """
    area = d.rep_dim * d.area / (2 * math.pi)
    k = d.nonsingularity_degree
    c = zt.parabolic_constant(d)
    half = (EULER_GAMMA + 2 * math.log(2)) / 2
    alpha = area
    beta = k / (2 * SQRT_PI)
    gamma = k * half / SQRT_PI - (k * math.log(2) + c) / SQRT_PI
    e0 = elliptic_at_zero(d).real
    delta = -area / 3 + e0 + k / 2 - complex(sp.K0).real / 2 - k - k * digamma_log_constant() / math.pi
    terms: dict[tuple[float, int], float] = {}
    if next_order and k:
        terms[(-0.5, 1)] = -k / (8 * SQRT_PI)
        terms[(-0.5, 0)] = k * (1 / 6 - half / 4) / SQRT_PI + (k * math.log(2) + c) / (4 * SQRT_PI)
    if corrected:
        if sp.heat_correction_terms is None:
            raise DomainError("provider has no small-t expansion of its heat correction")
        for p, j, coef in sp.heat_correction_terms:
            if (p, j) == (0.0, 0):
                delta -= coef
            elif next_order or p > 0:
                terms[(p, j)] = terms.get((p, j), 0.0) - coef
    extra = tuple((p, j, v) for (p, j), v in terms.items() if v != 0.0)
    return AsymptoticCoefficients(alpha, beta, gamma, delta, extra=extra)


def fit_small_t(samples: Sequence[tuple[float, float]], cond_max: float = 1e12) -> AsymptoticCoefficients:
    """Least squares fit of theta(t) ~ alpha/t + beta log t/sqrt t + gamma/sqrt t + delta."""
    if len(samples) < 8:
        raise DomainError(f"need at least 8 samples, got {len(samples)}")
    t = np.array([float(p[0]) for p in samples])
    y = np.array([float(p[1]) for p in samples])
    if np.any(t <= 0) or t.max() > 0.1 or t.max() / t.min() < 100:
        raise DomainError("samples must lie in (0, 0.1] and span two decades")
    design = np.column_stack([1 / t, np.log(t) / np.sqrt(t), 1 / np.sqrt(t), np.ones_like(t)])
    cond = np.linalg.cond(design)
    if not cond <= cond_max:
        raise IllConditionedError(f"design matrix condition number {cond:.3g} exceeds {cond_max:g}")
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.sqrt(np.mean((design @ coef - y) ** 2)))
    return AsymptoticCoefficients(*(float(c) for c in coef), fit_residual=resid)
