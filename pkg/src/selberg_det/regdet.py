"""Zeta-regularized determinants.

Closed forms for the two model operators:

* ``H1``: the shifted harmonic oscillator with spectrum 0, 1, 2, ...
* ``L2``: sqrt(Delta_sphere + 1/4) - 1/2 with spectrum l of multiplicity 2l+1

plus a generic Mellin-transform route that turns a heat trace
theta(t) = sum exp(-mu t) into

    zeta(w, s) = sum (mu - s(1-s))^{-w},    det = exp(-d/dw zeta(w, s) at w=0).

The Mellin route splits theta into a small-t model and a remainder f(t).
The model is integrated in closed form; f is integrated numerically.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

from scipy import integrate

from . import specfun as sf
from .errors import ConvergenceError, DomainError, PoleError
from .specfun import EvalResult

__all__ = [
    "AsymptoticCoefficients",
    "SpectralZetaConfig",
    "det_harmonic",
    "log_det_harmonic",
    "det_sphere",
    "log_det_sphere",
    "log_det_sphere_zeta_path",
    "spectral_zeta_mellin",
    "det_from_spectral_zeta",
    "log_det_from_spectral_zeta",
    "harmonic_heat_trace",
    "sphere_heat_trace",
    "harmonic_remainder",
    "sphere_remainder",
    "HARMONIC_COEFFS",
    "SPHERE_COEFFS",
]

SQRT_2PI = math.sqrt(2.0 * math.pi)
LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class AsymptoticCoefficients:
    """Small-t model  alpha/t + beta log(t)/sqrt(t) + gamma/sqrt(t) + delta.

    ``extra`` holds further terms as ``(p, j, c)`` meaning ``c t^{-p} log(t)^j``
    with ``j`` in {0, 1}.  It is needed for heat traces whose leading power
    is not 1/t (the sphere has 2/t^2).
    """

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0
    fit_residual: float = 0.0
    extra: tuple[tuple[float, int, float], ...] = ()

    def __post_init__(self):
        vals = [self.alpha, self.beta, self.gamma, self.delta, self.fit_residual]
        vals += [c for _, _, c in self.extra]
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("asymptotic coefficients must be finite")
        if self.fit_residual < 0:
            raise DomainError("fit_residual must be >= 0")
        for p, j, _ in self.extra:
            if j not in (0, 1) or p >= 2.5:
                raise DomainError(f"unsupported extra term t^-{p} log^{j}")

    def terms(self) -> list[tuple[float, int, float]]:
        out = [(1.0, 0, self.alpha), (0.5, 1, self.beta), (0.5, 0, self.gamma), (0.0, 0, self.delta)]
        out += list(self.extra)
        return [t for t in out if t[2] != 0.0]

    def model(self, t: float) -> float:
        lt = math.log(t)
        return sum(c * t ** (-p) * (lt if j else 1.0) for p, j, c in self.terms())


@dataclass(frozen=True)
class SpectralZetaConfig:
    """Integration strategy for the Mellin representation."""

    mellin_abscissa_split: float = 1.0
    quad_rel_tol: float = 1e-12
    subtraction_terms: AsymptoticCoefficients | None = None
    diff_step: float = 0.02
    t_floor: float = 0.0

    def __post_init__(self):
        if not self.mellin_abscissa_split > 0:
            raise DomainError("t0 must be positive")
        if not 0 < self.quad_rel_tol <= 1e-4:
            raise DomainError("quad_rel_tol must lie in (0, 1e-4]")
        if not 0 <= self.t_floor < self.mellin_abscissa_split:
            raise DomainError("t_floor must lie in [0, t0)")


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def log_det_harmonic(lam) -> complex:
    """log det(H1 + lambda) = (1/2) log 2 pi - log Gamma(lambda)."""
    return 0.5 * LOG_2PI - sf.log_gamma(lam).value


def det_harmonic(lam) -> complex:
    """det(H1 + lambda) = sqrt(2 pi) / Gamma(lambda); exactly 0 at 0, -1, -2, ..."""
    lam = complex(lam)
    if lam.imag == 0 and lam.real <= 0 and lam.real == math.floor(lam.real):
        return 0j
    return cmath.exp(log_det_harmonic(lam))


def log_det_sphere(s) -> complex:
    """log det(L2 + s) = -(s + 1/2) log 2 pi + log Gamma(s) - 2 log Gamma_2(s)."""
    s = complex(s)
    if s.real <= 0:
        raise DomainError(f"det_sphere needs Re(s) > 0, got {s}")
    return -(s + 0.5) * LOG_2PI + sf.log_gamma(s).value - 2.0 * sf.log_barnes_gamma2(s).value


def det_sphere(s) -> complex:
    """det(L2 + s) from the Barnes double gamma closed form."""
    return cmath.exp(log_det_sphere(s))


def log_det_sphere_zeta_path(s) -> complex:
    """log det(L2 + s) = -d/dz Z(z, s) at z = 0 with Z = 2 zeta_2 - zeta_1.

    The derivative is taken directly from the Barnes zeta values, without
    passing through Gamma or Gamma_2.
    """
    s = complex(s)
    if s.real <= 0:
        raise DomainError(f"det_sphere needs Re(s) > 0, got {s}")

    def big_z(z):
        return 2.0 * sf.barnes_zeta2(z, s).value - sf.hurwitz_zeta(z, s).value

    d, _ = sf._richardson_derivative(big_z, sf._PSI_STEP)
    return -d


# ---------------------------------------------------------------------------
# model heat traces
# ---------------------------------------------------------------------------


def harmonic_heat_trace(t: float) -> float:
    """sum_{n>=0} exp(-n t) = 1 / (1 - exp(-t))."""
    return -1.0 / math.expm1(-t)


def sphere_heat_trace(t: float) -> float:
    """sum_{l>=0} (2l+1) exp(-l t)."""
    em = math.expm1(-t)
    return (2.0 + em) / (em * em)


# 1/(1 - e^{-t}) = 1/t + 1/2 + sum_k b_k t^{2k-1},  b_k = B_{2k}/(2k)!
_SERIES_TERMS = 8


def harmonic_remainder(t: float) -> float:
    """1/(1 - e^{-t}) - 1/t - 1/2 without cancellation."""
    if t < 0.5:
        return sum(b * t ** (2 * k - 1) for k, b in enumerate(sf._EM_COEF[:_SERIES_TERMS], 1))
    return harmonic_heat_trace(t) - 1.0 / t - 0.5


def sphere_remainder(t: float) -> float:
    """sphere_heat_trace(t) - 2/t^2 - 1/t - 1/3 without cancellation.

    With g = 1/(1 - e^{-t}) the sphere trace is g - 2 g'.
    """
    if t < 0.5:
        acc = 0.0
        for k, b in enumerate(sf._EM_COEF[:_SERIES_TERMS], 1):
            acc += b * t ** (2 * k - 1)
            if k >= 2:
                acc -= 2.0 * b * (2 * k - 1) * t ** (2 * k - 2)
        return acc
    return sphere_heat_trace(t) - 2.0 / t**2 - 1.0 / t - 1.0 / 3.0


HARMONIC_COEFFS = AsymptoticCoefficients(alpha=1.0, delta=0.5)
SPHERE_COEFFS = AsymptoticCoefficients(alpha=1.0, delta=1.0 / 3.0, extra=((2.0, 0, 2.0),))


# ---------------------------------------------------------------------------
# Mellin route
# ---------------------------------------------------------------------------


def _closed_mellin(p: float, j: int, a: complex, w: complex) -> complex:
    """(1/Gamma(w)) int_0^inf t^{-p} log(t)^j e^{-a t} t^{w-1} dt, continued in w."""
    if sf._is_nonpositive_integer(complex(w - p)):
        raise PoleError("Mellin term at a Gamma pole")
    if sf._is_nonpositive_integer(complex(w)):
        # 1/Gamma(w) vanishes while Gamma(w - p) stays finite
        return 0j
    g = cmath.exp(sf.log_gamma(w - p).value - sf.log_gamma(w).value)
    base = g * cmath.exp((p - w) * cmath.log(a))
    if j == 0:
        return base
    return base * (sf.digamma(w - p).value - cmath.log(a))


def _closed_part(coeffs: AsymptoticCoefficients, a: complex, w: complex) -> complex:
    return sum((c * _closed_mellin(p, j, a, w) for p, j, c in coeffs.terms()), 0j)


def _quad_complex(fn, lo, hi, rtol, limit=400):
    opts = dict(epsabs=1e-15, epsrel=rtol, limit=limit)
    re, e1 = integrate.quad(lambda x: fn(x).real, lo, hi, **opts)
    im, e2 = integrate.quad(lambda x: fn(x).imag, lo, hi, **opts)
    return complex(re, im), e1 + e2


def _check_s(s: complex) -> complex:
    a = s * (s - 1.0)
    if not a.real > 0:
        raise DomainError(f"Mellin route needs Re(s(s-1)) > 0, got s={s}")
    return a


def _remainder_integral(theta, coeffs, remainder, a, w, cfg) -> tuple[complex, float]:
    """int_0^inf f(t) e^{-a t} t^{w-1} dt with f = theta - model."""
    t0 = cfg.mellin_abscissa_split
    t_end = max(t0 * 2.0, 16.0 * math.log(10.0) / a.real + t0)
    floor = cfg.t_floor

    if remainder is None:
        def f(t):
            return theta(t) - coeffs.model(t)
    else:
        f = remainder

    # (0, t0] with t = u^2; below the floor f is taken as 0
    def lower(u):
        t = u * u
        return 2.0 * f(t) * u ** (2.0 * w - 1.0) * cmath.exp(-a * t)

    def upper(t):
        return f(t) * t ** (w - 1.0) * cmath.exp(-a * t)

    i1, e1 = _quad_complex(lower, math.sqrt(floor), math.sqrt(t0), cfg.quad_rel_tol)
    i2, e2 = _quad_complex(upper, t0, t_end, cfg.quad_rel_tol)
    return i1 + i2, e1 + e2


def spectral_zeta_mellin(
    theta: Callable[[float], float],
    coeffs: AsymptoticCoefficients,
    w,
    s,
    cfg: SpectralZetaConfig | None = None,
    remainder: Callable[[float], float] | None = None,
) -> EvalResult:
    """zeta(w, s) = (1/Gamma(w)) int_0^inf theta(t) e^{s(1-s)t} t^{w-1} dt.

    ``theta`` should be O(1) as t grows.  The remainder f = theta - model must
    be O(t^eps) as t -> 0 for the requested w; for f = O(sqrt(t) log t) this
    holds when Re w > -1/2.  ``remainder`` may supply f directly when the
    subtraction theta - model would cancel badly near t = 0.
    """
    cfg = cfg or SpectralZetaConfig()
    w = complex(w)
    if w.imag != 0:
        raise DomainError("only real w is supported by the quadrature backend")
    if w.real <= -0.5:
        raise DomainError(f"Re(w) must exceed -1/2, got {w}")
    wr = w.real
    a = _check_s(complex(s))
    closed = _closed_part(coeffs, a, wr)
    if wr == 0:
        return EvalResult(closed, 1e-15 * abs(closed), "quadrature")
    integral, qerr = _remainder_integral(theta, coeffs, remainder, a, wr, cfg)
    rg = 1.0 / sf.gamma(wr)
    value = closed + rg * integral
    err = abs(rg) * qerr + 1e-15 * abs(value)
    if not math.isfinite(err) or err > 1e-3 * max(1.0, abs(value)):
        raise ConvergenceError(f"Mellin quadrature did not converge (err={err:g})")
    return EvalResult(value, err, "quadrature")


def log_det_from_spectral_zeta(
    theta: Callable[[float], float],
    coeffs: AsymptoticCoefficients,
    s,
    cfg: SpectralZetaConfig | None = None,
    remainder: Callable[[float], float] | None = None,
) -> EvalResult:
    """-d/dw zeta(w, s) at w = 0.

    Since 1/Gamma(w) = w + O(w^2), the remainder integral contributes exactly
    its value at w = 0; only the closed model part is differentiated, by
    complex-step Richardson extrapolation.
    """
    cfg = cfg or SpectralZetaConfig()
    a = _check_s(complex(s))
    d_closed, rerr = sf._richardson_derivative(lambda w: _closed_part(coeffs, a, w), cfg.diff_step)
    integral, qerr = _remainder_integral(theta, coeffs, remainder, a, 0.0, cfg)
    if not math.isfinite(qerr) or qerr > 1e-3 * max(1.0, abs(integral)):
        raise ConvergenceError(f"Mellin quadrature did not converge (err={qerr:g})")
    value = -(d_closed + integral)
    return EvalResult(value, rerr + qerr + 1e-14 * abs(value), "quadrature")


def det_from_spectral_zeta(
    theta: Callable[[float], float],
    coeffs: AsymptoticCoefficients,
    s,
    cfg: SpectralZetaConfig | None = None,
    remainder: Callable[[float], float] | None = None,
) -> complex:
    """det(A - s(1-s)) = exp(-zeta'(0, s)) for the spectrum encoded by theta."""
    return cmath.exp(log_det_from_spectral_zeta(theta, coeffs, s, cfg, remainder).value)
