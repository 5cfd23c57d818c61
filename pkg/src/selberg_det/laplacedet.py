"""Regularized determinant of the automorphic Laplacian.

Factorized path:

    det(A - s(1-s)) = e^{c1 s(s-1) + c2} (s - 1/2)^{-K0} phi(s) Z_I^2 Z_E^2 Z_P^2 Z^2.

Spectral path: exp(-d/dw zeta(w, s)|_{w=0}) with zeta the Mellin transform
of the heat trace over S1 u S2 u S3', which is theta(t) - R(t) where theta
is the geometric side and R the scattering correction (see
``traceformula.scattering_correction``).

The heat trace is built from three pieces: the geodesic sum for small t,
a contour inversion of 2 Z'/Z(1/2 + q) (Z from the transfer operator) for
moderate t, and its limit, the order of the zero of Z at s = 1, for large t.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import geodesics as geo
from . import groupdata as gd
from . import regdet as rd
from . import traceformula as tf
from . import transferop as to
from . import zetas as zt
from .errors import ConvergenceError, DomainError, PoleError
from .groupdata import FuchsianDescriptor, InducedRep, SubgroupDescriptor
from .regdet import AsymptoticCoefficients, SpectralZetaConfig
from .specfun import EvalResult
from .traceformula import ScatteringProvider

__all__ = [
    "DetAssemblyConfig",
    "SpectralHeatTrace",
    "selberg_zeta_branch",
    "factorized_parts",
    "assemble",
    "det_automorphic_factorized",
    "log_det_automorphic_spectral",
    "det_automorphic_spectral",
    "fit_constants",
    "functional_eq_residual",
    "goaway_exponents",
    "goaway_assembly",
    "commensurability_side",
    "commensurability_elementary",
]


@dataclass(frozen=True)
class DetAssemblyConfig:
    """Constants and truncation choices of the factorized determinant.

    ``zp_power`` is the power of (s - 1/2) per unit of k inside Z_P; the
    displayed Z_P has -1/2.
    """

    c1: float = 0.0
    c2: float = 0.0
    fit_window: tuple[float, float] = (2.0, 6.0)
    degree: int = to.DEFAULT_DEGREE
    euler_min: float = 1.2
    k_max: int = 20
    zp_power: float = -0.5

    def __post_init__(self):
        if not (math.isfinite(self.c1) and math.isfinite(self.c2)):
            raise DomainError("c1 and c2 must be finite")
        lo, hi = self.fit_window
        if not 1 < lo < hi:
            raise DomainError(f"fit window must lie in (1, inf), got {self.fit_window}")


# ---------------------------------------------------------------------------
# factorized path
# ---------------------------------------------------------------------------


def selberg_zeta_branch(
    s, sub: SubgroupDescriptor, rep: InducedRep, classes, cfg: DetAssemblyConfig, norm_max=None
) -> tuple[EvalResult, str]:
    """Z(s) from the Euler product when Re s > euler_min and classes are given, else the transfer operator."""
    s = complex(s)
    if s.real > cfg.euler_min and classes:
        return zt.selberg_zeta_euler(s, classes, rep, cfg.k_max, norm_max), "euler"
    return to.zeta_via_transfer(s, sub, rep, cfg.degree), "transfer"


def _log_z_parabolic(s: complex, d: FuchsianDescriptor, cfg: DetAssemblyConfig) -> complex:
    k = d.nonsingularity_degree
    out = zt.log_zeta_parabolic(s, d)
    if k and cfg.zp_power != -0.5:
        out += k * (cfg.zp_power + 0.5) * cmath.log(s - 0.5)
    return out


def factorized_parts(
    s,
    sub: SubgroupDescriptor,
    classes,
    rep: InducedRep,
    sp: ScatteringProvider,
    cfg: DetAssemblyConfig | None = None,
    norm_max=None,
) -> dict:
    """Logarithms of the displayed factors (without the e^{c1 s(s-1) + c2} factor)."""
    cfg = cfg or DetAssemblyConfig()
    s = complex(s)
    d = gd.fuchsian_from_subgroup(sub)
    k0 = complex(sp.K0)
    if s == 0.5 and (k0 != 0 or d.nonsingularity_degree):
        raise PoleError("the factorized determinant has a pole or branch point at s = 1/2")
    z, branch = selberg_zeta_branch(s, sub, rep, classes, cfg, norm_max)
    if z.value == 0:
        raise PoleError(f"Z vanishes at s = {s}")
    parts = {
        "pole": -k0 * cmath.log(s - 0.5) if k0 else 0j,
        "phi": cmath.log(sp.phi(s)),
        "identity": 2 * zt.log_zeta_identity(s, d),
        "elliptic": 2 * zt.log_zeta_elliptic(s, d),
        "parabolic": 2 * _log_z_parabolic(s, d, cfg),
        "selberg": 2 * cmath.log(z.value),
    }
    return {"s": s, "log": parts, "zeta_rel_error": z.abs_error_estimate / abs(z.value), "branch": branch}


def assemble(parts: dict, cfg: DetAssemblyConfig | None = None) -> EvalResult:
    """e^{c1 s(s-1) + c2} times the cached factors."""
    cfg = cfg or DetAssemblyConfig()
    s = parts["s"]
    log_total = cfg.c1 * s * (s - 1) + cfg.c2 + sum(parts["log"].values(), 0j)
    value = cmath.exp(log_total)
    # Z enters squared
    return EvalResult(value, abs(value) * 2 * parts["zeta_rel_error"], parts["branch"])


def det_automorphic_factorized(
    s,
    sub: SubgroupDescriptor,
    classes,
    rep: InducedRep,
    sp: ScatteringProvider,
    cfg: DetAssemblyConfig | None = None,
    norm_max=None,
) -> EvalResult:
    return assemble(factorized_parts(s, sub, classes, rep, sp, cfg, norm_max), cfg)


# ---------------------------------------------------------------------------
# spectral path
# ---------------------------------------------------------------------------


def _selberg_log_derivative(s: complex, sub, rep, degree: int, h: float = 1e-3) -> complex:
    """Z'/Z(s) from the transfer determinant by a five-point stencil."""

    def z(x):
        return to.fredholm_det(to.build_operator(x, sub, rep, degree, cross_check=False)).value

    d = (-z(s + 2 * h) + 8 * z(s + h) - 8 * z(s - h) + z(s - 2 * h)) / (12 * h)
    return d / z(s)


@dataclass
class SpectralHeatTrace:
    """theta(t) - R(t) on (0, inf) for a subgroup with trivial or induced chi.

    ``t_switch`` separates the geodesic sum from the contour inversion of
    2 Z'/Z; beyond ``t_limit`` the trace is replaced by its limit m0, the
    order of the zero of Z at s = 1 (eigenvalue 0).  Construction checks
    the two routes against each other on ``overlap`` and the limit at
    ``t_limit``; ConvergenceError if either gap exceeds ``match_tol``.
    """

    sub: SubgroupDescriptor
    sp: ScatteringProvider
    norm_max: float = 1e6
    degree: int = 24
    t_switch: float = 1.0
    t_limit: float = 4.0
    overlap: tuple[float, ...] = (0.6, 0.8, 1.0)
    match_tol: float = 1e-7
    step: float = 0.04
    y_max: float = 14.0
    q0: float = 0.75
    d: FuchsianDescriptor = field(init=False)
    rep: InducedRep = field(init=False)
    geodata: tf.GeodesicData = field(init=False)
    grid: tf.LaplaceInversionGrid = field(init=False)
    m0: int = field(init=False)
    coeffs: AsymptoticCoefficients = field(init=False)
    limit_gap: float = field(init=False)
    overlap_gap: float = field(init=False)
    _cache: dict = field(init=False, default_factory=dict, repr=False)

    def __post_init__(self):
        self.d = gd.fuchsian_from_subgroup(self.sub)
        # cheap precondition first: the provider must carry the small-t terms of R
        self.coeffs = tf.theta_asymptotics(self.d, self.sp, corrected=True, next_order=True)
        self.rep = gd.build_induced_rep(self.sub)
        classes = geo.enumerate_classes(self.norm_max)
        self.geodata = tf.GeodesicData.from_classes(classes, self.rep, norm_max=self.norm_max)
        self.grid = tf.LaplaceInversionGrid.sample(
            lambda q: 2 * _selberg_log_derivative(0.5 + q, self.sub, self.rep, self.degree),
            q0=self.q0,
            step=self.step,
            y_max=self.y_max,
        )
        eps = 1e-3
        order = (eps * _selberg_log_derivative(1 + eps, self.sub, self.rep, self.degree, h=1e-4)).real
        if abs(order - round(order)) > 0.05:
            raise ConvergenceError(f"order of the zero of Z at s = 1 is unclear ({order:.4f})")
        self.m0 = int(round(order))
        self.overlap_gap = max(
            abs(self._hyperbolic_geodesic(t) - self.grid.heat(t).value.real) for t in self.overlap
        )
        if self.overlap_gap > self.match_tol:
            raise ConvergenceError(f"geodesic and contour heat traces differ by {self.overlap_gap:.3g}")
        self.limit_gap = abs(self._evaluate(self.t_limit) - self.m0)
        if self.limit_gap > self.match_tol:
            raise ConvergenceError(f"heat trace at t={self.t_limit} is {self.limit_gap:.3g} away from its limit")

    def _hyperbolic_geodesic(self, t: float) -> float:
        return tf._hyperbolic_heat(t, self.geodata, 1e-12).value.real

    def _correction(self, t: float) -> float:
        return tf.scattering_correction(t, self.sp).value.real

    def _evaluate(self, t: float) -> float:
        hit = self._cache.get(t)
        if hit is not None:
            return hit
        if t <= self.t_switch:
            h = tf._hyperbolic_heat(t, self.geodata, 1e-12)
        else:
            h = self.grid.heat(t)
        val = tf._theta_from_parts(t, self.d, self.sp, h).value.real - self._correction(t)
        self._cache[t] = val
        return val

    def __call__(self, t: float) -> float:
        if not t > 0:
            raise DomainError("t must be positive")
        if t > self.t_limit:
            return float(self.m0)
        return self._evaluate(float(t))

    def remainder(self, t: float) -> float:
        """theta_S(t) minus its small-t model, O(t) as t -> 0."""
        return self(t) - self.coeffs.model(t)


SPECTRAL_CONFIG = SpectralZetaConfig(mellin_abscissa_split=1.0, quad_rel_tol=1e-10, t_floor=1e-6)


def log_det_automorphic_spectral(s, heat: SpectralHeatTrace, cfg: SpectralZetaConfig | None = None) -> EvalResult:
    """-d/dw zeta(w, s) at w = 0 for the heat trace over S1 u S2 u S3'; real s > 1 only."""
    s = complex(s)
    if s.imag != 0 or not s.real > 1:
        raise DomainError(f"the spectral path is implemented for real s > 1, got {s}")
    cfg = cfg or SPECTRAL_CONFIG
    res = rd.log_det_from_spectral_zeta(heat, heat.coeffs, s.real, cfg, remainder=heat.remainder)
    a = s.real * (s.real - 1)
    # neglected pieces: (0, t_floor) where the remainder is O(t), and t > t_limit
    floor_err = 0.5 * cfg.t_floor
    limit_err = heat.limit_gap * math.exp(-a * heat.t_limit) / (a * heat.t_limit)
    return EvalResult(res.value.real, res.abs_error_estimate + floor_err + limit_err, "quadrature")


def det_automorphic_spectral(s, heat: SpectralHeatTrace, cfg: SpectralZetaConfig | None = None) -> EvalResult:
    r = log_det_automorphic_spectral(s, heat, cfg)
    value = math.exp(r.value.real)
    return EvalResult(value, value * math.expm1(r.abs_error_estimate), r.method_tag)


def fit_constants(s_values: Sequence[float], log_spectral: Sequence[float], log_factors: Sequence[float]):
    """Least-squares c1, c2 with log_spectral - log_factors ~ c1 s(s-1) + c2.

    Returns (c1, c2, rms residual).
    """
    s = np.asarray(s_values, dtype=float)
    y = np.asarray(log_spectral, dtype=float) - np.asarray(log_factors, dtype=float)
    design = np.column_stack([s * (s - 1), np.ones_like(s)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.sqrt(np.mean((design @ coef - y) ** 2)))
    return float(coef[0]), float(coef[1]), resid


# ---------------------------------------------------------------------------
# functional equation
# ---------------------------------------------------------------------------


def _log_complete_zeta_transfer(s: complex, sub, rep, d: FuchsianDescriptor, degree: int) -> complex:
    z = to.zeta_via_transfer(s, sub, rep, degree).value
    return zt.log_zeta_identity(s, d) + zt.log_zeta_elliptic(s, d) + zt.log_zeta_parabolic(s, d) + cmath.log(z)


def functional_eq_residual(
    s, sub: SubgroupDescriptor, sp: ScatteringProvider, degree: int = 32, rep: InducedRep | None = None, eps: float = 1e-300
) -> float:
    """|Z~(1-s) - e^{-i pi K0/2} phi(s) Z~(s)| / max(|Z~(1-s)|, eps), Z from the transfer operator."""
    s = complex(s)
    rep = rep or gd.build_induced_rep(sub)
    d = gd.fuchsian_from_subgroup(sub)
    left = cmath.exp(_log_complete_zeta_transfer(1 - s, sub, rep, d, degree))
    right = cmath.exp(-1j * math.pi * complex(sp.K0) / 2) * sp.phi(s) * cmath.exp(
        _log_complete_zeta_transfer(s, sub, rep, d, degree)
    )
    return abs(left - right) / max(abs(left), eps)


# ---------------------------------------------------------------------------
# determinant identities
# ---------------------------------------------------------------------------


def goaway_exponents(d: FuchsianDescriptor) -> list[tuple[int, int, float]]:
    """(nu, l, e) with e = 2(-n(nu - 1) + alpha(R, l))/nu."""
    table = gd.alpha_table(d)
    return [
        (nu, l, 2 * (-d.rep_dim * (nu - 1) + table[(r, l)]) / nu)
        for r, nu in enumerate(d.elliptic_orders)
        for l in range(nu)
    ]


def goaway_assembly(
    s,
    sub: SubgroupDescriptor,
    sp: ScatteringProvider,
    degree: int = to.DEFAULT_DEGREE,
    rep: InducedRep | None = None,
    elliptic_sign: float = 1.0,
) -> EvalResult:
    """(s-1/2)^{-K0-k} phi(s) det(L2+s)^{-n|F|/pi} prod det(H1+(s+l)/nu)^{e} det(H1+s+1/2)^{2k} det(1-L_s)^2.

    ``elliptic_sign = -1`` flips the elliptic exponents, which is the sign
    that matches Z_E^2.
    """
    s = complex(s)
    rep = rep or gd.build_induced_rep(sub)
    d = gd.fuchsian_from_subgroup(sub)
    k0 = complex(sp.K0)
    k = d.nonsingularity_degree
    if s == 0.5:
        raise PoleError("s = 1/2")
    z = to.zeta_via_transfer(s, sub, rep, degree)
    log_total = (
        -(k0 + k) * cmath.log(s - 0.5)
        + cmath.log(sp.phi(s))
        - d.rep_dim * d.area / math.pi * rd.log_det_sphere(s)
        + sum(elliptic_sign * e * rd.log_det_harmonic((s + l) / nu) for nu, l, e in goaway_exponents(d))
        + 2 * k * rd.log_det_harmonic(s + 0.5)
        + 2 * cmath.log(z.value)
    )
    value = cmath.exp(log_total)
    return EvalResult(value, abs(value) * 2 * z.abs_error_estimate / abs(z.value), "transfer_finite_det")


def commensurability_side(s, irreps: Sequence[SubgroupDescriptor], degree: int = to.DEFAULT_DEGREE) -> complex:
    """log of one side of the commensurability identity for Gamma_1 = PSL(2, Z).

    Per irreducible psi of dimension m:

        (s-1/2)^{a} det(A)^m det Phi^{-m} det(L2+s)^{m^2|F|/pi}
            det(H1+s+1/2)^{-2km} prod det(H1+(s+l)/nu)^{e m}.

    det(A) is taken from the factorization with c1 = c2 = 0.  K0 and phi
    cancel identically against a = (K0 + k) m and det Phi^{-m}, so no
    scattering data is needed.
    """
    s = complex(s)
    total = 0j
    for sub in irreps:
        d = gd.fuchsian_from_subgroup(sub)
        m = d.rep_dim
        k = d.nonsingularity_degree
        rep = gd.build_induced_rep(sub)
        z = to.zeta_via_transfer(s, sub, rep, degree).value
        # (s-1/2)^{K0} det(A) / phi
        det_a = 2 * (zt.log_zeta_identity(s, d) + zt.log_zeta_elliptic(s, d) + zt.log_zeta_parabolic(s, d) + cmath.log(z))
        total += k * m * cmath.log(s - 0.5) + m * det_a
        total += m * m * d.area / math.pi * rd.log_det_sphere(s)
        total += -2 * k * m * rd.log_det_harmonic(s + 0.5)
        total += sum(e * m * rd.log_det_harmonic((s + l) / nu) for nu, l, e in goaway_exponents(d))
    return total


def commensurability_elementary(s, irreps: Sequence[SubgroupDescriptor]) -> complex:
    """log of the elementary factor left after the determinants cancel against Z_I, Z_E, Z_P.

    Per psi: (2 pi)^{-m^2|F|/2pi + m sum(e)/2 - k m} e^{-2 c m s} 2^{-2 k m s}.
    """
    s = complex(s)
    total = 0j
    log2pi = math.log(2 * math.pi)
    for sub in irreps:
        d = gd.fuchsian_from_subgroup(sub)
        m = d.rep_dim
        k = d.nonsingularity_degree
        c = zt.parabolic_constant(d)
        esum = sum(e for _, _, e in goaway_exponents(d))
        total += (-m * m * d.area / (2 * math.pi) + m * esum / 2 - k * m) * log2pi
        total += -2 * c * m * s - 2 * k * m * s * math.log(2)
    return total
