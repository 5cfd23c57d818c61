"""Named verification suites: small, fixed-grid identity checks per module.

Each suite returns a list of ``CheckOutcome``; ``passed`` is recomputed
from residual and tolerance, never stored independently.
"""
from __future__ import annotations

import cmath
import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from . import geodesics as geo
from . import groupdata as gd
from . import jl
from . import laplacedet as ld
from . import regdet as rd
from . import specfun as sf
from . import traceformula as tf
from . import transferop as to
from . import zetas as zt

__all__ = ["CheckOutcome", "SUITES", "run_suite"]


@dataclass(frozen=True)
class CheckOutcome:
    check_name: str
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)


def _rel(a, b) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _grid(n, seed, zbox, wbox):
    rng = np.random.default_rng(seed)
    return [
        (complex(rng.uniform(*zbox[0]), rng.uniform(*zbox[1])), complex(rng.uniform(*wbox[0]), rng.uniform(*wbox[1])))
        for _ in range(n)
    ]


def suite_specfun():
    hs = max(
        _rel(sf.hurwitz_zeta(z, w).value - sf.hurwitz_zeta(z, w + 1).value, cmath.exp(-z * cmath.log(w)))
        for z, w in _grid(20, 1, ((-3, 5), (-5, 5)), ((0.05, 5), (-3, 3)))
    )
    refl = max(
        _rel(sf.gamma(z) * sf.gamma(1 - z), math.pi / cmath.sin(math.pi * z))
        for z, _ in _grid(20, 2, ((-4.7, 4.7), (-3, 3)), ((0, 1), (0, 1)))
    )
    coll = max(
        _rel(sf.barnes_zeta2(z, w).value - sf.barnes_zeta2(z, w + 1).value, sf.hurwitz_zeta(z, w).value)
        for z, w in _grid(20, 3, ((2.5, 6), (-2, 2)), ((0.3, 3), (-1, 1)))
    )
    rec = max(
        _rel(sf.barnes_gamma2(s).value, sf.gamma(s) * sf.barnes_gamma2(1 + s).value)
        for s in np.linspace(0.3, 3.1, 20)
    )
    kink = 0.0
    g2 = sf.log_barnes_gamma2
    for s in np.linspace(0.02, 0.48, 20):
        lhs, _ = integrate.quad(lambda x: math.pi * x / math.tan(math.pi * x) if x else 1.0, 0, s, epsabs=1e-14)
        rhs = s * math.log(2 * math.pi) - (g2(1 - s).value - g2(1 + s).value)
        kink = max(kink, abs(lhs - rhs.real))
    return [
        CheckOutcome("hurwitz_shift", hs, 1e-8),
        CheckOutcome("gamma_reflection", refl, 1e-8),
        CheckOutcome("barnes_collapse", coll, 1e-8),
        CheckOutcome("gamma2_recursion", rec, 1e-8),
        CheckOutcome("kinkelin_integral", kink, 1e-8),
    ]


def suite_regdet():
    sphere = max(abs(rd.log_det_sphere(s) - rd.log_det_sphere_zeta_path(s)) for s in (0.6, 1.5, 2.0, 3.3))
    ratio = abs(rd.det_sphere(2.5) / rd.det_sphere(1.5) - 1.5 * sf.gamma(1.5) ** 2 / (2 * math.pi))
    cfg = rd.SpectralZetaConfig()
    harm = max(
        _rel(
            rd.log_det_from_spectral_zeta(
                rd.harmonic_heat_trace, rd.HARMONIC_COEFFS, 0.5 + math.sqrt(0.25 + lam), cfg, rd.harmonic_remainder
            ).value,
            rd.log_det_harmonic(lam),
        )
        for lam in (0.6, 1.5, 3.0)
    )
    return [
        CheckOutcome("sphere_two_paths", sphere, 1e-7),
        CheckOutcome("sphere_ratio", ratio, 1e-8),
        CheckOutcome("harmonic_mellin_path", harm, 1e-7),
    ]


def _word_trace(word) -> int:
    m = np.eye(2, dtype=np.int64)
    for i, a in enumerate(word):
        step = np.array([[1, a], [0, 1]] if i % 2 == 0 else [[1, 0], [a, 1]], dtype=np.int64)
        m = m @ step
    return int(m[0, 0] + m[1, 1])


def suite_geodesics():
    # brute force over even CF words (length <= 4 covers trace <= 10) against the enumeration
    t_max = 10
    classes = set()
    for length in (2, 4):
        for word in itertools.product(range(1, t_max), repeat=length):
            if _word_trace(word) > t_max:
                continue
            rots = frozenset(word[i:] + word[:i] for i in range(0, length, 2))
            if len(rots) < length // 2:
                continue
            classes.add(rots)
    brute = Counter(_word_trace(next(iter(c))) for c in classes)
    got = Counter(c.trace for c in geo.enumerate_classes(t_max**2 - 2))
    mismatch = sum(((brute - got) + (got - brute)).values())
    norms = max(abs(c.norm + 1 / c.norm - c.trace**2 + 2) / c.norm for c in geo.enumerate_classes(5000))
    return [CheckOutcome("word_bruteforce_multiset", float(mismatch), 0.0), CheckOutcome("norm_trace", norms, 1e-12)]


def suite_transferop():
    sub = gd.builtin("psl2z")
    rep = gd.build_induced_rep(sub)
    classes = geo.enumerate_classes(1e5)
    central = max(
        _rel(to.zeta_via_transfer(s, sub, rep).value, zt.selberg_zeta_euler(s, classes, rep, norm_max=1e5).value)
        for s in (2.0, 2.5)
    )
    zero = abs(to.zeta_via_transfer(1.0, sub, rep, degree=30).value)
    s = 1.5
    parts = [to.zeta_via_transfer(s, gd.builtin(f"psl2z_s3_{n}")).value for n in ("trivial", "sign", "standard")]
    induced = _rel(to.zeta_via_transfer(s, gd.builtin("gamma2")).value, parts[0] * parts[1] * parts[2] ** 2)
    return [
        CheckOutcome("central_identity", central, 1e-4),
        CheckOutcome("zero_at_one", zero, 1e-5),
        CheckOutcome("induction_identity", induced, 1e-6),
    ]


def _relation(term, log_z, s, beta, d, h=1e-3, h2=1e-4):
    def x(u):
        return term(tf.TestFunctionPair.resolvent(u, beta), d).value.real

    def inner(u):
        return ((log_z(u + h2, d) - log_z(u - h2, d)) / (2 * h2)).real / (2 * u - 1)

    return (x(s + h) - x(s - h)) / (2 * h) - (inner(s + h) - inner(s - h)) / (2 * h)


def suite_trace():
    d = gd.MODULAR_GROUP
    out = []
    for name, term, log_z in (
        ("identity", tf.identity_term, zt.log_zeta_identity),
        ("elliptic", tf.elliptic_term, zt.log_zeta_elliptic),
        ("parabolic", tf.parabolic_term, zt.log_zeta_parabolic),
    ):
        worst = max(abs(_relation(term, log_z, s, 1.5, d)) for s in (1.8, 2.2))
        out.append(CheckOutcome(f"{name}_relation", worst, 1e-5))
    c = tf.theta_asymptotics(d, tf.modular_scattering_provider())
    out.append(CheckOutcome("alpha_is_area_over_2pi", abs(c.alpha - d.area / (2 * math.pi)), 1e-14))
    return out


def suite_laplacian():
    sub = gd.builtin("psl2z")
    sp = tf.modular_scattering_provider()
    fe = ld.functional_eq_residual(0.5 + 2j, sub, sp, degree=32)
    a = ld.det_automorphic_factorized(0.5 + 3j, sub, None, None, sp).value
    b = ld.det_automorphic_factorized(0.5 - 3j, sub, None, None, sp).value
    irreps = [gd.builtin(f"psl2z_s3_{n}") for n in ("trivial", "sign", "standard")]
    side = ld.commensurability_side(2.0, irreps)
    expected = 2 * cmath.log(to.zeta_via_transfer(2.0, gd.builtin("gamma2")).value) + ld.commensurability_elementary(
        2.0, irreps
    )
    return [
        CheckOutcome("functional_equation", fe, 1e-2),
        CheckOutcome("critical_line_symmetry", _rel(a, b), 1e-3),
        CheckOutcome("commensurability", abs(cmath.exp(side - expected) - 1), 1e-3),
    ]


def suite_jl():
    mult = 0
    for a in range(1, 1001):
        for b in range(1, 1000 // a + 1):
            if math.gcd(a, b) == 1:
                mult += jl.beta_coeff(a * b) != jl.beta_coeff(a) * jl.beta_coeff(b)
    rng = np.random.default_rng(11)
    trips = 0
    for n in range(1, 201):
        divs = jl.divisors(n)
        delta = {m: int(rng.integers(-50, 51)) for m in divs}
        new = {m: jl.newform_dimension_combinator(delta, m) for m in divs}
        trips += jl.oldform_expansion(new, n) != delta[n]
    data = jl.level_data(1)
    level_one = sum(jl.newform_zeta(k, 2.0, data) != data.by_divisor[1].zeta[k](2.0) for k in jl.KINDS)
    return [
        CheckOutcome("beta_multiplicative", float(mult), 0.0),
        CheckOutcome("moebius_round_trip", float(trips), 0.0),
        CheckOutcome("level_one_identity", float(level_one), 0.0),
    ]


SUITES: dict[str, Callable[[], list[CheckOutcome]]] = {
    "specfun": suite_specfun,
    "regdet": suite_regdet,
    "geodesics": suite_geodesics,
    "transferop": suite_transferop,
    "trace": suite_trace,
    "laplacian": suite_laplacian,
    "jl": suite_jl,
}


def run_suite(name: str, tol: float | None = None) -> list[CheckOutcome]:
    """Run one suite (or ``all``); ``tol`` replaces every tolerance when given."""
    names = list(SUITES) if name == "all" else [name]
    out = []
    for n in names:
        for c in SUITES[n]():
            out.append(CheckOutcome(f"{n}.{c.check_name}", c.residual, c.tolerance if tol is None else tol))
    return out
