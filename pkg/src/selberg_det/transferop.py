"""Mayer transfer operator for finite-index subgroups of PSL(2, Z).

For the induced representation U of PSL(2, Z) the operator acts on vectors
f(z, eps), eps = +-1, of holomorphic functions on D = {|z - 1| < 3/2}:

    (L_s f)(z, eps) = sum_{n>=1} (z+n)^{-2s} U(S T^{n eps}) f(1/(z+n), -eps).

A function is stored by its Taylor coefficients in (z - 1)^k, k <= N.  The
image of (w - 1)^k under the scalar part is

    g_k(z) = sum_n (z+n)^{-2s} (1/(z+n) - 1)^k,

and the matrix column k holds the Taylor coefficients of g_k.  Because U(T)
has finite order p, the n-sum splits into residue classes c mod p with
weight U(S) U(T)^{c eps} each.  Terms n <= 50 are summed exactly; the
remainder of a residue class is

    sum_m C(k,m) (-1)^{k-m} p^{-2s-m} zeta(2s+m, (z+n_0)/p),

which also supplies the continuation in s.  Two backends produce the Taylor
coefficients: exact series arithmetic plus Hurwitz derivatives ("hurwitz"),
and the trapezoid rule on a circle of radius 1/2 ("cauchy").
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import specfun as sf
from .errors import ConvergenceError, DomainError
from .groupdata import InducedRep, SubgroupDescriptor, build_induced_rep
from .specfun import EvalResult

__all__ = [
    "TruncatedTransferOperator",
    "build_operator",
    "fredholm_det",
    "zeta_via_transfer",
    "rep_period",
    "DEFAULT_DEGREE",
    "MAX_DEGREE",
]

DEFAULT_DEGREE = 24
MAX_DEGREE = 64
N_EXACT = 50
CAUCHY_NODES = 256
CAUCHY_RADIUS = 0.5
CROSS_CHECK_TOL = 1e-10
MAX_PERIOD = 64


@dataclass(frozen=True)
class TruncatedTransferOperator:
    """Matrix of L_s on (eps, component, Taylor index), eps = +1 first."""

    s: complex
    degree: int
    block_dim: int
    matrix: np.ndarray
    center: float = 1.0
    disc_radius: float = 1.5
    backend: str = "hurwitz"
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def index(self, eps: int, comp: int, k: int) -> int:
        e = 0 if eps > 0 else 1
        return ((e * (self.block_dim // 2)) + comp) * (self.degree + 1) + k

    @property
    def spectral_radius(self) -> float:
        if "rho" not in self._cache:
            self._cache["rho"] = float(np.abs(np.linalg.eigvals(self.matrix)).max())
        return self._cache["rho"]


def rep_period(rep: InducedRep, tol: float = 1e-9) -> int:
    """Order of U(T); DomainError when it exceeds MAX_PERIOD."""
    eye = np.eye(rep.dim)
    m = rep.T.astype(complex)
    for p in range(1, MAX_PERIOD + 1):
        if np.abs(m - eye).max() < tol:
            return p
        m = m @ rep.T
    raise DomainError(f"U(T) has order > {MAX_PERIOD}; the tail split by residues needs a finite cusp holonomy")


def _check_s(s: complex, degree: int):
    if not 1 <= degree <= MAX_DEGREE:
        raise DomainError(f"degree must be in [1, {MAX_DEGREE}], got {degree}")
    two_s = 2 * s
    if abs(two_s.imag) < 1e-8 and two_s.real <= 1 + 1e-8:
        nearest = round(two_s.real)
        if abs(two_s.real - nearest) < 1e-8:
            raise DomainError(f"2s = {two_s} hits a Hurwitz pole")


def _binomials(n: int) -> np.ndarray:
    """Signed table B[k, m] = C(k, m) (-1)^(k-m)."""
    b = np.zeros((n + 1, n + 1))
    for k in range(n + 1):
        for m in range(k + 1):
            b[k, m] = math.comb(k, m) * (-1.0) ** (k - m)
    return b


def _tail_starts(p: int) -> list[int]:
    """First n > N_EXACT in each residue class c = 0..p-1."""
    out = []
    for c in range(p):
        n0 = N_EXACT + 1 + ((c - N_EXACT - 1) % p)
        out.append(n0)
    return out


# ---------------------------------------------------------------------------
# backend 1: exact series + Hurwitz derivatives
# ---------------------------------------------------------------------------


def _head_series(s: complex, N: int, q: np.ndarray) -> np.ndarray:
    """Taylor coefficients in u of (q+u)^{-2s} (1/(q+u) - 1)^k, shape (len q, k, j)."""
    nq = len(q)
    j = np.arange(N + 1)
    # (q+u)^{-2s}: a_{j+1} = a_j (-2s - j) / ((j+1) q)
    a = np.empty((nq, N + 1), dtype=complex)
    a[:, 0] = np.exp(-2 * s * np.log(q))
    for jj in range(N):
        a[:, jj + 1] = a[:, jj] * (-2 * s - jj) / ((jj + 1) * q)
    # 1/(q+u) - 1
    b = ((-1.0) ** j)[None, :] * q[:, None] ** (-1.0 - j)[None, :]
    b[:, 0] -= 1.0
    # lower-triangular Toeplitz operator of multiplication by b
    idx = j[:, None] - j[None, :]
    toe = np.where(idx[None] >= 0, b[:, np.clip(idx, 0, None)], 0.0)
    out = np.empty((nq, N + 1, N + 1), dtype=complex)
    cur = a
    for k in range(N + 1):
        out[:, k, :] = cur
        cur = np.einsum("qij,qj->qi", toe, cur)
    return out


def _kernels_hurwitz(s: complex, N: int, p: int) -> np.ndarray:
    """K[c, j, k]: Taylor coefficient j of the residue-c part of g_k."""
    K = np.zeros((p, N + 1, N + 1), dtype=complex)
    n = np.arange(1, N_EXACT + 1)
    head = _head_series(s, N, (n + 1).astype(float))
    for c in range(p):
        K[c] = head[n % p == c].sum(axis=0).T
    binom = _binomials(N)
    j = np.arange(N + 1)
    for c, n0 in enumerate(_tail_starts(p)):
        a0 = (1.0 + n0) / p
        zh = np.array([sf.hurwitz_zeta(2 * s + i, a0).value for i in range(2 * N + 1)])
        # coef[m, j] = p^{-sigma-j} (-1)^j (sigma)_j / j! zeta(sigma + j, a0), sigma = 2s + m
        coef = np.empty((N + 1, N + 1), dtype=complex)
        for m in range(N + 1):
            sigma = 2 * s + m
            poch = np.ones(N + 1, dtype=complex)
            for jj in range(1, N + 1):
                poch[jj] = poch[jj - 1] * (sigma + jj - 1) / jj
            coef[m] = (-1.0) ** j * poch * zh[m:m + N + 1] * np.exp(-(sigma + j) * math.log(p))
        K[c] += (binom @ coef).T
    return K


# ---------------------------------------------------------------------------
# backend 2: Cauchy integral on |z - 1| = 1/2
# ---------------------------------------------------------------------------


def _hurwitz_many(z: complex, a: np.ndarray) -> np.ndarray:
    """Vectorized Euler-Maclaurin Hurwitz zeta over an array of Re a > 0."""
    shift = max(0, math.ceil(abs(z) + 10.0 - float(a.real.min())) + 1)
    head = np.zeros_like(a)
    for n in range(shift):
        head += np.exp(-z * np.log(a + n))
    a = a + shift
    a_mz = np.exp(-z * np.log(a))
    acc = a * a_mz / (z - 1.0) + 0.5 * a_mz
    poch = z
    pw = a_mz / a
    ainv2 = 1.0 / (a * a)
    for k in range(1, len(sf._EM_COEF) + 1):
        acc = acc + sf._EM_COEF[k - 1] * poch * pw
        poch *= (z + 2 * k - 1) * (z + 2 * k)
        pw = pw * ainv2
    return head + acc


def _kernels_cauchy(s: complex, N: int, p: int) -> np.ndarray:
    L = CAUCHY_NODES
    r = CAUCHY_RADIUS
    z = 1.0 + r * np.exp(2j * np.pi * np.arange(L) / L)
    g = np.zeros((p, N + 1, L), dtype=complex)
    for n in range(1, N_EXACT + 1):
        w = z + n
        base = np.exp(-2 * s * np.log(w))
        x = 1.0 / w - 1.0
        c = n % p
        for k in range(N + 1):
            g[c, k] += base
            base = base * x
    binom = _binomials(N)
    for c, n0 in enumerate(_tail_starts(p)):
        zeta = np.array([
            np.exp(-(2 * s + m) * math.log(p)) * _hurwitz_many(2 * s + m, (z + n0) / p) for m in range(N + 1)
        ])
        g[c] += binom @ zeta
    coeffs = np.fft.fft(g, axis=2)[:, :, : N + 1] / L
    coeffs /= r ** np.arange(N + 1)
    return np.transpose(coeffs, (0, 2, 1))


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------


def _assemble(K: np.ndarray, rep: InducedRep, p: int) -> np.ndarray:
    d = rep.dim
    N1 = K.shape[1]
    blk = d * N1
    M = np.zeros((2 * blk, 2 * blk), dtype=complex)
    tpow = [np.eye(d, dtype=complex)]
    for _ in range(1, p):
        tpow.append(tpow[-1] @ rep.T)
    for e, eps in enumerate((1, -1)):
        acc = np.zeros((blk, blk), dtype=complex)
        for c in range(p):
            u = rep.S @ tpow[(eps * c) % p]
            acc += np.kron(u, K[c])
        other = 1 - e
        M[e * blk:(e + 1) * blk, other * blk:(other + 1) * blk] = acc
    return M


def _scaled_gap(a: np.ndarray, b: np.ndarray) -> float:
    """Largest entry gap with row j weighted by r^j, the scale the circle rule resolves."""
    N1 = a.shape[1]
    w = CAUCHY_RADIUS ** np.arange(N1)
    scale = max(1.0, float(np.abs(a).max()))
    return float((np.abs(a - b) * w[None, :, None]).max() / scale)


def build_operator(
    s,
    d: SubgroupDescriptor,
    rep: InducedRep | None = None,
    degree: int = DEFAULT_DEGREE,
    backend: Literal["hurwitz", "cauchy"] = "hurwitz",
    cross_check: bool = True,
) -> TruncatedTransferOperator:
    """Truncated matrix of L_s.

    Re(s) <= 1/2 is accepted: the Hurwitz tail continues the matrix
    entries in s, but the determinant identity there is only checked
    empirically through degree convergence.
    """
    s = complex(s)
    _check_s(s, degree)
    if rep is None:
        rep = build_induced_rep(d)
    p = rep_period(rep)
    if backend == "hurwitz":
        K = _kernels_hurwitz(s, degree, p)
    elif backend == "cauchy":
        K = _kernels_cauchy(s, degree, p)
    else:
        raise DomainError(f"unknown backend {backend!r}")
    if cross_check:
        other = _kernels_cauchy(s, degree, p) if backend == "hurwitz" else _kernels_hurwitz(s, degree, p)
        gap = _scaled_gap(K, other)
        if not gap < CROSS_CHECK_TOL:
            raise ConvergenceError(f"transfer matrix backends disagree by {gap:.3g} at s = {s}")
    M = _assemble(K, rep, p)
    if not np.isfinite(M).all():
        raise DomainError(f"non-finite transfer matrix at s = {s}")
    M.setflags(write=False)
    return TruncatedTransferOperator(s, degree, 2 * rep.dim, M, backend=backend)


def fredholm_det(
    op: TruncatedTransferOperator | np.ndarray,
    method: Literal["finite_det", "trace_series"] = "finite_det",
    n_max: int = 60,
) -> EvalResult:
    """det(1 - M) directly or as exp(-sum_n tr(M^n)/n)."""
    M = op.matrix if isinstance(op, TruncatedTransferOperator) else np.asarray(op, dtype=complex)
    size = M.shape[0]
    if method == "finite_det":
        value = complex(np.linalg.det(np.eye(size) - M))
        err = 1e-14 * size * max(1.0, abs(value)) * max(1.0, float(np.abs(M).sum(axis=1).max()))
        return EvalResult(value, err, "finite_det")
    if method != "trace_series":
        raise DomainError(f"unknown method {method!r}")
    rho = op.spectral_radius if isinstance(op, TruncatedTransferOperator) else float(np.abs(np.linalg.eigvals(M)).max())
    if rho >= 1.0:
        raise ConvergenceError(f"trace series diverges: spectral radius {rho:.6g} >= 1; use finite_det")
    traces = []
    P = np.eye(size, dtype=complex)
    for n in range(1, n_max + 1):
        P = P @ M
        traces.append(complex(np.trace(P)) / n)
    log_val = -complex(math.fsum(t.real for t in traces), math.fsum(t.imag for t in traces))
    tail = size * rho ** (n_max + 1) / ((n_max + 1) * (1.0 - rho))
    value = cmath.exp(log_val)
    return EvalResult(value, abs(value) * math.expm1(tail) + 1e-15 * abs(value), "trace_series")


def zeta_via_transfer(
    s,
    d: SubgroupDescriptor,
    rep: InducedRep | None = None,
    degree: int = DEFAULT_DEGREE,
    cross_check: bool = True,
) -> EvalResult:
    """Z(s) = det(1 - L_s); the error estimate is |value(N) - value(N-4)|."""
    if rep is None:
        rep = build_induced_rep(d)
    value = fredholm_det(build_operator(s, d, rep, degree, cross_check=cross_check)).value
    coarse = fredholm_det(build_operator(s, d, rep, max(1, degree - 4), cross_check=False)).value
    return EvalResult(value, abs(value - coarse), "transfer_finite_det")
