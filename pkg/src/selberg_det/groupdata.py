"""Group and representation data for (Gamma, chi).

Subgroups of PSL(2, Z) are described combinatorially by the right action of
the generators S = [[0,-1],[1,0]] and T = [[1,1],[0,1]] on the cosets
Gamma r_1, ..., Gamma r_mu, together with the n x n blocks of chi on the
Schreier generators  r_i g r_{pi_g(i)}^{-1}  (g in {S, T}).  The induced
representation U of PSL(2, Z) then has, for a generator g, the block
chi(r_i g r_{pi_g(i)}^{-1}) at position (i, pi_g(i)) and zeros elsewhere.

Everything downstream (trace formula, zeta functions) works with the pair
(PSL(2, Z), U), which has the same Selberg zeta function as (Gamma, chi).

Words are strings over ``S``, ``T`` and ``t`` (= T^{-1}).  S is an
involution in PSL(2, Z), so no separate inverse letter is needed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, InvalidCosetAction, ValidationError

__all__ = [
    "gamma0_subgroup",
    "Violation",
    "CuspData",
    "FuchsianDescriptor",
    "SubgroupDescriptor",
    "InducedRep",
    "validate_descriptor",
    "build_induced_rep",
    "alpha_table",
    "trivial_zero_multiplicity",
    "fuchsian_from_subgroup",
    "gauss_bonnet_area",
    "word_matrix",
    "load_descriptor",
    "descriptor_to_json",
    "BUILTIN_SUBGROUPS",
    "builtin",
]

S_MAT = np.array([[0, -1], [1, 0]], dtype=np.int64)
T_MAT = np.array([[1, 1], [0, 1]], dtype=np.int64)
T_INV = np.array([[1, -1], [0, 1]], dtype=np.int64)
_LETTERS = {"S": S_MAT, "T": T_MAT, "t": T_INV}

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str

    def __str__(self) -> str:
        return f"{self.kind}: {self.message}"


@dataclass(frozen=True)
class CuspData:
    """k_alpha eigenvalues of chi(parabolic generator) equal to 1, the rest e^{2 pi i theta}."""

    k: int
    theta_angles: tuple[float, ...] = ()


@dataclass(frozen=True)
class FuchsianDescriptor:
    genus: int
    elliptic_orders: tuple[int, ...]
    num_cusps: int
    rep_dim: int
    area: float
    cusp_data: tuple[CuspData, ...]
    elliptic_rep_angles: tuple[tuple[int, ...], ...]
    nonsingularity_degree: int
    name: str = ""


@dataclass(frozen=True)
class SubgroupDescriptor:
    """Coset action of S and T plus chi on the Schreier generators.

    ``chi_on_generators[g][i]`` is chi(r_i g r_{pi_g(i)}^{-1}) as an n x n
    complex matrix.  Omitting it means chi is trivial (n = 1).
    """

    index: int
    perm_S: tuple[int, ...]
    perm_T: tuple[int, ...]
    chi_on_generators: Mapping[str, Sequence[np.ndarray]] | None = None
    name: str = ""

    @property
    def rep_dim(self) -> int:
        if not self.chi_on_generators:
            return 1
        return int(np.asarray(self.chi_on_generators["S"][0]).shape[0])

    def blocks(self, g: str) -> list[np.ndarray]:
        if not self.chi_on_generators:
            return [np.eye(1, dtype=complex) for _ in range(self.index)]
        return [np.asarray(b, dtype=complex) for b in self.chi_on_generators[g]]


def gauss_bonnet_area(genus: int, elliptic_orders: Sequence[int], num_cusps: int) -> float:
    return 2 * math.pi * (2 * genus - 2 + sum(1 - 1 / m for m in elliptic_orders) + num_cusps)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def _is_perm(p: Sequence[int], n: int) -> bool:
    return len(p) == n and sorted(p) == list(range(n))


def _compose(p: Sequence[int], q: Sequence[int]) -> list[int]:
    """Right action: first p then q."""
    return [q[p[i]] for i in range(len(p))]


def _validate_fuchsian(d: FuchsianDescriptor) -> list[Violation]:
    out = []
    if d.genus < 0 or d.num_cusps < 0 or d.rep_dim < 1:
        out.append(Violation("SignatureInvalid", "genus, cusps must be >= 0 and rep_dim >= 1"))
    if any(m < 2 for m in d.elliptic_orders):
        out.append(Violation("SignatureInvalid", "elliptic orders must be >= 2"))
    gb = gauss_bonnet_area(d.genus, d.elliptic_orders, d.num_cusps)
    if not (d.area > 0 and abs(d.area - gb) <= 1e-12 * max(1.0, gb)):
        out.append(Violation("AreaMismatch", f"area {d.area} differs from Gauss-Bonnet {gb}"))
    if len(d.cusp_data) != d.num_cusps:
        out.append(Violation("CuspCountMismatch", f"{len(d.cusp_data)} cusp records for {d.num_cusps} cusps"))
    for i, c in enumerate(d.cusp_data):
        if c.k < 0 or c.k + len(c.theta_angles) != d.rep_dim:
            out.append(Violation("CuspDimMismatch", f"cusp {i}: k + #theta != n"))
        if any(not 0 < th < 1 for th in c.theta_angles):
            out.append(Violation("AngleRange", f"cusp {i}: theta angles must lie in (0, 1)"))
    if sum(c.k for c in d.cusp_data) != d.nonsingularity_degree:
        out.append(Violation("NonsingularityMismatch", "k(Gamma; chi) != sum of k_alpha"))
    if len(d.elliptic_rep_angles) != len(d.elliptic_orders):
        out.append(Violation("EllipticDataMismatch", "one angle list per elliptic class required"))
    else:
        for nu, alphas in zip(d.elliptic_orders, d.elliptic_rep_angles):
            if len(alphas) != d.rep_dim or any(not 0 <= a < nu for a in alphas):
                out.append(Violation("EllipticDataMismatch", f"order {nu}: need n values in 0..{nu - 1}"))
    return out


def _validate_subgroup(d: SubgroupDescriptor) -> list[Violation]:
    out = []
    mu = d.index
    if mu < 1:
        return [Violation("IndexInvalid", "index must be >= 1")]
    if not _is_perm(d.perm_S, mu) or not _is_perm(d.perm_T, mu):
        return [Violation("NotPermutation", "perm_S and perm_T must be permutations of range(index)")]
    if _compose(d.perm_S, d.perm_S) != list(range(mu)):
        out.append(Violation("RelationViolation", "perm_S^2 != id"))
    st = _compose(d.perm_S, d.perm_T)
    if _compose(_compose(st, st), st) != list(range(mu)):
        out.append(Violation("RelationViolation", "(perm_S perm_T)^3 != id"))
    if d.chi_on_generators:
        n = d.rep_dim
        for g in ("S", "T"):
            blocks = d.chi_on_generators.get(g)
            if blocks is None or len(blocks) != mu:
                out.append(Violation("DimensionMismatch", f"chi[{g}] needs {mu} blocks"))
                continue
            for i, b in enumerate(blocks):
                b = np.asarray(b, dtype=complex)
                if b.shape != (n, n):
                    out.append(Violation("DimensionMismatch", f"chi[{g}][{i}] has shape {b.shape}"))
                elif np.abs(b.conj().T @ b - np.eye(n)).max() > UNITARY_TOL:
                    out.append(Violation("NonUnitary", f"chi[{g}][{i}] is not unitary"))
    return out


def validate_descriptor(d: FuchsianDescriptor | SubgroupDescriptor) -> list[Violation]:
    """Return every violated invariant; an empty list means the descriptor is valid."""
    if isinstance(d, FuchsianDescriptor):
        return _validate_fuchsian(d)
    if isinstance(d, SubgroupDescriptor):
        return _validate_subgroup(d)
    raise TypeError(f"not a descriptor: {type(d).__name__}")


# ---------------------------------------------------------------------------
# induced representation
# ---------------------------------------------------------------------------


def word_matrix(word: str) -> np.ndarray:
    """Integer 2x2 matrix of a word in S, T, t."""
    m = np.eye(2, dtype=np.int64)
    for ch in word:
        try:
            m = m @ _LETTERS[ch]
        except KeyError:
            raise DomainError(f"unknown letter {ch!r} in word {word!r}") from None
    return m


@dataclass(frozen=True)
class InducedRep:
    """Induced representation U given by its matrices on S and T."""

    dim: int
    S: np.ndarray
    T: np.ndarray
    index: int = 1
    perm_S: tuple[int, ...] = (0,)
    perm_T: tuple[int, ...] = (0,)
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def generator(self, ch: str) -> np.ndarray:
        if ch == "S":
            return self.S
        if ch == "T":
            return self.T
        if ch == "t":
            return self.T.conj().T
        raise DomainError(f"unknown letter {ch!r}")

    def evaluate(self, word: str) -> np.ndarray:
        m = np.eye(self.dim, dtype=complex)
        for ch in word:
            m = m @ self.generator(ch)
        return m

    def coset_perm(self, word: str) -> list[int]:
        """Right action of a word on the cosets."""
        p = list(range(self.index))
        for ch in word:
            if ch == "S":
                q = self.perm_S
            elif ch == "T":
                q = self.perm_T
            else:
                q = [0] * self.index
                for i, j in enumerate(self.perm_T):
                    q[j] = i
            p = [q[x] for x in p]
        return p


def build_induced_rep(d: SubgroupDescriptor) -> InducedRep:
    """Block matrices U(S), U(T): block (i, pi_g(i)) = chi(r_i g r_{pi_g(i)}^{-1})."""
    viol = validate_descriptor(d)
    if viol:
        raise InvalidCosetAction("; ".join(map(str, viol)))
    mu, n = d.index, d.rep_dim
    mats = {}
    for g, perm in (("S", d.perm_S), ("T", d.perm_T)):
        u = np.zeros((mu * n, mu * n), dtype=complex)
        for i, b in enumerate(d.blocks(g)):
            j = perm[i]
            u[i * n:(i + 1) * n, j * n:(j + 1) * n] = b
        mats[g] = u
    eye = np.eye(mu * n)
    us, ut = mats["S"], mats["T"]
    if np.abs(us @ us - eye).max() > 1e-9:
        raise InvalidCosetAction("chi blocks violate S^2 = 1")
    st = us @ ut
    if np.abs(st @ st @ st - eye).max() > 1e-9:
        raise InvalidCosetAction("chi blocks violate (ST)^3 = 1")
    return InducedRep(mu * n, us, ut, mu, tuple(d.perm_S), tuple(d.perm_T))


# ---------------------------------------------------------------------------
# elliptic and trivial-zero data
# ---------------------------------------------------------------------------


def alpha_table(d: FuchsianDescriptor) -> dict[tuple[int, int], int]:
    """alpha(R, l) = sum_p [(l - alpha_p) mod nu + (l + alpha_p) mod nu], keyed by (class index, l)."""
    table = {}
    for r, (nu, alphas) in enumerate(zip(d.elliptic_orders, d.elliptic_rep_angles)):
        for l in range(nu):
            table[(r, l)] = sum((l - a) % nu + (l + a) % nu for a in alphas)
    return table


def elliptic_character(nu: int, alphas: Sequence[int], k: int) -> complex:
    """tr chi(R^k) from the eigenvalues exp(-2 pi i alpha_p / nu)."""
    return sum(complex(math.cos(2 * math.pi * k * a / nu), -math.sin(2 * math.pi * k * a / nu)) for a in alphas)


def trivial_zero_multiplicity(j: int, d: FuchsianDescriptor) -> float:
    """n_j = (|F| n / pi)(j + 1/2) - sum_R sum_k tr chi(R^k) sin(k pi (2j+1)/m) / (m sin(k pi/m))."""
    if j < 0:
        raise DomainError("j must be >= 0")
    val = complex(d.area * d.rep_dim / math.pi * (j + 0.5))
    for m, alphas in zip(d.elliptic_orders, d.elliptic_rep_angles):
        for k in range(1, m):
            val -= (
                elliptic_character(m, alphas, k)
                * math.sin(k * math.pi * (2 * j + 1) / m)
                / (m * math.sin(k * math.pi / m))
            )
    return val.real if abs(val.imag) < 1e-12 else val


def _angle_index(eig: complex, nu: int) -> int:
    # eig = exp(-2 pi i alpha / nu)
    a = -math.atan2(eig.imag, eig.real) * nu / (2 * math.pi)
    r = round(a)
    if abs(a - r) > 1e-6:
        raise InvalidCosetAction(f"eigenvalue {eig} is not a {nu}-th root of unity")
    return r % nu


def fuchsian_from_subgroup(d: SubgroupDescriptor) -> FuchsianDescriptor:
    """Descriptor of (PSL(2, Z), U) for the induced representation U of (Gamma, chi).

    The elliptic classes are those of S (order 2) and ST (order 3); the cusp
    is that of T.
    """
    rep = build_induced_rep(d)
    elliptic = []
    for nu, mat in ((2, rep.S), (3, rep.S @ rep.T)):
        eig = np.linalg.eigvals(mat)
        elliptic.append(tuple(sorted(_angle_index(complex(e), nu) for e in eig)))
    thetas = []
    k = 0
    for e in np.linalg.eigvals(rep.T):
        th = (math.atan2(e.imag, e.real) / (2 * math.pi)) % 1.0
        if min(th, 1 - th) < 1e-9:
            k += 1
        else:
            thetas.append(th)
    return FuchsianDescriptor(
        genus=0,
        elliptic_orders=(2, 3),
        num_cusps=1,
        rep_dim=rep.dim,
        area=math.pi / 3,
        cusp_data=(CuspData(k, tuple(sorted(thetas))),),
        elliptic_rep_angles=tuple(elliptic),
        nonsingularity_degree=k,
        name=d.name,
    )


# ---------------------------------------------------------------------------
# built-ins
# ---------------------------------------------------------------------------

# PSL(2, Z) acts on the three nonzero vectors of F_2^2 by v -> v g;
# points ordered (0,1), (1,0), (1,1).
_P1_S = (1, 0, 2)
_P1_T = (0, 2, 1)


def _perm_matrix(p: Sequence[int]) -> np.ndarray:
    m = np.zeros((len(p), len(p)))
    for i, j in enumerate(p):
        m[i, j] = 1.0
    return m


def _s3_irreps() -> dict[str, dict[str, np.ndarray]]:
    ps, pt = _perm_matrix(_P1_S), _perm_matrix(_P1_T)
    q = np.array([[1 / math.sqrt(2), 1 / math.sqrt(6)], [-1 / math.sqrt(2), 1 / math.sqrt(6)], [0.0, -2 / math.sqrt(6)]])
    return {
        "trivial": {"S": np.eye(1), "T": np.eye(1)},
        "sign": {"S": np.array([[np.linalg.det(ps)]]), "T": np.array([[np.linalg.det(pt)]])},
        "standard": {"S": q.T @ ps @ q, "T": q.T @ pt @ q},
    }


def _make_builtins() -> dict[str, SubgroupDescriptor]:
    out = {
        "psl2z": SubgroupDescriptor(1, (0,), (0,), None, "PSL(2,Z)"),
        # cosets of Gamma(2) <-> SL(2, F_2), ordered by breadth-first closure from I
        "gamma2": SubgroupDescriptor(6, (1, 0, 4, 5, 2, 3), (2, 3, 0, 1, 5, 4), None, "Gamma(2)"),
        # cosets of Gamma_0(2) <-> bottom rows in P^1(F_2)
        "gamma0_2": SubgroupDescriptor(3, _P1_S, _P1_T, None, "Gamma_0(2)"),
    }
    for name, mats in _s3_irreps().items():
        key = f"psl2z_s3_{name}"
        out[key] = SubgroupDescriptor(
            1, (0,), (0,), {g: [mats[g].astype(complex)] for g in ("S", "T")}, f"PSL(2,Z), S3 {name}"
        )
    for d in out.values():
        viol = validate_descriptor(d)
        if viol:
            raise ValidationError(f"built-in {d.name}: {viol}")
    return out


BUILTIN_SUBGROUPS = _make_builtins()


def _p1_points(n: int) -> list[tuple[int, int]]:
    """P^1(Z/n) as canonical bottom rows (c : d), breadth-first from (0 : 1) under S and T."""
    units = [u for u in range(1, n + 1) if math.gcd(u, n) == 1]

    def canon(c, d):
        return min(((u * c) % n, (u * d) % n) for u in units)

    start = canon(0, 1)
    order, seen = [start], {start}
    for c, d in order:
        for nxt in (canon(d, -c), canon(c, c + d)):
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
    return order


def gamma0_subgroup(n: int) -> SubgroupDescriptor:
    """Gamma_0(n) with trivial chi; cosets are bottom rows in P^1(Z/n), (c, d) g = (c, d) . g."""
    if n < 1:
        raise DomainError("level must be >= 1")
    if n == 1:
        return BUILTIN_SUBGROUPS["psl2z"]
    pts = _p1_points(n)
    units = [u for u in range(1, n + 1) if math.gcd(u, n) == 1]
    pos = {}
    for i, (c, d) in enumerate(pts):
        for u in units:
            pos[((u * c) % n, (u * d) % n)] = i
    perm_s = tuple(pos[(d % n, (-c) % n)] for c, d in pts)
    perm_t = tuple(pos[(c % n, (c + d) % n)] for c, d in pts)
    out = SubgroupDescriptor(len(pts), perm_s, perm_t, None, f"Gamma_0({n})")
    viol = validate_descriptor(out)
    if viol:
        raise ValidationError(f"Gamma_0({n}): {viol}")
    return out


def builtin(name: str) -> SubgroupDescriptor:
    try:
        return BUILTIN_SUBGROUPS[name]
    except KeyError:
        raise DomainError(f"unknown group {name!r}; choose from {sorted(BUILTIN_SUBGROUPS)}") from None


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _mat_from_json(m) -> np.ndarray:
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValidationError("complex matrices are nested [[re, im], ...] arrays")
    return arr[..., 0] + 1j * arr[..., 1]


def _mat_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def load_descriptor(src: str | Path | Mapping) -> FuchsianDescriptor | SubgroupDescriptor:
    """Load a descriptor from a JSON file path or an already parsed mapping.

    ``{"type": "subgroup", "index", "perm_S", "perm_T", "chi": {"S": [...], "T": [...]}}``
    ``{"type": "fuchsian", "genus", "elliptic_orders", "num_cusps", "rep_dim", "area",
       "cusp_data": [{"k", "theta_angles"}], "elliptic_rep_angles", "nonsingularity_degree"}``
    """
    if isinstance(src, Mapping):
        data = src
    else:
        try:
            data = json.loads(Path(src).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read descriptor: {exc}") from exc
    try:
        kind = data["type"]
        if kind == "subgroup":
            chi = data.get("chi")
            if chi is not None:
                chi = {g: [_mat_from_json(b) for b in chi[g]] for g in ("S", "T")}
            d = SubgroupDescriptor(
                int(data["index"]), tuple(data["perm_S"]), tuple(data["perm_T"]), chi, data.get("name", "")
            )
        elif kind == "fuchsian":
            d = FuchsianDescriptor(
                genus=int(data["genus"]),
                elliptic_orders=tuple(int(m) for m in data["elliptic_orders"]),
                num_cusps=int(data["num_cusps"]),
                rep_dim=int(data["rep_dim"]),
                area=float(data["area"]),
                cusp_data=tuple(CuspData(int(c["k"]), tuple(c.get("theta_angles", ()))) for c in data["cusp_data"]),
                elliptic_rep_angles=tuple(tuple(int(a) for a in al) for al in data["elliptic_rep_angles"]),
                nonsingularity_degree=int(data["nonsingularity_degree"]),
                name=data.get("name", ""),
            )
        else:
            raise ValidationError(f"unknown descriptor type {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed descriptor: {exc}") from exc
    viol = validate_descriptor(d)
    if viol:
        raise ValidationError("; ".join(map(str, viol)))
    return d


def descriptor_to_json(d: FuchsianDescriptor | SubgroupDescriptor) -> dict:
    if isinstance(d, SubgroupDescriptor):
        out = {"type": "subgroup", "name": d.name, "index": d.index, "perm_S": list(d.perm_S), "perm_T": list(d.perm_T)}
        if d.chi_on_generators:
            out["chi"] = {g: [_mat_to_json(b) for b in d.blocks(g)] for g in ("S", "T")}
        return out
    return {
        "type": "fuchsian",
        "name": d.name,
        "genus": d.genus,
        "elliptic_orders": list(d.elliptic_orders),
        "num_cusps": d.num_cusps,
        "rep_dim": d.rep_dim,
        "area": d.area,
        "cusp_data": [{"k": c.k, "theta_angles": list(c.theta_angles)} for c in d.cusp_data],
        "elliptic_rep_angles": [list(a) for a in d.elliptic_rep_angles],
        "nonsingularity_degree": d.nonsingularity_degree,
    }


MODULAR_GROUP = FuchsianDescriptor(
    genus=0,
    elliptic_orders=(2, 3),
    num_cusps=1,
    rep_dim=1,
    area=math.pi / 3,
    cusp_data=(CuspData(1),),
    elliptic_rep_angles=((0,), (0,)),
    nonsingularity_degree=1,
    name="PSL(2,Z)",
)
