"""Primitive hyperbolic conjugacy classes of PSL(2, Z).

With R = [[1,1],[0,1]] and L = [[1,0],[1,1]],

    [[a,1],[1,0]] [[b,1],[1,0]] = R^a L^b,

and every hyperbolic class of PSL(2, Z) is conjugate to a unique word
R^{a_1} L^{a_2} ... R^{a_{2m-1}} L^{a_{2m}} up to cyclic rotation by an
*even* number of letters (rotating by one letter would swap R and L,
which is conjugation by an orientation reversing map).  So classes are
necklaces of even length under even rotations.  A word whose minimal
period p is odd stands for the same class as its doubled word of length 2p;
such classes are stored by the odd period itself.

The norm is N(P) = rho^2 with rho = (|tr| + sqrt(tr^2 - 4)) / 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityError, DomainError, NonPrimitiveError, WordTranslationError
from .groupdata import InducedRep, word_matrix

__all__ = [
    "GeodesicClass",
    "class_invariants",
    "enumerate_classes",
    "character_trace",
    "class_word",
    "norm_from_trace",
    "trace_bound",
    "DEFAULT_MAX_CLASSES",
]

DEFAULT_MAX_CLASSES = 2_000_000


def norm_from_trace(t: int) -> float:
    t = abs(t)
    if t <= 2:
        raise DomainError(f"trace {t} is not hyperbolic")
    rho = 0.5 * (t + math.sqrt(t * t - 4.0))
    return rho * rho


def trace_bound(norm_max: float) -> int:
    """Largest integer trace t with N = rho(t)^2 <= norm_max."""
    rho = math.sqrt(norm_max)
    t = int(math.floor(rho + 1.0 / rho + 1e-9))
    while t > 2 and norm_from_trace(t) > norm_max:
        t -= 1
    return t


@dataclass(frozen=True)
class GeodesicClass:
    cycle: tuple[int, ...]
    rep_matrix: tuple[tuple[int, int], tuple[int, int]]
    trace: int
    norm: float

    @property
    def word(self) -> tuple[int, ...]:
        """Even-length continued-fraction word of the class."""
        return self.cycle if len(self.cycle) % 2 == 0 else self.cycle * 2

    @property
    def length(self) -> float:
        return math.log(self.norm)


def _min_period(seq: Sequence[int]) -> int:
    n = len(seq)
    for p in range(1, n + 1):
        if n % p == 0 and all(seq[i] == seq[i % p] for i in range(n)):
            return p
    return n


def _canonical(word: tuple[int, ...]) -> tuple[int, ...]:
    """Canonical representative of a (primitive) cycle."""
    p = len(word)
    step = 1 if p % 2 else 2
    return min(word[i:] + word[:i] for i in range(0, p, step))


def _product(word: Sequence[int]) -> tuple[int, int, int, int]:
    a, b, c, d = 1, 0, 0, 1
    for x in word:
        a, b, c, d = a * x + b, a, c * x + d, c
    return a, b, c, d


def class_invariants(cycle: Sequence[int]) -> GeodesicClass:
    """Class data for a continued-fraction period.

    ``cycle`` of odd length is doubled; the result must not be a proper
    power, otherwise NonPrimitiveError is raised.
    """
    cyc = tuple(int(a) for a in cycle)
    if not cyc or any(a < 1 for a in cyc):
        raise DomainError(f"cycle must be a nonempty list of positive integers, got {list(cycle)}")
    p = _min_period(cyc)
    word = cyc if len(cyc) % 2 == 0 else cyc * 2
    primitive_len = p if p % 2 == 0 else 2 * p
    if len(word) != primitive_len:
        raise NonPrimitiveError(f"cycle {list(cyc)} is a proper power")
    base = cyc[:p]
    canon = _canonical(base)
    a, b, c, d = _product(canon if len(canon) % 2 == 0 else canon * 2)
    tr = a + d
    return GeodesicClass(canon, ((a, b), (c, d)), tr, norm_from_trace(tr))


def _even_words(t_max: int) -> Iterator[tuple[int, ...]]:
    """All even words w (first letter minimal) whose product has trace <= t_max."""
    stack: list[tuple[tuple[int, ...], tuple[int, int, int, int]]] = []
    for a1 in range(1, t_max + 1):
        stack.append(((a1,), (a1, 1, 1, 0)))
        while stack:
            w, (m11, m12, m21, m22) = stack.pop()
            if len(w) % 2 == 0 and m11 + m22 <= t_max:
                yield w
            # m11 never decreases when letters are appended and bounds the
            # trace from below; a canonical word has no letter smaller than
            # a1 at an even position
            a = a1 if len(w) % 2 == 0 else 1
            while True:
                n11 = m11 * a + m12
                if n11 > t_max:
                    break
                stack.append((w + (a,), (n11, m11, m21 * a + m22, m21)))
                a += 1


def enumerate_classes(norm_max: float, max_classes: int = DEFAULT_MAX_CLASSES) -> list[GeodesicClass]:
    """One GeodesicClass per primitive hyperbolic class with N(P) <= norm_max, sorted by norm."""
    if not norm_max >= 6:
        raise DomainError(f"norm_max must be >= 6, got {norm_max}")
    t_max = trace_bound(norm_max)
    out = []
    for w in _even_words(t_max):
        p = _min_period(w)
        if p % 2 == 0:
            if p != len(w) or _canonical(w) != w:
                continue
            canon = w
        else:
            if 2 * p != len(w):
                continue
            canon = w[:p]
            if _canonical(canon) != canon:
                continue
        a, b, c, d = _product(w)
        out.append(GeodesicClass(canon, ((a, b), (c, d)), a + d, norm_from_trace(a + d)))
        if len(out) > max_classes:
            raise CapacityError(f"more than {max_classes} classes below norm {norm_max}")
    out.sort(key=lambda g: (g.norm, g.cycle))
    return out


def class_word(cls: GeodesicClass) -> str:
    """Word in S, T, t for the class: each pair (a, b) becomes T^a S t^b S = R^a L^b."""
    w = cls.word
    parts = []
    for i in range(0, len(w), 2):
        parts.append("T" * w[i] + "S" + "t" * w[i + 1] + "S")
    word = "".join(parts)
    m = word_matrix(word)
    rep = np.array(cls.rep_matrix, dtype=np.int64)
    if not (np.array_equal(m, rep) or np.array_equal(m, -rep)):
        raise WordTranslationError(f"word for cycle {cls.cycle} does not reproduce its matrix")
    return word


def character_trace(cls: GeodesicClass, k: int, rep: InducedRep) -> complex:
    """tr U(P^k) for the induced representation U."""
    if k < 1:
        raise DomainError("k must be >= 1")
    u = rep.evaluate(class_word(cls))
    return complex(np.trace(np.linalg.matrix_power(u, k)))
