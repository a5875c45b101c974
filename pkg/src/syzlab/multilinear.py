"""Monomial bases of rational surfaces and exterior-power index bookkeeping.

Monomials are plain exponent tuples in the surface's Cox coordinates;
their exponent vectors double as the finest multigrading, which the
Koszul layer uses to split differentials into small blocks.  Wedge
subsets of generator indices are ranked in colexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb

P1 = "P1"
P2 = "P2"
HIRZEBRUCH = "hirzebruch"
QUADRIC_BLOWUP = "quadric_blowup"

_COORDS = {P1: ("x", "y"), P2: ("x", "y", "z"),
           HIRZEBRUCH: ("u", "v", "s", "t"),
           QUADRIC_BLOWUP: ("u", "v", "s", "t")}


@dataclass(frozen=True)
class SurfaceModel:
    """A rational surface with a fixed Cox-coordinate model.

    kind:
        P1                the projective line (degree grading)
        P2                the projective plane (degree grading)
        hirzebruch        the ruled surface of invariant e >= 0, coordinates
                          u, v on the fiber factor and s, t with s of class
                          C0 and t of class C0 + e*f
        quadric_blowup    P1 x P1 (the e = 0 model) blown up at base points;
                          multiplicity conditions are imposed downstream, the
                          model itself only carries the points
    base points are pairs ((u:v), (s:t)) of projective GF(p) points; no two
    may share a ruling line of either factor.
    """

    kind: str
    e: int = 0
    points: tuple = ()
    point_modulus: int = 0

    def __post_init__(self):
        if self.kind not in _COORDS:
            raise ValueError(f"unknown surface kind {self.kind!r}")
        if self.kind == HIRZEBRUCH and self.e < 0:
            raise ValueError("Hirzebruch invariant e must be >= 0")
        if self.kind != QUADRIC_BLOWUP and self.points:
            raise ValueError("base points only make sense on a blowup")
        if self.points:
            self._check_points()

    def _check_points(self):
        p = self.point_modulus
        if p <= 0:
            raise ValueError("base points need the working modulus")
        for i, ((u1, v1), (s1, t1)) in enumerate(self.points):
            if u1 % p == 0 and v1 % p == 0:
                raise ValueError("degenerate first-factor coordinates")
            if s1 % p == 0 and t1 % p == 0:
                raise ValueError("degenerate second-factor coordinates")
            for (u2, v2), (s2, t2) in self.points[i + 1:]:
                if (u1 * v2 - u2 * v1) % p == 0 or (s1 * t2 - s2 * t1) % p == 0:
                    raise ValueError("two base points share a ruling line")

    @property
    def coords(self) -> tuple[str, ...]:
        return _COORDS[self.kind]

    @property
    def nvars(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class DivisorClass:
    """A divisor class in the surface's standard basis.

    P1/P2: (d,).  Hirzebruch: (a, b) meaning a*C0 + b*f.  Blowup:
    (a, b) for the pullback part plus per-point multiplicities, meaning
    pullback(a, b) - sum m_i * E_i.
    """

    components: tuple[int, ...]
    multiplicities: tuple[int, ...] = ()

    @staticmethod
    def degree(d: int) -> "DivisorClass":
        return DivisorClass((d,))

    @staticmethod
    def ruled(a: int, b: int, multiplicities: tuple[int, ...] = ()) -> "DivisorClass":
        return DivisorClass((a, b), tuple(multiplicities))

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        mults = _pad_add(self.multiplicities, other.multiplicities, 1)
        return DivisorClass(tuple(x + y for x, y in zip(self.components, other.components)), mults)

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        mults = _pad_add(self.multiplicities, other.multiplicities, -1)
        return DivisorClass(tuple(x - y for x, y in zip(self.components, other.components)), mults)

    def __mul__(self, q: int) -> "DivisorClass":
        return DivisorClass(tuple(q * x for x in self.components),
                            tuple(q * m for m in self.multiplicities))

    __rmul__ = __mul__


def _pad_add(a: tuple, b: tuple, sign: int) -> tuple:
    n = max(len(a), len(b))
    a = a + (0,) * (n - len(a))
    b = b + (0,) * (n - len(b))
    return tuple(x + sign * y for x, y in zip(a, b))


def monomial_basis(surface: SurfaceModel, cls: DivisorClass) -> list[tuple[int, ...]]:
    """Deterministic ordered monomial basis of the sections of `cls`.

    Classes without sections give an empty list.  On a blowup the
    unconstrained pullback-bidegree basis is returned; multiplicity
    conditions at the base points are imposed by the module layer.
    """
    comp = cls.components
    if surface.kind == P1:
        (d,) = comp
        if d < 0:
            return []
        return [(d - j, j) for j in range(d + 1)]
    if surface.kind == P2:
        (d,) = comp
        if d < 0:
            return []
        out = [(i, j, d - i - j) for i in range(d, -1, -1) for j in range(d - i, -1, -1)]
        return sorted(out, reverse=True)
    a, b = comp[0], comp[1]
    e = surface.e if surface.kind == HIRZEBRUCH else 0
    if a < 0:
        return []
    out = []
    for l in range(a + 1):
        k = a - l
        rem = b - l * e
        if rem < 0:
            continue
        for i in range(rem, -1, -1):
            out.append((i, rem - i, k, l))
    return sorted(out, reverse=True)


def section_count(surface: SurfaceModel, cls: DivisorClass) -> int:
    """Closed-form section count for the unconstrained class."""
    comp = cls.components
    if surface.kind == P1:
        return max(0, comp[0] + 1)
    if surface.kind == P2:
        d = comp[0]
        return comb(d + 2, 2) if d >= 0 else 0
    a, b = comp[0], comp[1]
    e = surface.e if surface.kind == HIRZEBRUCH else 0
    if a < 0:
        return 0
    return sum(max(0, b - l * e + 1) for l in range(a + 1))


def mono_mul(m1: tuple[int, ...], m2: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(m1, m2))


# -- wedge index combinatorics ----------------------------------------------

def wedge_rank(subset) -> int:
    """Colex rank of a strictly increasing index subset."""
    prev = -1
    r = 0
    for i, s in enumerate(subset):
        if s <= prev:
            raise ValueError("subset must be strictly increasing")
        prev = s
        r += comb(s, i + 1)
    return r


def wedge_unrank(rank_: int, p: int, n: int) -> tuple[int, ...]:
    """Inverse of wedge_rank on p-subsets of {0..n-1}."""
    if not 0 <= rank_ < comb(n, p):
        raise ValueError("rank out of range")
    out = []
    r = rank_
    for i in range(p, 0, -1):
        s = i - 1
        while comb(s + 1, i) <= r:
            s += 1
        out.append(s)
        r -= comb(s, i)
    return tuple(reversed(out))


def wedge_insert(v_index: int, subset) -> tuple[int, tuple[int, ...]]:
    """Insert a generator index into a wedge.

    Returns (sign, merged subset); sign is 0 when the index already
    occurs and otherwise (-1)**(number of smaller entries).
    """
    subset = tuple(subset)
    if v_index in subset:
        return 0, subset
    smaller = sum(1 for s in subset if s < v_index)
    merged = tuple(sorted(subset + (v_index,)))
    return (-1) ** smaller, merged


@lru_cache(maxsize=None)
def wedge_list(n: int, p: int) -> tuple[tuple[int, ...], ...]:
    """All p-subsets of {0..n-1} in colex (rank) order."""
    if p < 0 or p > n:
        return ()
    return tuple(sorted(combinations(range(n), p), key=lambda s: s[::-1]))
