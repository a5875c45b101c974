"""Independent reference implementations used as test oracles.

Everything here is deliberately naive (single-pivot dense elimination,
brute-force enumeration) and shares no code with the production paths
it checks.
"""

from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np


def naive_rref(a, p):
    """Single-pivot Gauss-Jordan; returns (rref, pivot columns)."""
    w = (np.array(a, dtype=object) % p)
    m, n = w.shape
    r = 0
    pivots = []
    for c in range(n):
        piv = None
        for i in range(r, m):
            if w[i, c] % p:
                piv = i
                break
        if piv is None:
            continue
        w[[r, piv]] = w[[piv, r]]
        inv = pow(int(w[r, c]), p - 2, p)
        w[r, :] = [(x * inv) % p for x in w[r, :]]
        for i in range(m):
            if i != r and w[i, c]:
                coef = w[i, c]
                w[i, :] = [(x - coef * y) % p for x, y in zip(w[i, :], w[r, :])]
        pivots.append(c)
        r += 1
    return w[:r].astype(np.int64), pivots


def naive_rank(a, p):
    return len(naive_rref(a, p)[1])


def naive_kernel(a, p):
    """Right null space basis from the naive RREF."""
    a = np.asarray(a, dtype=np.int64)
    m, n = a.shape
    if m == 0:
        return np.eye(n, dtype=np.int64)
    r, pivots = naive_rref(a, p)
    free = [c for c in range(n) if c not in pivots]
    out = np.zeros((len(free), n), dtype=np.int64)
    for i, fcol in enumerate(free):
        out[i, fcol] = 1
        for j, pcol in enumerate(pivots):
            out[i, pcol] = (-int(r[j, fcol])) % p
    return out


def brute_colex_rank(subset) -> int:
    """Position of a subset in the brute-force colex enumeration."""
    subset = tuple(subset)
    k = len(subset)
    n = max(subset) + 1 if subset else 0
    universe = sorted(combinations(range(n), k), key=lambda s: s[::-1])
    return universe.index(subset)


def plane_count(d: int) -> int:
    return comb(d + 2, 2) if d >= 0 else 0


def ruled_count(e: int, a: int, b: int) -> int:
    if a < 0:
        return 0
    return sum(max(0, b - l * e + 1) for l in range(a + 1))


def brute_monomials_ruled(e: int, a: int, b: int):
    """Direct enumeration of u^i v^j s^k t^l with k+l=a, i+j+l*e=b."""
    out = set()
    if a < 0:
        return out
    for l in range(a + 1):
        k = a - l
        rem = b - l * e
        if rem < 0:
            continue
        for i in range(rem + 1):
            out.add((i, rem - i, k, l))
    return out
