"""Blocked exact Gaussian elimination over GF(p) for word-size primes.

All matrices are numpy int64 arrays with entries already reduced into
[0, p).  Products of two reduced entries fit a 64-bit accumulator for
p < 2^31 (the package default prime size), and the blocked updates go
through float64 GEMMs on 16-bit operand halves, which keeps every
intermediate below 2^53 and therefore exact.
"""

from __future__ import annotations

import numpy as np

# Panel width for blocked elimination.  Inner GEMM dimension equals the
# panel width, so 16-bit split products stay far below the float64
# integer ceiling (panel * 2^32 < 2^53 needs panel < 2^21).
PANEL = 128

_MASK16 = 0xFFFF


def mul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Exact (a @ b) % p for int64 matrices with entries in [0, p).

    Splits both operands into 16-bit halves and recombines four float64
    GEMMs, so the result is exact for p < 2^31 and inner dimensions up
    to 2^20.
    """
    m, k = a.shape
    k2, n = b.shape
    if k != k2:
        raise ValueError(f"shape mismatch {a.shape} @ {b.shape}")
    if m == 0 or n == 0 or k == 0:
        return np.zeros((m, n), dtype=np.int64)
    if k >= (1 << 20):
        # Chunk the inner dimension; never hit at desk scale.
        out = np.zeros((m, n), dtype=np.int64)
        for s in range(0, k, 1 << 19):
            out = (out + mul_mod(a[:, s:s + (1 << 19)], b[s:s + (1 << 19)], p)) % p
        return out
    ah = (a >> 16).astype(np.float64)
    al = (a & _MASK16).astype(np.float64)
    bh = (b >> 16).astype(np.float64)
    bl = (b & _MASK16).astype(np.float64)
    hh = (ah @ bh).astype(np.int64) % p
    mid = (ah @ bl + al @ bh).astype(np.int64) % p
    ll = (al @ bl).astype(np.int64) % p
    r32 = (1 << 32) % p
    r16 = (1 << 16) % p
    return (hh * r32 + mid * r16 + ll) % p


def _row_combo_mod(coef: np.ndarray, rows: np.ndarray, p: int) -> np.ndarray:
    """Exact (coef @ rows) % p for a single coefficient vector."""
    if coef.size == 0:
        return np.zeros(rows.shape[1] if rows.ndim == 2 else 0, dtype=np.int64)
    hi = coef >> 16
    lo = coef & _MASK16
    t = (hi @ rows) % p
    return ((t << 16) + (lo @ rows)) % p


def echelon_in_place(a: np.ndarray, p: int, panel: int = PANEL) -> list[int]:
    """Forward row echelon of `a` (modified in place).  Returns pivot columns.

    After the call rows 0..r-1 are the echelon rows (r = rank) and the
    remaining rows are zero on all processed columns.
    """
    m, n = a.shape
    if m == 0 or n == 0:
        return []
    pivcols: list[int] = []
    r = 0
    c0 = 0
    while c0 < n and r < m:
        c1 = min(c0 + panel, n)
        mult = np.zeros((m - r, c1 - c0), dtype=np.int64)
        urows = np.zeros((c1 - c0, n - c1), dtype=np.int64)
        k = 0
        for c in range(c0, c1):
            if r + k >= m:
                break
            colv = a[r + k:, c]
            nz = np.nonzero(colv)[0]
            if nz.size == 0:
                continue
            i0 = r + k + int(nz[0])
            if i0 != r + k:
                a[[r + k, i0]] = a[[i0, r + k]]
                mult[[k, i0 - r]] = mult[[i0 - r, k]]
            # Finalize this pivot row's trailing block against earlier
            # panel pivots before anything is eliminated with it.
            if k > 0:
                urows[k] = (a[r + k, c1:] - _row_combo_mod(mult[k, :k], urows[:k], p)) % p
            else:
                urows[k] = a[r + k, c1:]
            inv = pow(int(a[r + k, c]), p - 2, p)
            below = a[r + k + 1:, c]
            mrow = (below * inv) % p
            mult[k + 1:, k] = mrow
            if mrow.size:
                a[r + k + 1:, c:c1] = (a[r + k + 1:, c:c1]
                                       - np.outer(mrow, a[r + k, c:c1])) % p
            pivcols.append(c)
            k += 1
        if k:
            a[r:r + k, c1:] = urows[:k]
            low = mult[k:, :k]
            if low.size and n - c1 > 0:
                a[r + k:, c1:] = (a[r + k:, c1:] - mul_mod(low, urows[:k], p)) % p
        r += k
        c0 = c1
    return pivcols


def _rank_small(work: np.ndarray, p: int) -> int:
    """Plain single-pivot elimination; cheapest for small matrices."""
    m, n = work.shape
    r = 0
    for c in range(n):
        if r >= m:
            break
        nz = np.nonzero(work[r:, c])[0]
        if nz.size == 0:
            continue
        i0 = r + int(nz[0])
        if i0 != r:
            work[[r, i0]] = work[[i0, r]]
        if r + 1 < m:
            inv = pow(int(work[r, c]), p - 2, p)
            mult = work[r + 1:, c] * inv % p
            if np.any(mult):
                work[r + 1:, c:] = (work[r + 1:, c:]
                                    - np.outer(mult, work[r, c:])) % p
        r += 1
    return r


def rank(a: np.ndarray, p: int) -> int:
    """Rank over GF(p); `a` is copied, entries may be any int64 values."""
    m, n = a.shape
    if m == 0 or n == 0:
        return 0
    work = np.ascontiguousarray(a, dtype=np.int64) % p
    # The wide orientation keeps the per-pivot panel updates short.
    if m > n:
        work = np.ascontiguousarray(work.T)
        m, n = n, m
    if m * n <= 400_000 or m <= 64:
        return _rank_small(work, p)
    return len(echelon_in_place(work, p))


def pivot_rows(a: np.ndarray, p: int) -> np.ndarray:
    """Indices of a row subset spanning the row space (pivot columns of a^T)."""
    at = np.ascontiguousarray(np.asarray(a, dtype=np.int64).T) % p
    return np.array(echelon_in_place(at, p), dtype=np.int64)


def rref(a: np.ndarray, p: int, panel: int = PANEL) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form.

    Returns (R, pivcols) where R has one row per pivot, unit pivots and
    zeros above/below each pivot column.  The RREF only depends on the
    row space, so markedly tall inputs are first cut down to a spanning
    row subset found by a cheap transposed pass.
    """
    work = np.ascontiguousarray(a, dtype=np.int64) % p
    m, n = work.shape
    if m > n + 64:
        work = np.ascontiguousarray(work[pivot_rows(work, p)])
    pivcols = echelon_in_place(work, p, panel)
    r = len(pivcols)
    e = work[:r]
    if r == 0:
        return e, pivcols
    # Normalize pivots to 1.
    pivvals = e[np.arange(r), pivcols]
    invs = np.array([pow(int(v), p - 2, p) for v in pivvals], dtype=np.int64)
    e = (e * invs[:, None]) % p
    # Blocked upward elimination, right-to-left over pivot blocks.
    s1 = r
    while s1 > 0:
        s0 = max(0, s1 - panel)
        left = pivcols[s0]
        # Reduce the block rows against each other, highest pivot first.
        for j in range(s1 - 1, s0, -1):
            coef = e[s0:j, pivcols[j]]
            if np.any(coef):
                e[s0:j, left:] = (e[s0:j, left:]
                                  - np.outer(coef, e[j, left:])) % p
        if s0 > 0:
            coefs = e[:s0, pivcols[s0:s1]]
            if np.any(coefs):
                e[:s0, left:] = (e[:s0, left:] - mul_mod(coefs, e[s0:s1, left:], p)) % p
        s1 = s0
    return e, pivcols


def kernel(a: np.ndarray, p: int) -> np.ndarray:
    """Basis of the right null space, one vector per row, from the RREF.

    Each basis vector carries a unit coordinate on its free column and
    zeros on the other free columns, so independence is structural.
    """
    m, n = a.shape
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    if m == 0:
        return np.eye(n, dtype=np.int64)
    r, pivcols = rref(a, p)
    free = [c for c in range(n) if c not in set(pivcols)]
    out = np.zeros((len(free), n), dtype=np.int64)
    for idx, f in enumerate(free):
        out[idx, f] = 1
        if pivcols:
            out[idx, pivcols] = (-r[:, f]) % p
    return out


class SpanReducer:
    """Normal forms modulo the row space of a fixed matrix.

    Precomputes the RREF once; `reduce` maps any vector to its unique
    representative supported away from the pivot coordinates, so a
    vector lies in the span iff its normal form is zero.
    """

    def __init__(self, rows: np.ndarray, p: int):
        self.p = p
        self.ncols = rows.shape[1] if rows.ndim == 2 else 0
        if rows.size == 0:
            self.rref = np.zeros((0, self.ncols), dtype=np.int64)
            self.pivcols: list[int] = []
        else:
            self.rref, self.pivcols = rref(rows, p)

    @property
    def rank(self) -> int:
        return len(self.pivcols)

    def reduce(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.int64) % self.p
        if not self.pivcols:
            return v
        coef = v[self.pivcols]
        if not np.any(coef):
            return v
        return (v - _row_combo_mod(coef, self.rref, self.p)) % self.p

    def reduce_rows(self, mat: np.ndarray) -> np.ndarray:
        mat = np.asarray(mat, dtype=np.int64) % self.p
        if not self.pivcols or mat.shape[0] == 0:
            return mat
        coefs = mat[:, self.pivcols]
        if not np.any(coefs):
            return mat
        return (mat - mul_mod(coefs, self.rref, self.p)) % self.p

    def contains(self, v: np.ndarray) -> bool:
        return not np.any(self.reduce(v))


class ColumnSolver:
    """Solve K @ y = v for a fixed matrix K with independent columns.

    Stores the RREF of K^T together with the accumulated row transform,
    so solving is a pivot-coordinate lookup plus one small product.
    """

    def __init__(self, k_matrix: np.ndarray, p: int):
        self.p = p
        self.k = np.asarray(k_matrix, dtype=np.int64) % p
        t = self.k.shape[1]
        aug = np.hstack([self.k.T, np.eye(t, dtype=np.int64)])
        r, pivcols = rref(aug, p)
        if len(pivcols) != t or (t and pivcols[-1] >= self.k.shape[0]):
            raise ValueError("columns are not linearly independent")
        self.e = r[:, :self.k.shape[0]]
        self.u = r[:, self.k.shape[0]:]
        self.pivcols = pivcols

    def solve(self, v: np.ndarray) -> np.ndarray:
        """Coordinates y with K @ y = v; raises if v is outside the span."""
        v = np.asarray(v, dtype=np.int64) % self.p
        c = v[self.pivcols]
        if np.any(_row_combo_mod(c, self.e, self.p) != v):
            raise ValueError("vector not in the column span")
        return _row_combo_mod(c, self.u, self.p)

    def solve_rows(self, mat: np.ndarray) -> np.ndarray:
        """Row-wise solve for a stack of vectors."""
        mat = np.asarray(mat, dtype=np.int64) % self.p
        if mat.shape[0] == 0:
            return np.zeros((0, self.k.shape[1]), dtype=np.int64)
        c = mat[:, self.pivcols]
        if np.any(mul_mod(c, self.e, self.p) != mat):
            raise ValueError("some vector not in the column span")
        return mul_mod(c, self.u, self.p)
