"""Exact linear algebra over prime fields GF(p).

This is the arithmetic substrate of the package: ranks, kernels and
span membership of sparse integer matrices modulo a word-size prime.
Rank computation runs a Markowitz-style sparse elimination first and
falls back to blocked dense elimination once fill-in makes the active
submatrix dense (threshold 0.25); at desk scale the dense kernel does
the heavy lifting and the sparse pass strips the cheap pivots.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from . import _gauss

#: Default prime bit length: products of two entries fit a 64-bit
#: (double-width) accumulator without overflow.
DEFAULT_PRIME_BITS = 31

_WORD_BITS = 64
_MAX_PRIME_BITS = _WORD_BITS - 2

#: Density of the active submatrix at which sparse elimination hands
#: the remainder to the dense kernel.
FILL_IN_THRESHOLD = 0.25

#: Below this column count the dense kernel is effectively free and the
#: sparse front end is skipped.
DENSE_CUTOFF = 600

_MR_ROUNDS = 48  # error probability < 4^-48 < 2^-80
_MR_FIXED_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


class PrecisionError(ValueError):
    """Requested parameters fall outside the exact-arithmetic envelope."""


def _miller_rabin(n: int, base: int) -> bool:
    if n % base == 0:
        return n == base
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    x = pow(base, d, n)
    if x in (1, n - 1):
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    """Primality for word-size integers.

    Runs randomized Miller-Rabin witnesses (error < 2^-80), then a
    deterministic confirmation: trial division up to the square root
    for moderate n, and the fixed witness set that is deterministic
    below 2^64 otherwise.
    """
    if n < 2:
        return False
    for small in (2, 3, 5, 7, 11, 13):
        if n % small == 0:
            return n == small
    rng = random.Random(n ^ 0x5EED)
    for _ in range(_MR_ROUNDS):
        a = rng.randrange(2, n - 1)
        if not _miller_rabin(n, a):
            return False
    if n < (1 << 42):
        i = 17
        while i * i <= n:
            if n % i == 0:
                return False
            i += 2
        return True
    return all(_miller_rabin(n, a) for a in _MR_FIXED_BASES)


@dataclass(frozen=True)
class Prime:
    """A verified word-size prime modulus."""

    value: int

    def __post_init__(self):
        if not isinstance(self.value, int) or self.value.bit_length() > _MAX_PRIME_BITS + 2:
            raise PrecisionError(f"modulus {self.value!r} exceeds the word-size envelope")
        if not is_prime(self.value):
            raise ValueError(f"{self.value} is not prime")

    @property
    def p(self) -> int:
        return self.value

    def __int__(self) -> int:
        return self.value


def random_prime(bits: int, seed: int) -> Prime:
    """Reproducible prime with the requested bit length.

    Args:
        bits: bit length, 20 <= bits <= word size - 2.
        seed: RNG seed; equal seeds give equal primes.
    """
    if not 20 <= bits <= _MAX_PRIME_BITS:
        raise ValueError(f"bits must be in [20, {_MAX_PRIME_BITS}], got {bits}")
    rng = random.Random(("prime", bits, seed).__repr__())
    while True:
        cand = rng.getrandbits(bits - 1) | (1 << (bits - 1)) | 1
        if is_prime(cand):
            return Prime(cand)


@dataclass
class VectorSpaceBasis:
    """An ordered independent family of coordinate vectors over GF(p).

    `vectors` holds one vector per row; independence is an invariant,
    either certified structurally by the constructor (kernel bases have
    a unit coordinate pattern) or verified by a rank computation.
    """

    ambient_dim: int
    modulus: Prime
    vectors: np.ndarray
    ambient: str = ""
    _verified: bool = field(default=False, repr=False)
    _reducer: object = field(default=None, repr=False)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.int64) % self.modulus.p
        if self.vectors.ndim != 2:
            self.vectors = self.vectors.reshape(-1, self.ambient_dim)
        if self.vectors.shape[1] != self.ambient_dim:
            raise ValueError("vector length does not match ambient dimension")
        if not self._verified:
            if _gauss.rank(self.vectors, self.modulus.p) != self.vectors.shape[0]:
                raise ValueError("basis vectors are not linearly independent")
            self._verified = True

    @property
    def dimension(self) -> int:
        return self.vectors.shape[0]

    def __len__(self) -> int:
        return self.dimension

    def reducer(self) -> _gauss.SpanReducer:
        if self._reducer is None:
            self._reducer = _gauss.SpanReducer(self.vectors, self.modulus.p)
        return self._reducer

    def contains(self, v: np.ndarray) -> bool:
        return self.reducer().contains(v)


class PrimeFieldMatrix:
    """Immutable sparse matrix over GF(p).

    Entries are kept as parallel coordinate arrays sorted row-major,
    with values normalized into [1, p-1] and duplicate coordinates
    summed away, so the stored form is canonical.
    """

    __slots__ = ("rows", "cols", "modulus", "_rr", "_cc", "_vv", "_rank")

    def __init__(self, rows: int, cols: int, modulus: Prime,
                 rr: np.ndarray, cc: np.ndarray, vv: np.ndarray,
                 _canonical: bool = False):
        self.rows = int(rows)
        self.cols = int(cols)
        self.modulus = modulus
        rr = np.asarray(rr, dtype=np.int64)
        cc = np.asarray(cc, dtype=np.int64)
        vv = np.asarray(vv, dtype=np.int64)
        if not _canonical:
            rr, cc, vv = self._canonicalize(rows, cols, modulus.p, rr, cc, vv)
        self._rr, self._cc, self._vv = rr, cc, vv
        self._rank: int | None = None

    @staticmethod
    def _canonicalize(rows, cols, p, rr, cc, vv):
        if rr.size:
            if rr.min() < 0 or rr.max() >= rows or cc.min() < 0 or cc.max() >= cols:
                raise ValueError("entry index out of bounds")
        vv = vv % p
        keys = rr * cols + cc
        order = np.argsort(keys, kind="stable")
        keys, vv = keys[order], vv[order]
        if keys.size:
            uniq, inverse = np.unique(keys, return_inverse=True)
            acc = np.zeros(uniq.size, dtype=np.int64)
            np.add.at(acc, inverse, vv)   # sums < nnz * p, safe for desk scale
            acc %= p
            keep = acc != 0
            uniq, acc = uniq[keep], acc[keep]
            rr, cc, vv = uniq // cols, uniq % cols, acc
        else:
            rr = cc = vv = np.zeros(0, dtype=np.int64)
        return rr, cc, vv

    # -- constructors -------------------------------------------------
    @classmethod
    def from_entries(cls, rows: int, cols: int, modulus: Prime, entries) -> "PrimeFieldMatrix":
        entries = list(entries)
        if entries:
            arr = np.asarray(entries, dtype=np.int64)
            return cls(rows, cols, modulus, arr[:, 0], arr[:, 1], arr[:, 2])
        z = np.zeros(0, dtype=np.int64)
        return cls(rows, cols, modulus, z, z, z, _canonical=True)

    @classmethod
    def from_arrays(cls, rows: int, cols: int, modulus: Prime, rr, cc, vv) -> "PrimeFieldMatrix":
        return cls(rows, cols, modulus, rr, cc, vv)

    @classmethod
    def from_dense(cls, arr: np.ndarray, modulus: Prime) -> "PrimeFieldMatrix":
        arr = np.asarray(arr, dtype=np.int64) % modulus.p
        rr, cc = np.nonzero(arr)
        return cls(arr.shape[0], arr.shape[1], modulus,
                   rr.astype(np.int64), cc.astype(np.int64), arr[rr, cc],
                   _canonical=True)

    @classmethod
    def zeros(cls, rows: int, cols: int, modulus: Prime) -> "PrimeFieldMatrix":
        z = np.zeros(0, dtype=np.int64)
        return cls(rows, cols, modulus, z, z, z, _canonical=True)

    @classmethod
    def identity(cls, n: int, modulus: Prime) -> "PrimeFieldMatrix":
        idx = np.arange(n, dtype=np.int64)
        return cls(n, n, modulus, idx, idx, np.ones(n, dtype=np.int64), _canonical=True)

    # -- views ---------------------------------------------------------
    @property
    def entries(self) -> list[tuple[int, int, int]]:
        return [(int(r), int(c), int(v)) for r, c, v in zip(self._rr, self._cc, self._vv)]

    @property
    def nnz(self) -> int:
        return int(self._vv.size)

    @property
    def density(self) -> float:
        if self.rows == 0 or self.cols == 0:
            return 0.0
        return self.nnz / (self.rows * self.cols)

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.int64)
        if self.nnz:
            out[self._rr, self._cc] = self._vv
        return out

    def transpose(self) -> "PrimeFieldMatrix":
        return PrimeFieldMatrix(self.cols, self.rows, self.modulus,
                                self._cc, self._rr, self._vv)

    def matmul(self, other: "PrimeFieldMatrix") -> "PrimeFieldMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matmul")
        if self.modulus.p != other.modulus.p:
            raise ValueError("modulus mismatch in matmul")
        prod = _gauss.mul_mod(self.to_dense(), other.to_dense(), self.modulus.p)
        return PrimeFieldMatrix.from_dense(prod, self.modulus)

    def is_zero(self) -> bool:
        return self.nnz == 0

    def __eq__(self, other) -> bool:
        return (isinstance(other, PrimeFieldMatrix)
                and self.rows == other.rows and self.cols == other.cols
                and self.modulus.p == other.modulus.p
                and np.array_equal(self._rr, other._rr)
                and np.array_equal(self._cc, other._cc)
                and np.array_equal(self._vv, other._vv))

    def __repr__(self) -> str:
        return (f"PrimeFieldMatrix({self.rows}x{self.cols}, p={self.modulus.p}, "
                f"nnz={self.nnz})")

    # -- rank / kernel ---------------------------------------------------
    def rank(self) -> int:
        if self._rank is None:
            self._rank = _rank_pipeline(self)
        return self._rank

    def spanning_row_indices(self) -> np.ndarray:
        """Indices of original rows spanning the row space.

        Pivot columns of the transpose index independent original rows;
        the sparse pass finds most of them and the dense finish on the
        remainder supplies the rest.  Tall sparse matrices shrink to
        roughly rank-many rows this way.
        """
        mt = self.transpose()
        piv_pairs, rows_left = _sparse_core(mt)
        found = [c for (_r, c) in piv_pairs]
        if rows_left:
            act_cols = sorted({c for row in rows_left.values() for c in row})
            if act_cols:
                col_pos = {c: i for i, c in enumerate(act_cols)}
                rest = np.zeros((len(rows_left), len(act_cols)), dtype=np.int64)
                for i, row in enumerate(rows_left.values()):
                    for c, v in row.items():
                        rest[i, col_pos[c]] = v
                for local in _gauss.echelon_in_place(rest, self.modulus.p):
                    found.append(act_cols[local])
        return np.array(sorted(found), dtype=np.int64)

    def row_space_rows(self) -> np.ndarray:
        """A spanning subset of the original rows, densely materialized."""
        if (self.rows == 0 or self.cols == 0 or self.nnz == 0
                or self.rows <= DENSE_CUTOFF
                or self.density > FILL_IN_THRESHOLD):
            return self.to_dense()
        keep = self.spanning_row_indices()
        pos = {int(r): i for i, r in enumerate(keep)}
        out = np.zeros((len(keep), self.cols), dtype=np.int64)
        mask = np.isin(self._rr, keep)
        for r, c, v in zip(self._rr[mask], self._cc[mask], self._vv[mask]):
            out[pos[int(r)], c] = v
        return out

    def kernel_basis(self) -> VectorSpaceBasis:
        vecs = _gauss.kernel(self.row_space_rows(), self.modulus.p)
        return VectorSpaceBasis(self.cols, self.modulus, vecs,
                                ambient="kernel", _verified=True)


# -- spec-level operation surface ------------------------------------------

def rank(m: PrimeFieldMatrix) -> int:
    """Rank of `m` over GF(p); deterministic for a fixed input."""
    return m.rank()


def kernel_basis(m: PrimeFieldMatrix) -> VectorSpaceBasis:
    """Basis of the right null space; dimension = cols - rank."""
    return m.kernel_basis()


def in_span(v: np.ndarray, basis: VectorSpaceBasis) -> bool:
    """True iff `v` lies in the GF(p)-span of the basis vectors."""
    v = np.asarray(v, dtype=np.int64)
    if v.shape != (basis.ambient_dim,):
        raise ValueError("vector has wrong ambient dimension")
    return basis.contains(v)


def dense_rank(arr: np.ndarray, p: int) -> int:
    """Rank of a dense int64 array modulo p (blocked elimination)."""
    return _gauss.rank(np.asarray(arr, dtype=np.int64), p)


# -- sparse elimination front end -------------------------------------------

def _rank_pipeline(m: PrimeFieldMatrix) -> int:
    if m.rows == 0 or m.cols == 0 or m.nnz == 0:
        return 0
    if min(m.rows, m.cols) <= DENSE_CUTOFF or m.density > FILL_IN_THRESHOLD:
        return dense_rank(m.to_dense(), m.modulus.p)
    done, rest_rows, rest_cols, rest = _sparse_eliminate(m)
    if rest is None:
        return done
    return done + dense_rank(rest, m.modulus.p)


def _sparse_core(m: PrimeFieldMatrix):
    """Markowitz-style sparse elimination until fill-in crosses the threshold.

    Returns (pivot (row, col) pairs in elimination order, remaining
    active rows as dicts of column -> value).
    """
    p = m.modulus.p
    rows: dict[int, dict[int, int]] = {}
    for r, c, v in zip(m._rr, m._cc, m._vv):
        rows.setdefault(int(r), {})[int(c)] = int(v)
    col_rows: dict[int, set[int]] = {}
    for r, cols_of in rows.items():
        for c in cols_of:
            col_rows.setdefault(c, set()).add(r)

    nnz = m.nnz
    piv_pairs: list[tuple[int, int]] = []
    budget = 4_000_000  # python-side update budget before bailing out
    while col_rows:
        n_active_rows = len(rows)
        n_active_cols = len(col_rows)
        if n_active_rows == 0 or n_active_cols == 0:
            break
        if (nnz / (n_active_rows * n_active_cols) > FILL_IN_THRESHOLD
                or min(n_active_rows, n_active_cols) <= DENSE_CUTOFF
                or budget <= 0):
            break
        # Cheapest column, then the sparsest row inside it (Markowitz).
        c_piv = min(col_rows, key=lambda c: len(col_rows[c]))
        r_piv = min(col_rows[c_piv], key=lambda r: len(rows[r]))
        piv_row = rows.pop(r_piv)
        inv = pow(piv_row[c_piv], p - 2, p)
        for c in piv_row:
            col_rows[c].discard(r_piv)
            if not col_rows[c]:
                del col_rows[c]
        nnz -= len(piv_row)
        for r in list(col_rows.get(c_piv, ())):
            row = rows[r]
            coef = row[c_piv] * inv % p
            for c, v in piv_row.items():
                cur = row.get(c)
                if cur is None:
                    nv = (-coef * v) % p
                    if nv:
                        row[c] = nv
                        col_rows.setdefault(c, set()).add(r)
                        nnz += 1
                else:
                    nv = (cur - coef * v) % p
                    if nv:
                        row[c] = nv
                    else:
                        del row[c]
                        col_rows[c].discard(r)
                        if not col_rows[c]:
                            del col_rows[c]
                        nnz -= 1
            budget -= len(piv_row)
            if not row:
                del rows[r]
        piv_pairs.append((r_piv, c_piv))
    return piv_pairs, rows


def _sparse_eliminate(m: PrimeFieldMatrix):
    """Front-end for rank: sparse pivots, then the dense remainder."""
    piv_pairs, rows = _sparse_core(m)
    done = len(piv_pairs)
    if not rows:
        return done, 0, 0, None
    act_cols = sorted({c for row in rows.values() for c in row})
    if not act_cols:
        return done, 0, 0, None
    col_pos = {c: i for i, c in enumerate(act_cols)}
    rest = np.zeros((len(rows), len(act_cols)), dtype=np.int64)
    for i, row in enumerate(rows.values()):
        for c, v in row.items():
            rest[i, col_pos[c]] = v
    return done, len(rows), len(act_cols), rest
