"""Small exact polynomial helpers over GF(p).

Multivariate polynomials are dicts mapping exponent tuples to nonzero
coefficients; univariate ones are ascending coefficient lists.  Sizes
stay tiny (degrees below ~30), so plain Python integer arithmetic is
used throughout and never overflows.
"""

from __future__ import annotations

import random

Poly = dict  # exponent tuple -> coefficient in [1, p-1]


def poly_from_vector(vec, monomials, p: int) -> Poly:
    out = {}
    for c, m in zip(vec, monomials):
        c = int(c) % p
        if c:
            out[tuple(m)] = c
    return out


def poly_add(f: Poly, g: Poly, p: int) -> Poly:
    out = dict(f)
    for m, c in g.items():
        nc = (out.get(m, 0) + c) % p
        if nc:
            out[m] = nc
        else:
            out.pop(m, None)
    return out


def poly_scale(f: Poly, a: int, p: int) -> Poly:
    a %= p
    if a == 0:
        return {}
    return {m: c * a % p for m, c in f.items()}


def poly_mul(f: Poly, g: Poly, p: int) -> Poly:
    out: Poly = {}
    for m1, c1 in f.items():
        for m2, c2 in g.items():
            m = tuple(x + y for x, y in zip(m1, m2))
            nc = (out.get(m, 0) + c1 * c2) % p
            if nc:
                out[m] = nc
            else:
                out.pop(m, None)
    return out


def poly_eval(f: Poly, point, p: int) -> int:
    total = 0
    for m, c in f.items():
        term = c
        for x, ex in zip(point, m):
            if ex:
                term = term * pow(int(x) % p, ex, p) % p
        total = (total + term) % p
    return total


def poly_partial(f: Poly, var: int, p: int) -> Poly:
    out = {}
    for m, c in f.items():
        if m[var]:
            nm = list(m)
            nc = c * nm[var] % p
            nm[var] -= 1
            if nc:
                out[tuple(nm)] = nc
    return out


def poly_is_zero(f: Poly) -> bool:
    return not f


# -- univariate arithmetic ---------------------------------------------------

def utrim(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def umul(f: list[int], g: list[int], p: int) -> list[int]:
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                if b:
                    out[i + j] = (out[i + j] + a * b) % p
    return utrim(out)


def udivmod(f: list[int], g: list[int], p: int) -> tuple[list[int], list[int]]:
    f = list(f)
    if not g:
        raise ZeroDivisionError("division by zero polynomial")
    inv = pow(g[-1], p - 2, p)
    q = [0] * max(0, len(f) - len(g) + 1)
    while len(f) >= len(g) and utrim(f):
        d = len(f) - len(g)
        c = f[-1] * inv % p
        q[d] = c
        for i, b in enumerate(g):
            f[d + i] = (f[d + i] - c * b) % p
        utrim(f)
    return utrim(q), utrim(f)


def ugcd(f: list[int], g: list[int], p: int) -> list[int]:
    f, g = utrim(list(f)), utrim(list(g))
    while g:
        _, r = udivmod(f, g, p)
        f, g = g, r
    if f:
        inv = pow(f[-1], p - 2, p)
        f = [c * inv % p for c in f]
    return f


def upowmod(base: list[int], exp: int, mod: list[int], p: int) -> list[int]:
    if len(utrim(list(mod))) <= 1:
        return []
    result = [1]
    _, base = udivmod(base, mod, p)
    while exp:
        if exp & 1:
            _, result = udivmod(umul(result, base, p), mod, p)
        _, base = udivmod(umul(base, base, p), mod, p)
        exp >>= 1
    return result


def uroots(f: list[int], p: int, rng: random.Random) -> list[int]:
    """All GF(p) roots of a univariate polynomial (randomized splitting)."""
    f = utrim(list(f))
    if not f:
        raise ValueError("zero polynomial has every root")
    roots = []
    while f and f[0] == 0:
        roots.append(0)
        f = f[1:]
    if len(f) <= 1:
        return sorted(set(roots))
    # Isolate the split part: gcd(x^p - x, f).
    xp = upowmod([0, 1], p, f, p)
    t = list(xp) + [0] * max(0, 2 - len(xp))
    t[1] = (t[1] - 1) % p
    g = ugcd(utrim(t), f, p)
    stack = [g]
    while stack:
        h = utrim(stack.pop())
        if len(h) <= 1:
            continue
        if len(h) == 2:
            roots.append((-h[0]) * pow(h[1], p - 2, p) % p)
            continue
        # Random shift equal-degree splitting into linear factors.
        while True:
            delta = rng.randrange(p)
            shifted = upowmod([delta, 1], (p - 1) // 2, h, p)
            shifted = utrim([(c - (1 if i == 0 else 0)) % p
                             for i, c in enumerate(shifted + [0])])
            d = ugcd(shifted, h, p)
            if 0 < len(d) - 1 < len(h) - 1:
                q, r = udivmod(h, d, p)
                assert not r
                stack.append(d)
                stack.append(q)
                break
    return sorted(set(roots))


# -- truncated power series (lists of length order+1) ------------------------

def series_mul(a: list[int], b: list[int], p: int, order: int) -> list[int]:
    out = [0] * (order + 1)
    for i, x in enumerate(a[:order + 1]):
        if x:
            for j, y in enumerate(b[:order + 1 - i]):
                if y:
                    out[i + j] = (out[i + j] + x * y) % p
    return out


def series_pow(a: list[int], n: int, p: int, order: int) -> list[int]:
    out = [1] + [0] * order
    for _ in range(n):
        out = series_mul(out, a, p, order)
    return out
