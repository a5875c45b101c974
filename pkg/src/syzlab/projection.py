"""Projection of syzygies from a point: pi_x, eta_x, H^0(del) and checks.

A point x with ev_x(v0) = 1 splits V = W_x + <v0> and every wedge power
as wedge^k V = wedge^k W + v0 ^ wedge^(k-1) W.  In colex coordinates
adapted to (w_0..w_{n-2}, v0) the v0-block is literally the trailing
block of the coefficient vector, so projection is coefficient surgery
after one wedge-power change of basis.  The contraction map that sends
b (x) w to sum_t (-1)^t v_{w_t} (x) (b (x) w minus v_{w_t}) realizes the
global morphism; composing it with ev_x reproduces the projected and
relifted cochain bit for bit, which the checks assert.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import _gauss
from .ff_linalg import PrimeFieldMatrix, VectorSpaceBasis
from .graded_modules import (GradedModule, PointOnCurve, evaluation_split,
                             truncate_at_points)
from .koszul import (ClassSpace, apply_differential, assemble_differential,
                     cell_dim, cell_dim_best, verify_standing_hypotheses,
                     koszul_dimension)
from .multilinear import wedge_list, wedge_rank


class StandingHypothesisError(ValueError):
    """The module violates the degree-zero vanishing hypotheses."""


class InclusionNotInjectiveError(RuntimeError):
    """The truncated-module inclusion failed its injectivity rank check.

    Surfaced instead of silently repaired; indicates a construction bug
    or an unexpected degeneration of the sampled point.
    """


@dataclass
class SyzygyClass:
    """A Koszul cocycle representative at position (p, q).

    The representative lives in piece_q (x) wedge^p of the generator
    space of `module`; being a cocycle is asserted on construction.
    """

    module: GradedModule
    p: int
    q: int
    rep: np.ndarray
    context: str = "V"

    def __post_init__(self):
        self.rep = np.asarray(self.rep, dtype=np.int64) % self.module.p
        expected = self.module.dim(self.q) * comb(self.module.vdim, self.p)
        if self.rep.shape != (expected,):
            raise ValueError("representative has the wrong cochain length")
        if np.any(apply_differential(self.module, self.p, self.q, self.rep)):
            raise ValueError("representative is not a cocycle")

    def is_zero_rep(self) -> bool:
        return not np.any(self.rep)


def _wedge_power_matrix(cols: np.ndarray, k: int, p: int) -> np.ndarray:
    """Matrix of the k-th wedge power of a linear map given by columns."""
    n, m = cols.shape
    subsets = wedge_list(m, k)
    out = np.zeros((comb(n, k), len(subsets)), dtype=np.int64)
    for ci, sub in enumerate(subsets):
        cur = {(): 1}
        for col_idx in sub:
            col = cols[:, col_idx]
            nxt: dict = {}
            for t_set, cf in cur.items():
                for i in range(n):
                    c = int(col[i]) % p
                    if c == 0 or i in t_set:
                        continue
                    greater = sum(1 for t in t_set if t > i)
                    sgn = -1 if greater % 2 else 1
                    merged = tuple(sorted(t_set + (i,)))
                    val = (nxt.get(merged, 0) + sgn * cf * c) % p
                    if val:
                        nxt[merged] = val
                    else:
                        nxt.pop(merged, None)
            cur = nxt
        for t_set, cf in cur.items():
            out[wedge_rank(t_set), ci] = cf
    return out


class ProjectionContext:
    """Everything attached to one projection center x.

    Carries the evaluation splitting, the change of basis g = [W | v0]
    with its inverse, the module viewed over W_x, and (optionally) the
    point-truncated module over the same W basis for the containment
    check.  Wedge-power transforms are cached per degree.
    """

    def __init__(self, module: GradedModule, x: PointOnCurve | None = None,
                 v0: np.ndarray | None = None,
                 wbasis: VectorSpaceBasis | None = None,
                 build_truncated: bool = False, t_qmax: int = 2):
        self.module = module
        self.x = x
        self.pp = module.p
        if v0 is None or wbasis is None:
            if x is None:
                raise ValueError("need a point or an explicit splitting")
            v0, wbasis, _ = evaluation_split(module, x)
        self.v0 = np.asarray(v0, dtype=np.int64) % self.pp
        self.wbasis = wbasis
        n = module.vdim
        g = np.zeros((n, n), dtype=np.int64)
        g[:, :n - 1] = wbasis.vectors.T % self.pp
        g[:, n - 1] = self.v0
        self.g = g
        self.ginv = self._invert(g)
        self.w_module = module.with_generators(g[:, :n - 1], note="W_x")
        self.t_module = None
        if build_truncated:
            if x is None:
                raise ValueError("truncated module needs an actual point")
            self.t_module = truncate_at_points(module, [(x, 1)], qmax=t_qmax,
                                               wbasis=wbasis)
        self._wp_cache: dict = {}
        self._image_cache: dict = {}

    def _invert(self, g: np.ndarray) -> np.ndarray:
        n = g.shape[0]
        aug = np.hstack([g, np.eye(n, dtype=np.int64)])
        r, piv = _gauss.rref(aug, self.pp)
        if piv != list(range(n)):
            raise ValueError("splitting vectors are not a basis of V")
        return r[:, n:]

    def wedge_transform(self, k: int, direction: str) -> np.ndarray:
        key = (k, direction)
        got = self._wp_cache.get(key)
        if got is None:
            src = self.ginv if direction == "to_adapted" else self.g
            got = _wedge_power_matrix(src, k, self.pp)
            self._wp_cache[key] = got
        return got

    def to_adapted(self, vec: np.ndarray, q: int, k: int) -> np.ndarray:
        z = np.asarray(vec, dtype=np.int64).reshape(self.module.dim(q), -1)
        wp = self.wedge_transform(k, "to_adapted")
        return _gauss.mul_mod(z % self.pp, wp.T, self.pp)

    def to_standard(self, mat: np.ndarray, k: int) -> np.ndarray:
        wp = self.wedge_transform(k, "to_standard")
        return _gauss.mul_mod(mat % self.pp, wp.T, self.pp)


def project_syzygy(alpha: SyzygyClass, ctx: ProjectionContext) -> SyzygyClass:
    """Projection pi_x: the v0-component of a degree-(p+1) cocycle.

    Writes the representative in the basis adapted to W_x + <v0>, keeps
    the trailing v0-block of the wedge coordinates (with the sign that
    moves v0 to the front), and returns it as a cocycle of the Koszul
    complex over W_x.  The line L_x is trivialized by ev_x(v0) = 1.
    """
    if alpha.module is not ctx.module or alpha.context != "V":
        raise ValueError("syzygy does not live on the context module over V")
    if alpha.q != 1:
        raise ValueError("projection is implemented for the q = 1 strand")
    n = ctx.module.vdim
    p1 = alpha.p
    p = p1 - 1
    adapted = ctx.to_adapted(alpha.rep, alpha.q, p1)
    head = comb(n - 1, p1)
    tail = adapted[:, head:]
    sign = 1 if p % 2 == 0 else ctx.pp - 1
    gamma = (tail * sign) % ctx.pp
    return SyzygyClass(ctx.w_module, p, 1, gamma.reshape(-1), context="W")


def lift_eta(beta: SyzygyClass, ctx: ProjectionContext) -> SyzygyClass:
    """Lift eta_x: view a W_x-cocycle as a V-cocycle (same representative)."""
    if beta.module is not ctx.w_module or beta.context != "W":
        raise ValueError("syzygy does not live on the context W-complex")
    n = ctx.module.vdim
    k = beta.p
    nb = ctx.module.dim(beta.q)
    z = beta.rep.reshape(nb, comb(n - 1, k))
    padded = np.zeros((nb, comb(n, k)), dtype=np.int64)
    padded[:, :comb(n - 1, k)] = z
    std = ctx.to_standard(padded, k)
    return SyzygyClass(ctx.module, beta.p, beta.q, std.reshape(-1), context="V")


def contract_components(module: GradedModule, p1: int, q: int,
                        vec: np.ndarray) -> list[np.ndarray]:
    """Components c_i of the equivariant contraction of the wedge factor.

    delta(b (x) w) = sum_t (-1)^t v_{w_t} (x) (b (x) w without w_t);
    returns one cochain of degree (p1 - 1, q) per generator index i.
    """
    n = module.vdim
    pp = module.p
    w, ranks, rem = _koszul_wedge_data(n, p1)
    nb = module.dim(q)
    z = np.asarray(vec, dtype=np.int64).reshape(nb, comb(n, p1)) % pp
    comps = [np.zeros((nb, comb(n, p1 - 1)), dtype=np.int64) for _ in range(n)]
    for t in range(p1):
        sign = 1 if t % 2 == 0 else pp - 1
        for i in range(n):
            sel = np.nonzero(w[:, t] == i)[0]
            if sel.size == 0:
                continue
            vals = z[:, ranks[sel]] * sign % pp
            np.add.at(comps[i], (slice(None), rem[sel, t]), vals)
    return [(c % pp).reshape(-1) for c in comps]


def _koszul_wedge_data(n: int, p: int):
    from .koszul import _wedge_data
    return _wedge_data(n, p)


def remark_identity_check(alpha: SyzygyClass, ctx: ProjectionContext) -> bool:
    """Bit-exact cochain identity del_x = (ev_x (x) id) o H^0(del).

    The left side is the projected-and-relifted representative, the
    right side contracts the wedge factor and pairs with the evaluation
    values ev_x(v_i); both land in B_1 (x) wedge^p V and must agree
    entry for entry.
    """
    pp = ctx.pp
    lifted = lift_eta(project_syzygy(alpha, ctx), ctx)
    comps = contract_components(ctx.module, alpha.p, alpha.q, alpha.rep)
    # ev_x on V coordinates: ev(v_i) are recovered from the splitting:
    # ev(v0) = 1 and ev(W) = 0, so ev = last row of g^{-1}.
    ev = ctx.ginv[ctx.module.vdim - 1]
    total = np.zeros_like(comps[0])
    for i, c in enumerate(comps):
        e = int(ev[i]) % pp
        if e:
            total = (total + e * c) % pp
    return np.array_equal(total, lifted.rep)


def del_global(module: GradedModule, p1: int):
    """Matrix of H^0(del): K_{p1,1}(B,V) -> V (x) K_{p1-1,1}(B,V).

    Verifies the standing hypotheses first (computation refused on
    failure), fixes deterministic class bases on both sides, applies
    the contraction to each basis class and records the coordinates.
    Returns (matrix, domain ClassSpace, target ClassSpace).
    """
    if not verify_standing_hypotheses(module, [p1, p1 + 1]):
        raise StandingHypothesisError("K_{p,0} vanishing fails; del refused")
    cs_hi = ClassSpace(module, p1, 1)
    cs_lo = ClassSpace(module, p1 - 1, 1)
    basis_hi = cs_hi.class_basis()
    kappa = basis_hi.shape[0]
    if kappa == 0:
        return (PrimeFieldMatrix.zeros(module.vdim * cs_lo.class_basis().shape[0],
                                       0, module.prime), cs_hi, cs_lo)
    basis_lo = cs_lo.class_basis()
    solver = _gauss.ColumnSolver(basis_lo.T, module.p)
    n = module.vdim
    cols = []
    for s in range(kappa):
        comps = contract_components(module, p1, 1, basis_hi[s])
        coords = [solver.solve(cs_lo.nf(c)) for c in comps]
        cols.append(np.concatenate(coords))
    mat = np.array(cols, dtype=np.int64).T
    return PrimeFieldMatrix.from_dense(mat, module.prime), cs_hi, cs_lo


def survival_sample(alpha: SyzygyClass, points: list[PointOnCurve],
                    module: GradedModule) -> tuple[float, list[bool]]:
    """Fraction of sampled centers at which the class survives projection.

    A nonzero class dies at x only when x lies on a proper subspace, so
    the fraction tends to 1 over random GF(p)-points.  Raises when the
    input is zero as a class.
    """
    cs = ClassSpace(module, alpha.p, 1)
    if cs.is_zero_class(alpha.rep):
        raise ValueError("survival sampling needs a nonzero class")
    outcomes = []
    for x in points:
        ctx = ProjectionContext(module, x)
        gamma = project_syzygy(alpha, ctx)
        w_incoming = assemble_differential(ctx.w_module, alpha.p, 0)
        red = _gauss.SpanReducer(w_incoming.to_dense().T, module.p)
        outcomes.append(bool(np.any(red.reduce(gamma.rep))))
    frac = sum(outcomes) / len(outcomes) if outcomes else 0.0
    return frac, outcomes


def truncated_image_in_w_classes(ctx: ProjectionContext, p: int):
    """Classes of K_{p,1}(L - x) inside the W_x-complex of the module.

    Returns (normal forms of the image basis, the W ClassSpace), cached
    per context and degree.  The inclusion-induced map must be
    injective at the computed ranks (first assertion of the containment
    statement); a defect raises InclusionNotInjectiveError instead of
    being repaired.
    """
    if ctx.t_module is None:
        raise ValueError("context carries no truncated module")
    got = ctx._image_cache.get(p)
    if got is not None:
        return got
    t_mod = ctx.t_module
    cs_t = ClassSpace(t_mod, p, 1)
    basis_t = cs_t.class_basis()
    cs_w = ClassSpace(ctx.w_module, p, 1)
    if basis_t.shape[0] == 0:
        got = (np.zeros((0, ctx.module.dim(1) * comb(ctx.module.vdim - 1, p)),
                        dtype=np.int64), cs_w)
        ctx._image_cache[p] = got
        return got
    n1 = ctx.module.vdim - 1
    cw = comb(n1, p)
    t1 = t_mod.dim(1)
    incl = t_mod.pieces[1].rows  # t1 x dimV rows in A_1 = V coordinates
    mapped = []
    for row in basis_t:
        z = row.reshape(t1, cw)
        az = _gauss.mul_mod(incl.T % ctx.pp, z, ctx.pp)  # dimV x cw
        mapped.append(az.reshape(-1))
    mapped = np.array(mapped, dtype=np.int64)
    nfs = cs_w.nf_rows(mapped)
    if _gauss.rank(nfs.copy(), ctx.pp) != basis_t.shape[0]:
        raise InclusionNotInjectiveError(
            "K_{p,1}(L-x) -> K_{p,1}(L, W_x) dropped rank")
    got = (nfs, cs_w)
    ctx._image_cache[p] = got
    return got


def ehbauer_membership(projected: SyzygyClass, ctx: ProjectionContext) -> bool:
    """True iff the projected class lies in the image of K_{p,1}(L - x)."""
    if projected.module is not ctx.w_module:
        raise ValueError("projected class does not live on the context W-complex")
    image_nfs, cs_w = truncated_image_in_w_classes(ctx, projected.p)
    target = cs_w.nf(projected.rep)
    if not np.any(target):
        return True
    red = _gauss.SpanReducer(image_nfs, ctx.pp)
    return red.contains(target)


def generic_drop_check(module: GradedModule, p1: int,
                       points: list[PointOnCurve]) -> dict:
    """Nonzero K_{p1,1}(X, L) forces nonzero K_{p1-1,1}(X, L-x) at generic x.

    Builds the L-x truncated module at every sampled point and computes
    the full Koszul cell there; passes iff every point keeps a nonzero
    class.  The hypothesis K_{p1,1} != 0 is a precondition.
    """
    top, route = cell_dim_best(module, p1, 1)
    if top == 0:
        raise ValueError("hypothesis K_{p+1,1} != 0 fails")
    per_point = []
    for x in points:
        t_mod = truncate_at_points(module, [(x, 1)], qmax=2)
        d = koszul_dimension(t_mod, p1 - 1, 1).dim_K
        per_point.append({"point": x.key(), "dim": d})
    return {"strand": p1, "top_dim": top, "top_route": route,
            "per_point": per_point,
            "passed": all(rec["dim"] > 0 for rec in per_point)}


def sequence_exactness_check(ctx: ProjectionContext, p1: int) -> dict:
    """Rank bookkeeping of the splitting sequence at one computed spot.

    When K_{p1,0}(B, W_x) = 0 the lift eta_x has zero kernel coming in,
    and exactness forces rank(eta) + rank(pi) = dim K_{p1,1}(B, V).
    All four numbers are computed and compared.
    """
    module = ctx.module
    if not verify_standing_hypotheses(ctx.w_module, [p1]):
        return {"applicable": False}
    cs_v = ClassSpace(module, p1, 1)
    cs_w = ClassSpace(ctx.w_module, p1, 1)
    cs_w_low = ClassSpace(ctx.w_module, p1 - 1, 1)
    dim_v = cs_v.dim
    basis_w = cs_w.class_basis()
    lifted = [cs_v.nf(lift_eta(SyzygyClass(ctx.w_module, p1, 1, b, context="W"),
                               ctx).rep) for b in basis_w]
    rank_eta = _gauss.rank(np.array(lifted, dtype=np.int64), module.p) if lifted else 0
    basis_v = cs_v.class_basis()
    projected = [cs_w_low.nf(project_syzygy(
        SyzygyClass(module, p1, 1, b, context="V"), ctx).rep) for b in basis_v]
    rank_pi = _gauss.rank(np.array(projected, dtype=np.int64), module.p) if projected else 0
    return {"applicable": True, "dim_K_V": dim_v,
            "dim_K_W": basis_w.shape[0],
            "rank_eta": rank_eta, "rank_pi": rank_pi,
            "exact": rank_eta + rank_pi == dim_v}
