"""Finite truncations of graded section-ring modules.

A GradedModule holds explicit bases of the pieces B_0..B_qmax together
with the multiplication action of the degree-one generator space, which
is all the Koszul layer needs for the q <= 2 strands.  Three builders
cover the package's needs: ambient (possibly twisted) section rings
with monomial bases, restriction quotients A = B / f*B' for a defining
form f, and point-vanishing truncations that model sections vanishing
to prescribed orders at marked points (along a curve via branch
expansions, or on a blown-up surface via derivative conditions).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import comb

import numpy as np

from . import _gauss, _poly
from .ff_linalg import Prime, VectorSpaceBasis
from .multilinear import (DivisorClass, SurfaceModel, P1, P2,
                          monomial_basis, mono_mul)


class BaseLocusError(ValueError):
    """Every degree-one section vanishes at the requested point."""


class SingularPointError(ValueError):
    """Both partial derivatives vanish at the point."""


class ConstructionError(RuntimeError):
    """An internal exactness property failed while building a module."""


class PrimeTooSmallError(ValueError):
    """The working prime does not dominate the requested orders."""


class SearchBudgetError(RuntimeError):
    """Point search exhausted its budget; carries the partial results."""

    def __init__(self, message: str, found: list):
        super().__init__(message)
        self.found = found


@dataclass
class Piece:
    """One graded piece with an explicit basis.

    `monomials` is set when the basis elements are monomials of the
    ambient coordinate ring.  Otherwise `rows` expresses the basis in
    ambient monomial coordinates (when `ambient_monomials` is set) or
    in the same-degree piece coordinates of the module's parent.
    """

    dim: int
    monomials: list | None = None
    multidegrees: list | None = None
    rows: np.ndarray | None = None
    ambient_monomials: list | None = None


class GradedModule:
    """A truncated graded module over Sym(V) given by bases and action.

    action[q][i] is the matrix of multiplication by the i-th generator,
    mapping piece q to piece q+1.  Instances are immutable after
    construction; rank caches fill lazily and random draws never happen
    here, so sharing across threads is safe.
    """

    def __init__(self, prime: Prime, vdim: int, pieces: list[Piece],
                 action: list[list[np.ndarray]], labels: dict,
                 v_monomials: list | None = None,
                 v_multidegrees: list | None = None,
                 parent: "GradedModule | None" = None,
                 check_commutativity: bool = True):
        self.prime = prime
        self.vdim = vdim
        self.pieces = pieces
        self.action = action
        self.labels = dict(labels)
        self.v_monomials = v_monomials
        self.v_multidegrees = v_multidegrees
        self.parent = parent
        self.les_ambient: GradedModule | None = None
        self.les_sub: GradedModule | None = None
        self.curve: "CurveModel | None" = None
        self.rank_cache: dict = {}
        self.flag_cache: dict = {}
        if check_commutativity:
            self.verify_action_commutativity()

    # -- basic views ---------------------------------------------------
    @property
    def qmax(self) -> int:
        return len(self.pieces) - 1

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(pc.dim for pc in self.pieces)

    def dim(self, q: int) -> int:
        return self.pieces[q].dim

    @property
    def p(self) -> int:
        return self.prime.p

    @property
    def multigraded(self) -> bool:
        return (self.v_multidegrees is not None
                and all(pc.multidegrees is not None for pc in self.pieces))

    def action_matrix(self, q: int, i: int) -> np.ndarray:
        return self.action[q][i]

    def action_combo(self, q: int, coeffs: np.ndarray) -> np.ndarray:
        """Matrix of multiplication by sum(coeffs[i] * v_i) on piece q."""
        out = np.zeros((self.dim(q + 1), self.dim(q)), dtype=np.int64)
        for i, c in enumerate(coeffs):
            c = int(c) % self.p
            if c:
                out = (out + c * self.action[q][i]) % self.p
        return out

    def verify_action_commutativity(self):
        p = self.p
        for q in range(self.qmax - 1):
            for i in range(self.vdim):
                for j in range(i + 1, self.vdim):
                    lhs = _gauss.mul_mod(self.action[q + 1][i], self.action[q][j], p)
                    rhs = _gauss.mul_mod(self.action[q + 1][j], self.action[q][i], p)
                    if not np.array_equal(lhs, rhs):
                        raise ConstructionError(
                            f"action not commutative at q={q}, generators {i},{j}")

    # -- polynomial lifts ------------------------------------------------
    def piece_vector_poly(self, q: int, vec: np.ndarray) -> dict:
        """Ambient-coordinate polynomial representing a piece-q vector."""
        pc = self.pieces[q]
        vec = np.asarray(vec, dtype=np.int64) % self.p
        if pc.monomials is not None:
            return _poly.poly_from_vector(vec, pc.monomials, self.p)
        if pc.rows is not None:
            lifted = _gauss._row_combo_mod(vec, pc.rows, self.p)
            if pc.ambient_monomials is not None:
                return _poly.poly_from_vector(lifted, pc.ambient_monomials, self.p)
            if self.parent is not None:
                return self.parent.piece_vector_poly(q, lifted)
        raise ValueError("piece has no polynomial representation")

    def mono_index(self, q: int) -> dict:
        got = self.flag_cache.get(("mono_index", q))
        if got is None:
            got = {m: k for k, m in enumerate(self.pieces[q].monomials)}
            self.flag_cache[("mono_index", q)] = got
        return got

    def piece_solver(self, q: int) -> _gauss.ColumnSolver:
        got = self.flag_cache.get(("solver", q))
        if got is None:
            got = _gauss.ColumnSolver(self.pieces[q].rows.T, self.p)
            self.flag_cache[("solver", q)] = got
        return got

    def coords_of_poly(self, q: int, poly: dict) -> np.ndarray:
        """Coordinates of an ambient polynomial in the piece-q basis."""
        pc = self.pieces[q]
        if pc.monomials is not None:
            idx = self.mono_index(q)
            out = np.zeros(pc.dim, dtype=np.int64)
            for m, c in poly.items():
                k = idx.get(m)
                if k is None:
                    raise ConstructionError("polynomial outside the piece span")
                out[k] = c
            return out
        if pc.ambient_monomials is not None:
            amb_idx = self.flag_cache.setdefault(
                ("amb_index", q), {m: k for k, m in enumerate(pc.ambient_monomials)})
            vec = np.zeros(len(pc.ambient_monomials), dtype=np.int64)
            for m, c in poly.items():
                k = amb_idx.get(m)
                if k is None:
                    raise ConstructionError("polynomial outside the ambient span")
                vec[k] = c
            return self.piece_solver(q).solve(vec)
        raise ValueError("piece cannot absorb polynomials")

    def with_generators(self, gen_cols: np.ndarray, note: str = "") -> "GradedModule":
        """The same module viewed over new generators.

        `gen_cols` holds one generator per column, in coordinates of the
        current generator space V.
        """
        gen_cols = np.asarray(gen_cols, dtype=np.int64) % self.p
        new_action = []
        for q in range(self.qmax):
            new_action.append([self.action_combo(q, gen_cols[:, t])
                               for t in range(gen_cols.shape[1])])
        labels = dict(self.labels)
        labels["generators"] = note or "restricted generators"
        mod = GradedModule(self.prime, gen_cols.shape[1], self.pieces, new_action,
                           labels, parent=self.parent, check_commutativity=False)
        mod.curve = self.curve
        return mod


def _unit(n: int, j: int) -> np.ndarray:
    v = np.zeros(n, dtype=np.int64)
    v[j] = 1
    return v


def _exact_matvec(mat: np.ndarray, vec: np.ndarray, p: int) -> np.ndarray:
    """(mat @ vec) % p, exact for reduced int64 inputs of any size."""
    return _gauss._row_combo_mod(np.asarray(vec, dtype=np.int64) % p,
                                 np.ascontiguousarray(mat.T) % p, p)


# -- ambient builders --------------------------------------------------------

def build_ambient_module(surface: SurfaceModel, twist: DivisorClass,
                         polarization: DivisorClass, qmax: int,
                         prime: Prime) -> GradedModule:
    """Section ring B_q = H^0(twist + q * polarization) with monomial bases.

    The action is plain monomial multiplication, so every basis element
    carries its exponent vector as a multidegree and the Koszul layer
    can split differentials into multidegree blocks.
    """
    if qmax < 2:
        raise ValueError("qmax must be at least 2")
    v_monos = monomial_basis(surface, polarization)
    if not v_monos:
        raise ValueError("polarization class has no sections")
    piece_monos = [monomial_basis(surface, twist + q * polarization)
                   for q in range(qmax + 1)]
    pieces = [Piece(dim=len(ms), monomials=ms, multidegrees=list(ms))
              for ms in piece_monos]
    action = []
    for q in range(qmax):
        idx = {m: k for k, m in enumerate(piece_monos[q + 1])}
        mats = []
        for vm in v_monos:
            mat = np.zeros((len(piece_monos[q + 1]), len(piece_monos[q])), dtype=np.int64)
            for j, bm in enumerate(piece_monos[q]):
                mat[idx[mono_mul(vm, bm)], j] = 1
            mats.append(mat)
        action.append(mats)
    labels = {"kind": "ambient", "surface": surface.kind, "e": surface.e,
              "twist": tuple(twist.components),
              "polarization": tuple(polarization.components),
              "a0_is_one": len(piece_monos[0]) == 1,
              "a1_is_full_v": all(c == 0 for c in twist.components),
              "h0L": len(piece_monos[1])}
    return GradedModule(prime, len(v_monos), pieces, action, labels,
                        v_monomials=v_monos, v_multidegrees=list(v_monos),
                        check_commutativity=False)


def random_form(surface: SurfaceModel, cls: DivisorClass, prime: Prime,
                rng: random.Random) -> dict:
    """Uniform nonzero GF(p) form in the given class."""
    monos = monomial_basis(surface, cls)
    if not monos:
        raise ValueError("class has no sections to draw a form from")
    while True:
        coeffs = [rng.randrange(prime.p) for _ in monos]
        if any(coeffs):
            return _poly.poly_from_vector(coeffs, monos, prime.p)


# -- restriction quotient ----------------------------------------------------

def build_restriction_module(ambient: GradedModule, sub: GradedModule,
                             defining_form: dict, form_class: DivisorClass,
                             curve: "CurveModel | None" = None,
                             check_classes: bool = True) -> GradedModule:
    """Quotient module A = B / f*B' for a defining form f of the divisor.

    `ambient` is B, `sub` is B' with B'_q = H^0(twist + qL - X); the map
    f*: B'_q -> B_q must be injective in every degree (f must be a
    nonzerodivisor), which is verified by rank, never assumed.  The
    quotient basis in each degree is the complement of the pivot
    coordinates of f*B'_q, so for monomial B it is again a set of
    monomials and products reduce by sparse rewriting.
    """
    p = ambient.p
    if not defining_form:
        raise ValueError("defining form must be nonzero")
    if sub.qmax != ambient.qmax:
        raise ValueError("ambient and shifted module truncation mismatch")
    if check_classes:
        expected = tuple(c - x for c, x in zip(ambient.labels["twist"],
                                               form_class.components))
        if (tuple(sub.labels["twist"]) != expected
                or sub.labels["polarization"] != ambient.labels["polarization"]):
            raise ValueError("shifted module classes do not match the divisor class")

    reducers = []
    complements = []
    pieces: list[Piece] = []
    for q in range(ambient.qmax + 1):
        bq, bpq = ambient.pieces[q], sub.pieces[q]
        cols = np.zeros((bpq.dim, bq.dim), dtype=np.int64)
        for j in range(bpq.dim):
            prod = _poly.poly_mul(defining_form,
                                  sub.piece_vector_poly(q, _unit(bpq.dim, j)), p)
            cols[j] = ambient.coords_of_poly(q, prod)
        red = _gauss.SpanReducer(cols, p)
        if red.rank != bpq.dim:
            raise ConstructionError(f"defining form is a zerodivisor at degree {q}")
        piv = set(red.pivcols)
        comp = [k for k in range(bq.dim) if k not in piv]
        if bq.monomials is not None:
            pieces.append(Piece(dim=len(comp),
                                monomials=[bq.monomials[k] for k in comp]))
        else:
            pieces.append(Piece(dim=len(comp),
                                rows=np.eye(bq.dim, dtype=np.int64)[comp]))
        reducers.append(red)
        complements.append(comp)

    action = []
    for q in range(ambient.qmax):
        comp_q = complements[q]
        comp_q1 = complements[q + 1]
        red1 = reducers[q + 1]
        mats = []
        for i in range(ambient.vdim):
            amb_cols = ambient.action[q][i][:, comp_q].T  # one row per quotient basis elem
            reduced = red1.reduce_rows(amb_cols)[:, comp_q1]
            mats.append(np.ascontiguousarray(reduced.T))
        action.append(mats)

    labels = {"kind": "restriction",
              "surface": ambient.labels.get("surface"),
              "e": ambient.labels.get("e", 0),
              "polarization": ambient.labels.get("polarization"),
              "twist": ambient.labels.get("twist"),
              "divisor_class": tuple(form_class.components),
              "h0L": pieces[1].dim,
              "a0_is_one": pieces[0].dim == 1,
              "a1_is_full_v": pieces[1].dim == ambient.vdim and sub.dim(1) == 0}
    needs_parent = any(pc.monomials is None for pc in pieces)
    mod = GradedModule(ambient.prime, ambient.vdim, pieces, action, labels,
                       v_monomials=ambient.v_monomials,
                       parent=ambient if needs_parent else None,
                       check_commutativity=True)
    mod.les_ambient = ambient
    mod.les_sub = sub
    mod.curve = curve
    return mod


# -- curves, points, branches ------------------------------------------------

@dataclass(frozen=True)
class PointOnCurve:
    """A GF(p)-rational smooth point in normalized coordinates.

    Plane points are (x, y, z) with the chart coordinate equal to 1;
    points of P1 x P1 are ((u, v), (s, t)) with one coordinate of each
    factor equal to 1.  The smoothness certificate records an affine
    variable whose partial of the defining form is nonzero there.
    """

    coordinates: tuple
    chart: tuple
    smooth_certificate: tuple

    def key(self) -> tuple:
        return self.coordinates


@dataclass
class BranchExpansion:
    """Truncated local parameterization of a curve branch.

    The parameter s shifts the `param_var` affine coordinate; `series`
    gives the other affine coordinate.  Substituting the series into
    the defining form vanishes to the stated order (asserted by the
    constructor), so evaluating a form along the branch reads off its
    vanishing order at the center.
    """

    center: PointOnCurve
    order: int
    param_var: int
    series: list[int]
    curve: "CurveModel"

    def evaluate(self, poly: dict, p: int) -> list[int]:
        aff = self.curve.affinize(poly, self.center)
        a = self.curve.affine_point(self.center)[self.param_var]
        param_series = [a, 1] + [0] * (self.order - 1)
        by_var = {self.param_var: param_series, 1 - self.param_var: self.series}
        return _eval_affine_on_series(aff, by_var, p, self.order)

    def vanishing_order(self, poly: dict, p: int) -> int:
        for i, c in enumerate(self.evaluate(poly, p)):
            if c:
                return i
        return self.order + 1


def _eval_affine_on_series(aff: dict, series_by_var: dict, p: int, order: int) -> list[int]:
    maxdeg = [0, 0]
    for (i, j) in aff:
        maxdeg[0] = max(maxdeg[0], i)
        maxdeg[1] = max(maxdeg[1], j)
    pows = {}
    for var in (0, 1):
        cur = [1] + [0] * order
        lst = [cur]
        for _ in range(maxdeg[var]):
            cur = _poly.series_mul(cur, series_by_var[var], p, order)
            lst.append(cur)
        pows[var] = lst
    out = [0] * (order + 1)
    for (i, j), c in aff.items():
        term = _poly.series_mul(pows[0][i], pows[1][j], p, order)
        for t in range(order + 1):
            if term[t]:
                out[t] = (out[t] + c * term[t]) % p
    return out


class CurveModel:
    """A curve on one of the supported surfaces, given by a defining form.

    For the projective line the "curve" is P1 itself: sections are
    univariate and vanishing orders come from direct expansion.
    """

    def __init__(self, surface: SurfaceModel, defining_form: dict | None,
                 form_class: DivisorClass | None, prime: Prime):
        self.surface = surface
        self.form = defining_form
        self.form_class = form_class
        self.prime = prime
        if surface.kind != P1 and not defining_form:
            raise ValueError("curve on a surface needs a defining form")

    @property
    def p(self) -> int:
        return self.prime.p

    # -- charts ----------------------------------------------------------
    def normalize(self, raw: tuple) -> PointOnCurve:
        """Normalize raw coordinates, check incidence, certify smoothness."""
        p = self.p
        if self.surface.kind == P2:
            x, y, z = (int(c) % p for c in raw)
            if x == y == z == 0:
                raise ValueError("zero coordinates")
            chart = 2 if z else (1 if y else 0)
            inv = pow((x, y, z)[chart], p - 2, p)
            pt = PointOnCurve(tuple(c * inv % p for c in (x, y, z)), (chart,), ())
        elif self.surface.kind == P1:
            x, y = (int(c) % p for c in raw)
            if x == y == 0:
                raise ValueError("zero coordinates")
            chart = 1 if y else 0
            inv = pow((x, y)[chart], p - 2, p)
            return PointOnCurve((x * inv % p, y * inv % p), (chart,), (0, 1))
        else:
            (u, v), (s, t) = raw
            u, v, s, t = int(u) % p, int(v) % p, int(s) % p, int(t) % p
            if (u == 0 and v == 0) or (s == 0 and t == 0):
                raise ValueError("zero coordinates")
            c1 = 1 if v else 0
            c2 = 1 if t else 0
            i1 = pow((u, v)[c1], p - 2, p)
            i2 = pow((s, t)[c2], p - 2, p)
            pt = PointOnCurve(((u * i1 % p, v * i1 % p), (s * i2 % p, t * i2 % p)),
                              (c1, c2), ())
        if self.value_at(pt) != 0:
            raise ValueError("point does not lie on the curve")
        partials = self.affine_partials(pt)
        if partials[0] == 0 and partials[1] == 0:
            raise SingularPointError("both affine partials vanish at the point")
        which = 1 if partials[1] else 0
        return PointOnCurve(pt.coordinates, pt.chart, (which, partials[which]))

    def flat_coordinates(self, pt: PointOnCurve) -> tuple:
        if self.surface.kind in (P2, P1):
            return pt.coordinates
        (u, v), (s, t) = pt.coordinates
        return (u, v, s, t)

    def value_at(self, pt: PointOnCurve) -> int:
        return _poly.poly_eval(self.form, self.flat_coordinates(pt), self.p)

    def affinize(self, poly: dict, pt: PointOnCurve) -> dict:
        """Restrict a form to the point's affine chart (bivariate dict)."""
        p = self.p
        out: dict = {}
        if self.surface.kind == P2:
            chart = pt.chart[0]
            keep = [k for k in range(3) if k != chart]
            for m, c in poly.items():
                key = (m[keep[0]], m[keep[1]])
                out[key] = (out.get(key, 0) + c) % p
        elif self.surface.kind == P1:
            keep = 1 - pt.chart[0]
            for m, c in poly.items():
                key = (m[keep], 0)
                out[key] = (out.get(key, 0) + c) % p
        else:
            keep1 = 1 - pt.chart[0]
            keep2 = 3 - pt.chart[1]
            for m, c in poly.items():
                key = (m[keep1], m[keep2])
                out[key] = (out.get(key, 0) + c) % p
        return {k: v for k, v in out.items() if v}

    def affine_point(self, pt: PointOnCurve) -> tuple:
        if self.surface.kind == P2:
            chart = pt.chart[0]
            keep = [k for k in range(3) if k != chart]
            return (pt.coordinates[keep[0]], pt.coordinates[keep[1]])
        if self.surface.kind == P1:
            return (pt.coordinates[1 - pt.chart[0]], 0)
        (u, v), (s, t) = pt.coordinates
        return ((u, v)[1 - pt.chart[0]], (s, t)[1 - pt.chart[1]])

    def affine_partials(self, pt: PointOnCurve) -> tuple[int, int]:
        p = self.p
        if self.surface.kind == P1:
            return (1, 0)
        aff = self.affinize(self.form, pt)
        a = self.affine_point(pt)
        vals = []
        for var in (0, 1):
            val = 0
            for (i, j), c in aff.items():
                ex = (i, j)[var]
                if ex:
                    ii, jj = (i - 1, j) if var == 0 else (i, j - 1)
                    val = (val + c * ex * pow(a[0], ii, p) * pow(a[1], jj, p)) % p
            vals.append(val)
        return (vals[0], vals[1])

    def branch(self, pt: PointOnCurve, order: int) -> BranchExpansion:
        return local_branch_expansion(self, pt, order)

    def section_vanishing_order(self, poly: dict, pt: PointOnCurve, cap: int) -> int:
        if self.surface.kind == P1:
            ser = _p1_section_series(self, poly, pt, cap)
            for t, c in enumerate(ser):
                if c:
                    return t
            return cap + 1
        return self.branch(pt, cap).vanishing_order(poly, self.p)


def _p1_section_series(curve: CurveModel, poly: dict, pt: PointOnCurve,
                       order: int) -> list[int]:
    p = curve.p
    aff = curve.affinize(poly, pt)
    a = pt.coordinates[1 - pt.chart[0]]
    ser = [0] * (order + 1)
    for (i, _), c in aff.items():
        for t in range(min(i, order) + 1):
            ser[t] = (ser[t] + c * (comb(i, t) % p) * pow(a, i - t, p)) % p
    return ser


def local_branch_expansion(curve: CurveModel, pt: PointOnCurve,
                           order: int) -> BranchExpansion:
    """Branch series y(s) with f(a+s, y(s)) = 0 mod s^(order+1).

    Computed by linear Hensel lifting against the nonvanishing partial;
    when the tangent is vertical in the chart the two affine variables
    swap roles, recorded in `param_var`.  The resubstitution identity
    is asserted before returning.
    """
    if order < 1:
        raise ValueError("branch order must be at least 1")
    p = curve.p
    if curve.surface.kind == P1:
        return BranchExpansion(pt, order, 0, [0] * (order + 1), curve)
    aff = curve.affinize(curve.form, pt)
    a = curve.affine_point(pt)
    partials = curve.affine_partials(pt)
    if partials[1]:
        param, dep = 0, 1
    elif partials[0]:
        param, dep = 1, 0
    else:
        raise SingularPointError("cannot expand a branch at a singular point")
    fprime_inv = pow(partials[dep], p - 2, p)
    series = [a[dep]] + [0] * order
    param_series = [a[param], 1] + [0] * (order - 1)
    for t in range(1, order + 1):
        val = _eval_affine_on_series(aff, {param: param_series, dep: series}, p, order)
        if any(val[:t]):
            raise ConstructionError("Hensel iteration lost exactness")
        series[t] = (-val[t]) * fprime_inv % p
    final = _eval_affine_on_series(aff, {param: param_series, dep: series}, p, order)
    if any(final):
        raise ConstructionError("branch does not satisfy the curve equation")
    return BranchExpansion(pt, order, param, series, curve)


def find_rational_points(curve: CurveModel, count: int, seed: int,
                         budget: int | None = None) -> list[PointOnCurve]:
    """Distinct smooth GF(p)-points found by slicing with ruling lines.

    Each slice reduces to a univariate polynomial whose roots come from
    gcd splitting against x^p - x.  Singular or repeated points are
    skipped; running out of budget raises with the partial results.
    """
    if count == 0:
        return []
    p = curve.p
    rng = random.Random(("points", seed).__repr__())
    budget = budget if budget is not None else 60 * count + 120
    found: list[PointOnCurve] = []
    seen = set()

    def push(raw):
        try:
            pt = curve.normalize(raw)
        except (ValueError, SingularPointError):
            return
        if pt.key() not in seen:
            seen.add(pt.key())
            found.append(pt)

    tries = 0
    while len(found) < count and tries < budget:
        tries += 1
        a = rng.randrange(p)
        if curve.surface.kind == P1:
            push((a, 1))
        elif curve.surface.kind == P2:
            if tries % 3 == 2:
                for r in _slice_roots(curve, "y", a, rng):
                    push((r, a, 1))
            else:
                for r in _slice_roots(curve, "x", a, rng):
                    push((a, r, 1))
        else:
            for r in _slice_roots(curve, "u", a, rng):
                push(((a, 1), (r, 1)))
    if len(found) < count:
        raise SearchBudgetError(
            f"found only {len(found)} of {count} points within budget", found)
    return found[:count]


def _slice_roots(curve: CurveModel, var: str, a: int, rng: random.Random) -> list[int]:
    p = curve.p
    out: dict[int, int] = {}
    if curve.surface.kind == P2:
        for (i, j, _k), c in curve.form.items():
            if var == "x":
                out[j] = (out.get(j, 0) + c * pow(a, i, p)) % p
            else:
                out[i] = (out.get(i, 0) + c * pow(a, j, p)) % p
    else:
        for (i, _j, k, _l), c in curve.form.items():
            out[k] = (out.get(k, 0) + c * pow(a, i, p)) % p
    if not out:
        return []
    g = _poly.utrim([out.get(t, 0) for t in range(max(out) + 1)])
    if not g:
        return []
    return _poly.uroots(g, p, rng)


# -- evaluation split ---------------------------------------------------------

def evaluation_split(module: GradedModule, x: PointOnCurve):
    """Split V = W_x + <v0> at a point: ev_x(v0) = 1 and W_x = ker(ev_x).

    Requires the degree-one piece to coincide with V.  Returns the
    normalized vector v0, the W_x basis and the raw evaluation row, all
    in V coordinates; the splitting is deterministic (first basis
    element with nonzero value is normalized into v0).
    """
    if not module.labels.get("a1_is_full_v"):
        raise ValueError("degree-one piece does not give V coordinates")
    p = module.p
    n = module.dim(1)
    flat = (module.curve.flat_coordinates(x) if module.curve is not None
            else x.coordinates)
    evals = np.zeros(n, dtype=np.int64)
    for j in range(n):
        evals[j] = _poly.poly_eval(module.piece_vector_poly(1, _unit(n, j)), flat, p)
    if not np.any(evals):
        raise BaseLocusError("all degree-one sections vanish at the point")
    j0 = int(np.nonzero(evals)[0][0])
    inv = pow(int(evals[j0]), p - 2, p)
    v0 = _unit(n, j0) * inv % p
    rows = []
    for i in range(n):
        if i != j0:
            w = _unit(n, i)
            w[j0] = (-int(evals[i]) * inv) % p
            rows.append(w)
    wbasis = VectorSpaceBasis(n, module.prime, np.array(rows, dtype=np.int64),
                              ambient="W_x", _verified=True)
    return v0, wbasis, evals


# -- point-vanishing truncations ----------------------------------------------

def truncate_at_points(module: GradedModule,
                       marked: list[tuple[PointOnCurve, int]],
                       qmax: int = 2,
                       wbasis: VectorSpaceBasis | None = None) -> GradedModule:
    """Submodule of sections vanishing to order q*m_i at each marked point.

    Piece q is the kernel of the branch-coefficient condition matrix
    inside piece q of `module`; its dimension is the piece dimension
    minus the computed condition rank.  The result is a module over its
    own degree-one piece (pass `wbasis` to fix that basis, e.g. the
    evaluation splitting of a single point).
    """
    curve = module.curve
    if curve is None:
        raise ValueError("module carries no curve data")
    p = module.p
    if qmax > module.qmax:
        raise ValueError("parent truncation too short")
    if module.dim(0) != 1:
        raise ValueError("degree-zero piece must be the constants")
    max_order = qmax * max(m for _, m in marked)
    total_deg = (sum(abs(c) for c in curve.form_class.components)
                 if curve.form_class is not None else 1)
    if p <= max(max_order, total_deg):
        raise PrimeTooSmallError("prime too small for the requested orders")

    piece_bases = [np.eye(1, dtype=np.int64)]
    cond_ranks = [0]
    for q in range(1, qmax + 1):
        blocks = []
        nq = module.dim(q)
        section_polys = [module.piece_vector_poly(q, _unit(nq, j)) for j in range(nq)]
        for pt, mult in marked:
            order = q * mult
            block = np.zeros((order, nq), dtype=np.int64)
            if curve.surface.kind == P1:
                for j, poly in enumerate(section_polys):
                    ser = _p1_section_series(curve, poly, pt, order)
                    block[:, j] = ser[:order]
            else:
                br = curve.branch(pt, order)
                for j, poly in enumerate(section_polys):
                    ser = br.evaluate(poly, p)
                    block[:, j] = ser[:order]
            blocks.append(block)
        cond = np.vstack(blocks) if blocks else np.zeros((0, nq), dtype=np.int64)
        piece_bases.append(_gauss.kernel(cond, p))
        cond_ranks.append(_gauss.rank(cond, p))

    if wbasis is not None:
        w = wbasis.vectors
        if w.shape[0] != piece_bases[1].shape[0]:
            raise ConstructionError("supplied W basis has the wrong dimension")
        red = _gauss.SpanReducer(piece_bases[1], p)
        for row in w:
            if not red.contains(row):
                raise ConstructionError("supplied W basis does not span the truncation")
        piece_bases[1] = w % p

    pieces = [Piece(dim=b.shape[0], rows=b) for b in piece_bases]
    vdim = pieces[1].dim
    solvers = [_gauss.ColumnSolver(b.T, p) for b in piece_bases]
    action = []
    for q in range(qmax):
        mats = []
        for i in range(vdim):
            combo = module.action_combo(q, piece_bases[1][i])
            mat = np.zeros((pieces[q + 1].dim, pieces[q].dim), dtype=np.int64)
            for j in range(pieces[q].dim):
                img = _exact_matvec(combo, piece_bases[q][j], p)
                try:
                    mat[:, j] = solvers[q + 1].solve(img)
                except ValueError as exc:
                    raise ConstructionError(
                        "product left the truncated subspace") from exc
            mats.append(mat)
        action.append(mats)
    labels = {"kind": "truncated", "h0L": vdim,
              "points": [pt.key() for pt, _ in marked],
              "multiplicities": [m for _, m in marked],
              "condition_ranks": cond_ranks,
              "a0_is_one": True, "a1_is_full_v": False}
    out = GradedModule(module.prime, vdim, pieces, action, labels,
                       parent=module, check_commutativity=True)
    out.curve = curve
    return out


def build_point_truncated_module(module: GradedModule, marked, qmax: int = 2,
                                 wbasis: VectorSpaceBasis | None = None) -> GradedModule:
    """Spec-level entry point for curve-flavor point truncations."""
    return truncate_at_points(module, marked, qmax=qmax, wbasis=wbasis)


# -- blowup surface modules ---------------------------------------------------

def sections_with_base_conditions(surface: SurfaceModel, cls: DivisorClass,
                                  orders: list[int], prime: Prime):
    """Bidegree sections vanishing to the given orders at the base points.

    Orders are imposed through all partial derivatives of total order
    below the multiplicity, evaluated in each point's affine chart
    (valid because p exceeds every order used).  Returns (basis rows
    over the bidegree monomials, monomials, condition rank).
    """
    p = prime.p
    monos = monomial_basis(surface, cls)
    if not monos:
        return np.zeros((0, 0), dtype=np.int64), [], 0
    rows = []
    for pt_raw, order in zip(surface.points, orders):
        if order <= 0:
            continue
        if order >= p:
            raise PrimeTooSmallError("prime too small for the requested orders")
        (u, v), (s, t) = pt_raw
        if v % p == 0 or t % p == 0:
            raise ValueError("base points must avoid the coordinate sections")
        ua = u * pow(v % p, p - 2, p) % p
        sa = s * pow(t % p, p - 2, p) % p
        for au in range(order):
            for as_ in range(order - au):
                row = []
                for (i, _j, k, _l) in monos:
                    if i < au or k < as_:
                        row.append(0)
                        continue
                    c = _falling(i, au, p) * _falling(k, as_, p) % p
                    row.append(c * pow(ua, i - au, p) * pow(sa, k - as_, p) % p)
                rows.append(row)
    cond = (np.array(rows, dtype=np.int64) if rows
            else np.zeros((0, len(monos)), dtype=np.int64))
    return _gauss.kernel(cond, p), monos, _gauss.rank(cond, p)


def _falling(n: int, k: int, p: int) -> int:
    out = 1
    for i in range(k):
        out = out * ((n - i) % p) % p
    return out


def build_blowup_module(surface: SurfaceModel, pullback_class: DivisorClass,
                        mults: tuple[int, ...], qmax: int, prime: Prime,
                        twist_class: DivisorClass | None = None,
                        twist_mult_shift: int = 0) -> GradedModule:
    """Module with pieces H^0(q*(pullback - sum m_i E_i) + twist).

    The generators are always the untwisted degree-one sections; the
    optional twist adds a fixed pullback class and shifts every point
    order by `twist_mult_shift` (giving B'_q = H^0(qH - X) with the
    shift -2 and twist -X's pullback part).
    """
    p = prime.p
    gamma = len(surface.points)
    if len(mults) != gamma:
        raise ValueError("one multiplicity per base point required")
    gen_basis, gen_monos, _ = sections_with_base_conditions(
        surface, pullback_class, [m for m in mults], prime)
    vdim = gen_basis.shape[0]
    if vdim == 0:
        raise ValueError("degree-one generator space is empty")
    gen_polys = [_poly.poly_from_vector(gen_basis[i], gen_monos, p)
                 for i in range(vdim)]

    piece_data = []
    for q in range(qmax + 1):
        cls = q * pullback_class
        orders = [q * m for m in mults]
        if twist_class is not None:
            cls = cls + twist_class
            orders = [o + twist_mult_shift for o in orders]
        orders = [max(0, o) for o in orders]
        piece_data.append(sections_with_base_conditions(surface, cls, orders, prime))

    pieces = [Piece(dim=b.shape[0], rows=b, ambient_monomials=m)
              for b, m, _ in piece_data]
    solvers = [(_gauss.ColumnSolver(b.T, p) if b.shape[0] else None)
               for b, _, _ in piece_data]
    action = []
    for q in range(qmax):
        b_q, monos_q, _ = piece_data[q]
        amb_idx = {m: k for k, m in enumerate(piece_data[q + 1][1])}
        mats = []
        for i in range(vdim):
            mat = np.zeros((pieces[q + 1].dim, pieces[q].dim), dtype=np.int64)
            for j in range(pieces[q].dim):
                prod = _poly.poly_mul(gen_polys[i],
                                      _poly.poly_from_vector(b_q[j], monos_q, p), p)
                vec = np.zeros(len(piece_data[q + 1][1]), dtype=np.int64)
                for m, c in prod.items():
                    if m not in amb_idx:
                        raise ConstructionError("product outside the bidegree space")
                    vec[amb_idx[m]] = c
                try:
                    mat[:, j] = solvers[q + 1].solve(vec)
                except ValueError as exc:
                    raise ConstructionError("product violates base conditions") from exc
            mats.append(mat)
        action.append(mats)
    labels = {"kind": "blowup_ambient", "surface": surface.kind,
              "polarization": tuple(pullback_class.components),
              "twist": (tuple(twist_class.components) if twist_class is not None
                        else (0, 0)),
              "mults": tuple(mults), "mult_shift": twist_mult_shift,
              "h0L": pieces[1].dim,
              "a0_is_one": pieces[0].dim == 1,
              "a1_is_full_v": twist_class is None,
              "condition_ranks": [c for _, _, c in piece_data]}
    return GradedModule(prime, vdim, pieces, action, labels,
                        check_commutativity=True)
