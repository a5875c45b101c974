import random

import numpy as np
import pytest

from conftest import make_plane_curve_module
from syzlab import _gauss, _poly
from syzlab.ff_linalg import Prime
from syzlab.graded_modules import (BaseLocusError, ConstructionError,
                                   CurveModel, SearchBudgetError,
                                   SingularPointError, build_ambient_module,
                                   build_blowup_module,
                                   build_point_truncated_module,
                                   build_restriction_module, evaluation_split,
                                   find_rational_points,
                                   local_branch_expansion, random_form,
                                   sections_with_base_conditions,
                                   truncate_at_points)
from syzlab.multilinear import (DivisorClass, SurfaceModel, HIRZEBRUCH, P1, P2,
                                QUADRIC_BLOWUP)


# -- ambient builders ---------------------------------------------------------

def test_ambient_p2_veronese_dims(veronese):
    assert veronese.dims == (1, 6, 15, 28)
    assert veronese.vdim == 6
    assert veronese.multigraded


def test_ambient_negative_twist_dims(p2_surface, prime):
    mod = build_ambient_module(p2_surface, DivisorClass.degree(-5),
                               DivisorClass.degree(4), 2, prime)
    assert mod.dims == (0, 0, 10)


def test_ambient_sigma1_dims(prime):
    surf = SurfaceModel(HIRZEBRUCH, e=1)
    mod = build_ambient_module(surf, DivisorClass.ruled(0, 0),
                               DivisorClass.ruled(1, 2), 2, prime)
    assert mod.dims == (1, 5, 12)


def test_ambient_requires_sections(p2_surface, prime):
    with pytest.raises(ValueError):
        build_ambient_module(p2_surface, DivisorClass.degree(0),
                             DivisorClass.degree(-1), 2, prime)


def test_action_commutativity_full_check(veronese):
    veronese.verify_action_commutativity()


def test_corrupted_action_detected(p2_surface, prime):
    mod = build_ambient_module(p2_surface, DivisorClass.degree(0),
                               DivisorClass.degree(2), 3, prime)
    mod.action[0][0] = (mod.action[0][0] + 1) % prime.p
    with pytest.raises(ConstructionError):
        mod.verify_action_commutativity()


# -- restriction quotients ----------------------------------------------------

def test_quartic_restriction_dims(quartic_module):
    assert quartic_module.dims == (1, 10, 22, 34)
    assert quartic_module.labels["h0L"] == 10
    assert quartic_module.labels["a0_is_one"]
    assert quartic_module.labels["a1_is_full_v"]


def test_quintic_restriction_dims(quintic_module):
    assert quintic_module.dims[:3] == (1, 10, 25)


def test_restriction_a1_matches_ambient_sections(quartic_module):
    # for k = d - 1 the degree-one piece is all of H^0(O(k))
    assert quartic_module.dim(1) == quartic_module.les_ambient.dim(1)


def test_restriction_wrong_class_rejected(p2_surface, prime):
    amb = build_ambient_module(p2_surface, DivisorClass.degree(0),
                               DivisorClass.degree(3), 3, prime)
    sub = build_ambient_module(p2_surface, DivisorClass.degree(-5),
                               DivisorClass.degree(3), 3, prime)
    rng = random.Random(0)
    f4 = random_form(p2_surface, DivisorClass.degree(4), prime, rng)
    with pytest.raises(ValueError):
        build_restriction_module(amb, sub, f4, DivisorClass.degree(4))


def test_restriction_zero_form_rejected(p2_surface, prime):
    amb = build_ambient_module(p2_surface, DivisorClass.degree(0),
                               DivisorClass.degree(3), 3, prime)
    sub = build_ambient_module(p2_surface, DivisorClass.degree(-4),
                               DivisorClass.degree(3), 3, prime)
    with pytest.raises(ValueError):
        build_restriction_module(amb, sub, {}, DivisorClass.degree(4))


def test_restriction_seed_independent_dims(prime):
    dims = {make_plane_curve_module(4, 3, prime, seed=s).dims for s in (1, 2, 3)}
    assert len(dims) == 1


# -- branch expansions --------------------------------------------------------

def test_branch_parabola():
    pr = Prime(101)
    f = {(0, 1, 1): 1, (2, 0, 0): 100}          # y*z - x^2
    curve = CurveModel(SurfaceModel(P2), f, DivisorClass.degree(2), pr)
    br = local_branch_expansion(curve, curve.normalize((0, 0, 1)), 3)
    assert br.series == [0, 0, 1, 0]


def test_branch_cubic_graph():
    pr = Prime(101)
    f = {(0, 1, 2): 1, (1, 0, 2): 100, (3, 0, 0): 100}   # y - x - x^3
    curve = CurveModel(SurfaceModel(P2), f, DivisorClass.degree(3), pr)
    br = local_branch_expansion(curve, curve.normalize((0, 0, 1)), 2)
    assert br.series == [0, 1, 0]


def test_branch_resubstitution_random_quartic(prime):
    rng = random.Random(9)
    surf = SurfaceModel(P2)
    f = random_form(surf, DivisorClass.degree(4), prime, rng)
    curve = CurveModel(surf, f, DivisorClass.degree(4), prime)
    pt = find_rational_points(curve, 1, seed=4)[0]
    br = local_branch_expansion(curve, pt, 4)
    assert br.evaluate(f, prime.p) == [0, 0, 0, 0, 0]


def test_branch_order_below_one_rejected(prime):
    rng = random.Random(9)
    surf = SurfaceModel(P2)
    f = random_form(surf, DivisorClass.degree(4), prime, rng)
    curve = CurveModel(surf, f, DivisorClass.degree(4), prime)
    pt = find_rational_points(curve, 1, seed=4)[0]
    with pytest.raises(ValueError):
        local_branch_expansion(curve, pt, 0)


def test_singular_point_rejected():
    pr = Prime(101)
    f = {(0, 2, 1): 1, (3, 0, 0): 100}   # y^2 z = x^3, cusp at origin
    curve = CurveModel(SurfaceModel(P2), f, DivisorClass.degree(3), pr)
    with pytest.raises(SingularPointError):
        curve.normalize((0, 0, 1))


def test_vertical_tangent_swaps_parameter():
    pr = Prime(101)
    f = {(1, 0, 1): 1, (0, 2, 0): 100}   # x*z - y^2: vertical tangent at origin
    curve = CurveModel(SurfaceModel(P2), f, DivisorClass.degree(2), pr)
    br = local_branch_expansion(curve, curve.normalize((0, 0, 1)), 3)
    assert br.param_var == 1   # y is the parameter after the swap
    assert br.series == [0, 0, 1, 0]


# -- rational point search ----------------------------------------------------

def test_fermat_quartic_points_gf101():
    pr = Prime(101)
    f = {(4, 0, 0): 1, (0, 4, 0): 1, (0, 0, 4): 1}
    curve = CurveModel(SurfaceModel(P2), f, DivisorClass.degree(4), pr)
    pts = find_rational_points(curve, 5, seed=3)
    assert len(pts) == 5
    assert len({p.key() for p in pts}) == 5
    for pt in pts:
        assert curve.value_at(pt) == 0
        assert pt.smooth_certificate[1] != 0


def test_count_zero_returns_empty(prime):
    rng = random.Random(1)
    surf = SurfaceModel(P2)
    f = random_form(surf, DivisorClass.degree(4), prime, rng)
    curve = CurveModel(surf, f, DivisorClass.degree(4), prime)
    assert find_rational_points(curve, 0, seed=1) == []


def test_budget_error_carries_partial_results():
    # a pointless conic over GF(3): x^2 + y^2 + z^2 has few/no smooth
    # rational points reachable within a tiny budget
    pr = Prime(5)
    f = {(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1}
    curve = CurveModel(SurfaceModel(P2), f, DivisorClass.degree(2), pr)
    with pytest.raises(SearchBudgetError) as err:
        find_rational_points(curve, 40, seed=1, budget=6)
    assert isinstance(err.value.found, list)


def test_points_on_quadric_surface(prime):
    rng = random.Random(2)
    surf = SurfaceModel(HIRZEBRUCH, e=0)
    f = random_form(surf, DivisorClass.ruled(3, 3), prime, rng)
    curve = CurveModel(surf, f, DivisorClass.ruled(3, 3), prime)
    pts = find_rational_points(curve, 3, seed=5)
    for pt in pts:
        assert curve.value_at(pt) == 0


# -- evaluation splitting -----------------------------------------------------

def test_evaluation_split_on_o1(p2_surface, prime):
    mod = build_ambient_module(p2_surface, DivisorClass.degree(0),
                               DivisorClass.degree(1), 2, prime)

    class Pt:
        coordinates = (0, 0, 1)

    v0, wbasis, evals = evaluation_split(mod, Pt())
    # basis order is z > y > x ... graded-lex descending puts x first
    idx = mod.pieces[1].monomials.index((0, 0, 1))
    assert v0[idx] == 1 and np.count_nonzero(v0) == 1
    assert len(wbasis) == 2
    for row in wbasis.vectors:
        assert row[idx] == 0


def test_evaluation_split_quartic_codimension_one(quartic_module):
    curve = quartic_module.curve
    pt = find_rational_points(curve, 1, seed=7)[0]
    v0, wbasis, evals = evaluation_split(quartic_module, pt)
    assert len(wbasis) == 9
    # every W vector evaluates to zero at the point
    p = quartic_module.p
    for row in wbasis.vectors:
        val = int((row * evals).sum() % p)
        assert val == 0


def test_base_locus_error(p2_surface, prime):
    # twist O(-1) with L = O(1): degree-one piece is H^0(O(0)) = constants?
    # use instead the module with piece 1 = x,y only: craft via O(1) sections
    mod = build_ambient_module(p2_surface, DivisorClass.degree(0),
                               DivisorClass.degree(1), 2, prime)

    class Pt:
        coordinates = (0, 0, 0)   # evaluates every monomial to zero

    with pytest.raises(BaseLocusError):
        evaluation_split(mod, Pt())


# -- point truncations --------------------------------------------------------

def test_truncate_quartic_one_point(quartic_module):
    curve = quartic_module.curve
    pt = find_rational_points(curve, 1, seed=8)[0]
    t_mod = truncate_at_points(quartic_module, [(pt, 1)], qmax=2)
    assert t_mod.dims == (1, 9, 20)
    assert t_mod.labels["condition_ranks"] == [0, 1, 2]


def test_truncate_dim_equals_dim_minus_condition_rank(quintic_module):
    curve = quintic_module.curve
    pt = find_rational_points(curve, 1, seed=9)[0]
    t_mod = truncate_at_points(quintic_module, [(pt, 1)], qmax=2)
    ranks = t_mod.labels["condition_ranks"]
    for q in (1, 2):
        assert t_mod.dim(q) == quintic_module.dim(q) - ranks[q]


def test_truncate_spec_entry_point(quartic_module):
    curve = quartic_module.curve
    pt = find_rational_points(curve, 1, seed=8)[0]
    t_mod = build_point_truncated_module(quartic_module, [(pt, 1)], qmax=2)
    assert t_mod.dims == (1, 9, 20)


def test_truncate_p1_module(prime):
    surf = SurfaceModel(P1)
    mod = build_ambient_module(surf, DivisorClass.degree(0),
                               DivisorClass.degree(3), 2, prime)
    mod.curve = CurveModel(surf, None, None, prime)
    pt = mod.curve.normalize((5, 1))
    t_mod = truncate_at_points(mod, [(pt, 1)], qmax=2)
    # sections of O(3q) vanishing to order q at a point: dims 3q + 1 - q
    assert t_mod.dims == (1, 3, 5)


def test_truncated_multi_point(quartic_module):
    curve = quartic_module.curve
    pts = find_rational_points(curve, 2, seed=10)
    t_mod = truncate_at_points(quartic_module, [(pt, 1) for pt in pts], qmax=2)
    assert t_mod.dims == (1, 8, 18)


# -- blowup surface flavor ----------------------------------------------------

def _blowup_surface(prime, gamma=1, seed=3):
    rng = random.Random(seed)
    pts = []
    used_u, used_s = set(), set()
    while len(pts) < gamma:
        u, s = rng.randrange(1, prime.p), rng.randrange(1, prime.p)
        if u in used_u or s in used_s:
            continue
        used_u.add(u)
        used_s.add(s)
        pts.append(((u, 1), (s, 1)))
    return SurfaceModel(QUADRIC_BLOWUP, e=0, points=tuple(pts),
                        point_modulus=prime.p)


def test_single_evaluation_condition(prime):
    surf = _blowup_surface(prime, 1)
    basis, monos, crank = sections_with_base_conditions(
        surf, DivisorClass.ruled(2, 2), [1], prime)
    assert basis.shape[0] == 8 and crank == 1


def test_double_point_conditions_on_3_3(prime):
    surf = _blowup_surface(prime, 1)
    basis, monos, crank = sections_with_base_conditions(
        surf, DivisorClass.ruled(3, 3), [2], prime)
    assert crank == 3
    assert basis.shape[0] == 16 - 3
    # every basis section really vanishes to order 2: value and partials
    p = prime.p
    (u, _), (s, _) = surf.points[0]
    for row in basis[:4]:
        poly = _poly.poly_from_vector(row, monos, p)
        assert _poly.poly_eval(poly, (u, 1, s, 1), p) == 0
        for var in (0, 2):
            dpoly = _poly.poly_partial(poly, var, p)
            assert _poly.poly_eval(dpoly, (u, 1, s, 1), p) == 0


def test_blowup_module_dims(prime):
    surf = _blowup_surface(prime, 1)
    mod = build_blowup_module(surf, DivisorClass.ruled(2, 2), (1,), 3, prime)
    assert mod.vdim == 8
    assert mod.dims == (1, 8, 22, 43)
