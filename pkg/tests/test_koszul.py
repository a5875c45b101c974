import random
from math import comb

import numpy as np
import pytest

from conftest import make_plane_curve_module
from oracles import naive_rank
from syzlab import koszul as kz
from syzlab.graded_modules import (ConstructionError, build_ambient_module,
                                   random_form, build_restriction_module,
                                   CurveModel)
from syzlab.multilinear import DivisorClass, SurfaceModel, P1, P2


def naive_cell_dim(module, p, q):
    """Two-rank formula evaluated with the naive dense oracle."""
    n = module.vdim
    cols = module.dim(q) * comb(n, p)
    if cols == 0:
        return 0
    d_out = kz.assemble_differential(module, p, q).to_dense()
    rank_out = naive_rank(d_out, module.p)
    if q >= 1:
        d_in = kz.assemble_differential(module, p + 1, q - 1).to_dense()
        rank_in = naive_rank(d_in, module.p)
    else:
        rank_in = 0
    return cols - rank_out - rank_in


# -- assembly -----------------------------------------------------------------

def test_p_zero_gives_no_rows(veronese):
    mat = kz.assemble_differential(veronese, 0, 1)
    assert mat.rows == 0 and mat.cols == veronese.dim(1)
    assert mat.rank() == 0


def test_out_of_window_rejected(veronese):
    with pytest.raises(kz.WindowError):
        kz.assemble_differential(veronese, 2, 3)
    with pytest.raises(kz.WindowError):
        kz.koszul_dimension(veronese, 2, 7)


def test_p1_conic_surjective(prime):
    mod = build_ambient_module(SurfaceModel(P1), DivisorClass.degree(0),
                               DivisorClass.degree(2), 3, prime)
    mat = kz.assemble_differential(mod, 1, 1)
    assert (mat.rows, mat.cols) == (5, 9)
    assert mat.rank() == 5


def test_complex_property_on_veronese(veronese):
    for (p, q) in [(1, 1), (2, 1), (3, 1), (2, 0), (1, 2)]:
        outgoing = kz.assemble_differential(veronese, p, q)
        incoming = kz.assemble_differential(veronese, p + 1, q - 1) \
            if q >= 1 else None
        if incoming is not None and incoming.cols:
            assert outgoing.matmul(incoming).is_zero()


def test_apply_differential_matches_assembly(veronese):
    rng = np.random.default_rng(5)
    mat = kz.assemble_differential(veronese, 2, 1).to_dense()
    vec = rng.integers(0, veronese.p, size=mat.shape[1]).astype(np.int64)
    from syzlab import _gauss
    expect = _gauss.mul_mod(mat, vec.reshape(-1, 1), veronese.p).reshape(-1)
    got = kz.apply_differential(veronese, 2, 1, vec)
    assert np.array_equal(got, expect)


def test_nnz_estimate_exact(veronese):
    for (p, q) in [(1, 1), (3, 1), (2, 0)]:
        mat = kz.assemble_differential(veronese, p, q)
        assert mat.nnz == kz.estimate_differential_nnz(veronese, p, q)


# -- dimensions ---------------------------------------------------------------

def test_K00_is_constants(veronese):
    assert kz.koszul_dimension(veronese, 0, 0).dim_K == 1


def test_twisted_cubic_strand(prime):
    mod = build_ambient_module(SurfaceModel(P1), DivisorClass.degree(0),
                               DivisorClass.degree(3), 3, prime)
    assert kz.cell_dim(mod, 1, 1) == 3
    assert kz.cell_dim(mod, 2, 1) == 2
    assert naive_cell_dim(mod, 1, 1) == 3
    assert naive_cell_dim(mod, 2, 1) == 2


def test_veronese_strand_against_oracle(veronese):
    dims = [kz.cell_dim(veronese, p, 1) for p in range(1, 5)]
    assert dims == [6, 8, 3, 0]
    assert [naive_cell_dim(veronese, p, 1) for p in range(1, 5)] == dims


def test_veronese_kernel_dimension_example(veronese):
    d31 = kz.assemble_differential(veronese, 3, 1)
    d40 = kz.assemble_differential(veronese, 4, 0)
    assert d31.cols - d31.rank() == d40.rank() + 3


def test_paper_threshold_K41_vanishes(veronese):
    assert kz.cell_dim(veronese, 4, 1) == 0


def test_beyond_window_boundary(veronese, cubics_module):
    # K_{n,1} = 0 at p = dim V for the suite's modules
    assert kz.cell_dim(veronese, veronese.vdim, 1) == 0
    assert kz.cell_dim(cubics_module, cubics_module.vdim, 1) == 0


def test_blocked_equals_direct_on_cubics(cubics_module):
    for p in (1, 4, 7):
        blocked = kz.differential_rank(cubics_module, p, 1)
        direct = kz.assemble_differential(cubics_module, p, 1).rank()
        assert blocked == direct


def test_cell_nonzero_matches_dims(cubics_module):
    for p in range(1, 10):
        assert kz.cell_nonzero(cubics_module, p, 1) == \
            (kz.cell_dim(cubics_module, p, 1) > 0)


# -- betti tables -------------------------------------------------------------

def test_betti_table_rows(veronese):
    table = kz.betti_table(veronese, range(1, 5), [1])
    assert [d for (_, _, d) in table.rows()] == [6, 8, 3, 0]


def test_betti_empty_range(veronese):
    table = kz.betti_table(veronese, [], [])
    assert table.entries == {}


def test_betti_q0_row_standing(veronese):
    table = kz.betti_table(veronese, range(0, 4), [0])
    assert table.standing_ok
    assert table.dim(0, 0) == 1
    assert all(table.dim(p, 0) == 0 for p in range(1, 4))


# -- (M_k) --------------------------------------------------------------------

def test_mk_quartic_true(quartic_module):
    verdict = kz.check_Mk(quartic_module, 2)
    assert verdict.verdict
    assert verdict.threshold == 7
    assert [p for p, _ in verdict.witnesses] == [7, 8, 9]


def test_mk_quintic_false_with_witness_six(quintic_module):
    verdict = kz.check_Mk(quintic_module, 3)
    assert not verdict.verdict
    assert verdict.threshold == 6
    assert verdict.witnesses[0][0] == 6 and verdict.witnesses[0][1] > 0


def test_mk_large_k_uses_computed_range(quartic_module):
    # threshold below 1: the verdict comes from the full computed range
    verdict = kz.check_Mk(quartic_module, quartic_module.dim(1) + 5)
    assert verdict.threshold < 1
    assert [p for p, _ in verdict.witnesses] == list(range(1, 10))
    assert not verdict.verdict  # the quartic has plenty of low syzygies


def test_mk_empty_window_vacuous(prime):
    import numpy as np
    from syzlab.graded_modules import GradedModule, Piece
    one = np.ones((1, 1), dtype=np.int64)
    mod = GradedModule(prime, 1,
                       [Piece(dim=1, monomials=[(0,)]) for _ in range(3)],
                       [[one], [one]],
                       {"kind": "restriction", "h0L": 1, "a0_is_one": True,
                        "a1_is_full_v": True})
    verdict = kz.check_Mk(mod, 0)
    assert verdict.verdict and verdict.witnesses == []


def test_mk_refuses_plain_ambient(veronese):
    with pytest.raises(ValueError):
        kz.check_Mk(veronese, 2)


def test_les_route_agrees_with_direct(quartic_module):
    # flanking cells vanish from p = 7 on; below that the route reports
    # itself unavailable instead of guessing
    for p in (7, 8):
        got = kz.restriction_cell_via_les(quartic_module, p)
        assert got is not None
        assert got[0] == kz.koszul_dimension(quartic_module, p, 1).dim_K
    assert kz.restriction_cell_via_les(quartic_module, 6) is None
    bound = kz.restriction_cell_lower_bound(quartic_module, 6)
    assert bound is not None
    assert kz.koszul_dimension(quartic_module, 6, 1).dim_K >= bound[0] > 0


def test_les_lower_bound_on_quintic(quintic_module):
    bound = kz.restriction_cell_lower_bound(quintic_module, 6)
    assert bound is not None and bound[0] > 0
    assert kz.koszul_dimension(quintic_module, 6, 1).dim_K == bound[0]


# -- euler checks -------------------------------------------------------------

def test_euler_l0(veronese):
    assert kz.euler_check(veronese, 0)


def test_euler_veronese_l2(veronese):
    assert kz.euler_check(veronese, 2)


def test_euler_quartic_module(quartic_module):
    assert kz.euler_check(quartic_module, 2)


def test_euler_corrupted_action_fails(p2_surface, prime):
    mod = build_ambient_module(p2_surface, DivisorClass.degree(0),
                               DivisorClass.degree(2), 3, prime)
    mod.action[1][2][0, 0] = (mod.action[1][2][0, 0] + 1) % prime.p
    mod.rank_cache.clear()
    mod.flag_cache.clear()
    assert not kz.euler_check(mod, 2)


# -- standing hypotheses ------------------------------------------------------

def test_standing_hypotheses_hold(veronese, quartic_module):
    assert kz.verify_standing_hypotheses(veronese, range(1, 6))
    assert kz.verify_standing_hypotheses(quartic_module, [5, 6, 7])


# -- duality instance ---------------------------------------------------------

def test_duality_k2_pointwise(prime):
    ok, details = kz.duality_instance_check(2, prime)
    assert ok
    by_p = {rec["p"]: rec for rec in details}
    assert by_p[3]["left"] == by_p[3]["right"] == 3
    assert by_p[4]["left"] == by_p[4]["right"] == 0


def test_duality_rejects_large_k(prime):
    with pytest.raises(ValueError):
        kz.duality_instance_check(5, prime)


# -- class spaces -------------------------------------------------------------

def test_class_space_dim_matches_cell(veronese):
    cs = kz.ClassSpace(veronese, 2, 1)
    assert cs.dim == kz.cell_dim(veronese, 2, 1) == 8
    basis = cs.class_basis()
    assert basis.shape[0] == 8
    for row in basis:
        cs.assert_cocycle(row)
        assert not cs.is_zero_class(row)


def test_class_space_boundaries_are_zero_classes(veronese):
    cs = kz.ClassSpace(veronese, 2, 1)
    incoming = kz.assemble_differential(veronese, 3, 0).to_dense()
    rng = np.random.default_rng(7)
    coef = rng.integers(0, veronese.p, size=incoming.shape[1]).astype(np.int64)
    from syzlab import _gauss
    boundary = _gauss.mul_mod(incoming, coef.reshape(-1, 1),
                              veronese.p).reshape(-1)
    assert cs.is_zero_class(boundary)


def test_multi_prime_stability_veronese(prime, prime2):
    surf = SurfaceModel(P2)
    dims = []
    for pr in (prime, prime2):
        mod = build_ambient_module(surf, DivisorClass.degree(0),
                                   DivisorClass.degree(2), 3, pr)
        dims.append([kz.cell_dim(mod, p, 1) for p in range(1, 5)])
    assert dims[0] == dims[1]
