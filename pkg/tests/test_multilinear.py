from itertools import combinations
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_monomials_ruled, plane_count, ruled_count
from syzlab.multilinear import (DivisorClass, SurfaceModel, HIRZEBRUCH, P1, P2,
                                QUADRIC_BLOWUP, mono_mul, monomial_basis,
                                section_count, wedge_insert, wedge_list,
                                wedge_rank, wedge_unrank)


# -- monomial bases -----------------------------------------------------------

def test_p2_degree_two_has_six_monomials():
    assert len(monomial_basis(SurfaceModel(P2), DivisorClass.degree(2))) == 6


def test_p2_negative_degree_empty():
    assert monomial_basis(SurfaceModel(P2), DivisorClass.degree(-1)) == []


def test_sigma1_c0_plus_2f_has_five_monomials():
    surf = SurfaceModel(HIRZEBRUCH, e=1)
    basis = monomial_basis(surf, DivisorClass.ruled(1, 2))
    assert len(basis) == 5
    assert set(basis) == brute_monomials_ruled(1, 1, 2)


def test_p2_counts_match_binomials():
    surf = SurfaceModel(P2)
    for d in range(9):
        got = monomial_basis(surf, DivisorClass.degree(d))
        assert len(got) == plane_count(d) == section_count(surf, DivisorClass.degree(d))
        assert len(set(got)) == len(got)
        assert all(sum(m) == d for m in got)


def test_ruled_counts_match_enumeration():
    for e in range(4):
        surf = SurfaceModel(HIRZEBRUCH, e=e)
        for a in range(9):
            for b in range(9):
                cls = DivisorClass.ruled(a, b)
                got = monomial_basis(surf, cls)
                expect = brute_monomials_ruled(e, a, b)
                assert set(got) == expect
                assert len(got) == section_count(surf, cls)


def test_p1_basis():
    surf = SurfaceModel(P1)
    assert monomial_basis(surf, DivisorClass.degree(3)) == [(3, 0), (2, 1),
                                                            (1, 2), (0, 3)]


def test_mono_mul_adds_exponents():
    assert mono_mul((1, 2, 0), (0, 1, 3)) == (1, 3, 3)


def test_basis_order_is_deterministic():
    surf = SurfaceModel(HIRZEBRUCH, e=2)
    cls = DivisorClass.ruled(2, 5)
    assert monomial_basis(surf, cls) == monomial_basis(surf, cls)


# -- blowup model -------------------------------------------------------------

def test_blowup_points_sharing_a_ruling_rejected():
    with pytest.raises(ValueError):
        SurfaceModel(QUADRIC_BLOWUP, points=(((3, 1), (4, 1)), ((3, 1), (5, 1))),
                     point_modulus=101)
    with pytest.raises(ValueError):
        SurfaceModel(QUADRIC_BLOWUP, points=(((3, 1), (4, 1)), ((6, 1), (4, 1))),
                     point_modulus=101)
    # distinct rulings are fine
    SurfaceModel(QUADRIC_BLOWUP, points=(((3, 1), (4, 1)), ((6, 1), (5, 1))),
                 point_modulus=101)


# -- wedge combinatorics ------------------------------------------------------

def test_wedge_rank_colex_minimum():
    assert wedge_rank((0, 1, 2)) == 0


def test_wedge_rank_hand_value():
    # C(1,1) + C(3,2) + C(4,3) = 1 + 3 + 4
    assert wedge_rank((1, 3, 4)) == 8


def test_wedge_rank_malformed():
    with pytest.raises(ValueError):
        wedge_rank((2, 2))
    with pytest.raises(ValueError):
        wedge_rank((3, 1))


def test_round_trip_three_subsets_of_six():
    for s in combinations(range(6), 3):
        assert wedge_unrank(wedge_rank(s), 3, 6) == s


def test_round_trip_exhaustive_up_to_16():
    for n in range(17):
        for p in range(n + 1):
            for r in range(comb(n, p)):
                assert wedge_rank(wedge_unrank(r, p, n)) == r
            listed = wedge_list(n, p)
            assert [wedge_rank(s) for s in listed] == list(range(comb(n, p)))


def test_wedge_insert_repeated_factor():
    assert wedge_insert(2, (2, 5)) == (0, (2, 5))


def test_wedge_insert_front():
    assert wedge_insert(0, (1, 2)) == (1, (0, 1, 2))


def test_wedge_insert_two_smaller_entries():
    sign, merged = wedge_insert(3, (1, 2, 4))
    assert (sign, merged) == (1, (1, 2, 3, 4))


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(0, 11), min_size=0, max_size=5),
       st.integers(0, 11), st.integers(0, 11))
def test_double_insert_anticommutes(base, i, j):
    base = tuple(sorted(base))
    if i == j or i in base or j in base:
        return
    s1, m1 = wedge_insert(i, base)
    s2, _ = wedge_insert(j, m1)
    t1, n1 = wedge_insert(j, base)
    t2, _ = wedge_insert(i, n1)
    assert s1 * s2 == -t1 * t2
