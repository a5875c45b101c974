import random

import numpy as np
import pytest

from syzlab import _gauss
from syzlab import koszul as kz
from syzlab.graded_modules import (CurveModel, build_ambient_module,
                                   evaluation_split, find_rational_points,
                                   truncate_at_points)
from syzlab.multilinear import DivisorClass, SurfaceModel, P1, P2
from syzlab.projection import (InclusionNotInjectiveError, ProjectionContext,
                               StandingHypothesisError, SyzygyClass,
                               contract_components, del_global,
                               ehbauer_membership, generic_drop_check,
                               lift_eta, project_syzygy,
                               remark_identity_check,
                               sequence_exactness_check, survival_sample)


@pytest.fixture(scope="module")
def veronese_points(veronese, prime):
    """Generic projection centers for the Veronese module: plane points."""
    curve = CurveModel(SurfaceModel(P2), {(2, 0, 0): 1, (0, 2, 0): 1,
                                          (0, 0, 2): prime.p - 1},
                       DivisorClass.degree(2), prime)
    # any smooth conic supplies plenty of rational points to evaluate at;
    # attach the curve so evaluation works, then forget it again
    pts = find_rational_points(curve, 24, seed=11)
    veronese.curve = curve
    return pts


@pytest.fixture(scope="module")
def veronese_basis(veronese):
    return kz.ClassSpace(veronese, 2, 1)


def make_alpha(space, module, seed=1):
    rng = random.Random(seed)
    basis = space.class_basis()
    coeffs = np.array([rng.randrange(1, module.p) for _ in range(basis.shape[0])],
                      dtype=np.int64)
    rep = _gauss._row_combo_mod(coeffs, basis, module.p)
    return SyzygyClass(module, space.p, 1, rep)


# -- cocycle discipline -------------------------------------------------------

def test_syzygy_class_rejects_non_cocycle(veronese):
    rng = np.random.default_rng(0)
    bad = rng.integers(1, veronese.p, size=veronese.dim(1) * 15).astype(np.int64)
    with pytest.raises(ValueError):
        SyzygyClass(veronese, 2, 1, bad)


# -- projection and lift ------------------------------------------------------

def test_project_pure_w_part_gives_zero(veronese, veronese_points):
    ctx = ProjectionContext(veronese, veronese_points[0])
    cs_w = kz.ClassSpace(ctx.w_module, 2, 1)
    beta = SyzygyClass(ctx.w_module, 2, 1, cs_w.class_basis()[0], context="W")
    alpha = lift_eta(beta, ctx)
    gamma = project_syzygy(alpha, ctx)
    assert gamma.is_zero_rep()


def test_v0_component_extraction_roundtrip(veronese, veronese_points):
    # coordinate surgery only: a cochain built as b (x) (v0 ^ omega) has
    # exactly the expected trailing block in adapted coordinates
    from math import comb
    ctx = ProjectionContext(veronese, veronese_points[0])
    n = veronese.vdim
    nb = veronese.dim(1)
    rng = np.random.default_rng(3)
    w_part = rng.integers(0, veronese.p,
                          size=(nb, comb(n - 1, 2))).astype(np.int64)
    padded = np.zeros((nb, comb(n, 3)), dtype=np.int64)
    padded[:, comb(n - 1, 3):] = w_part
    std = ctx.to_standard(padded, 3)
    back = ctx.to_adapted(std.reshape(-1), 1, 3)
    assert np.array_equal(back, padded)
    assert np.array_equal(back[:, comb(n - 1, 3):], w_part)


def test_lift_then_project_roundtrip(veronese, veronese_points):
    ctx = ProjectionContext(veronese, veronese_points[1])
    cs_w = kz.ClassSpace(ctx.w_module, 2, 1)
    for row in cs_w.class_basis()[:3]:
        beta = SyzygyClass(ctx.w_module, 2, 1, row, context="W")
        lifted = lift_eta(beta, ctx)
        back = project_syzygy(lifted, ctx)
        assert back.is_zero_rep()  # lifted classes have no v0 component


def test_lemma_2_3_lift_injective_on_classes(veronese, veronese_points):
    cs_v = kz.ClassSpace(veronese, 2, 1)
    for x in veronese_points[:5]:
        ctx = ProjectionContext(veronese, x)
        cs_w = kz.ClassSpace(ctx.w_module, 2, 1)
        basis = cs_w.class_basis()
        lifted = np.array([cs_v.nf(lift_eta(
            SyzygyClass(ctx.w_module, 2, 1, b, context="W"), ctx).rep)
            for b in basis], dtype=np.int64)
        assert _gauss.rank(lifted, veronese.p) == basis.shape[0]
        assert basis.shape[0] <= cs_v.dim


# -- global contraction -------------------------------------------------------

def test_contract_components_shape(veronese):
    cs = kz.ClassSpace(veronese, 2, 1)
    comps = contract_components(veronese, 2, 1, cs.class_basis()[0])
    assert len(comps) == veronese.vdim


def test_remark_identity_bit_exact(veronese, veronese_points):
    cs = kz.ClassSpace(veronese, 2, 1)
    for x in veronese_points[:4]:
        ctx = ProjectionContext(veronese, x)
        for row in cs.class_basis()[:4]:
            assert remark_identity_check(SyzygyClass(veronese, 2, 1, row), ctx)


def test_lemma_2_2_del_injective_veronese(veronese):
    mat, cs_hi, cs_lo = del_global(veronese, 2)
    assert cs_hi.dim == 8
    assert mat.rank() == 8


def test_del_refused_without_standing_hypotheses(prime):
    # a module whose second generator annihilates everything has
    # K_{1,0} != 0, violating the degree-zero hypothesis
    from syzlab.graded_modules import GradedModule, Piece
    one = np.ones((1, 1), dtype=np.int64)
    zero = np.zeros((1, 1), dtype=np.int64)
    mod = GradedModule(prime, 2,
                       [Piece(dim=1, monomials=[(0,)]) for _ in range(3)],
                       [[one, zero], [one, zero]],
                       {"kind": "restriction", "h0L": 1})
    with pytest.raises(StandingHypothesisError):
        del_global(mod, 1)


# -- survival -----------------------------------------------------------------

def test_survival_zero_class_rejected(veronese, veronese_points):
    incoming = kz.assemble_differential(veronese, 3, 0).to_dense()
    coef = np.ones(incoming.shape[1], dtype=np.int64)
    boundary = _gauss.mul_mod(incoming, coef.reshape(-1, 1),
                              veronese.p).reshape(-1)
    zero_class = SyzygyClass(veronese, 2, 1, boundary)
    with pytest.raises(ValueError):
        survival_sample(zero_class, veronese_points[:3], veronese)


def test_survival_fraction_high(veronese, veronese_basis, veronese_points):
    alpha = make_alpha(veronese_basis, veronese, seed=2)
    frac, outcomes = survival_sample(alpha, veronese_points[:20], veronese)
    assert frac >= 0.9


def test_adversarial_alpha_dies_at_its_point(veronese, veronese_points):
    # build alpha inside wedge^3 W_x for a fixed x: it dies there
    ctx = ProjectionContext(veronese, veronese_points[0])
    cs_w3 = kz.ClassSpace(ctx.w_module, 3, 1)
    beta = SyzygyClass(ctx.w_module, 3, 1, cs_w3.class_basis()[0], context="W")
    alpha = lift_eta(beta, ctx)
    frac, outcomes = survival_sample(alpha, veronese_points[:6], veronese)
    assert outcomes[0] is False
    assert any(outcomes[1:])


# -- containment on the rational normal curve ----------------------------------

@pytest.fixture(scope="module")
def twisted_cubic(prime):
    surf = SurfaceModel(P1)
    mod = build_ambient_module(surf, DivisorClass.degree(0),
                               DivisorClass.degree(3), 3, prime)
    mod.labels["kind"] = "restriction"
    mod.curve = CurveModel(surf, None, None, prime)
    return mod


def test_ehbauer_on_twisted_cubic(twisted_cubic, prime):
    mod = twisted_cubic
    pts = find_rational_points(mod.curve, 3, seed=13)
    cs_v = kz.ClassSpace(mod, 2, 1)
    assert cs_v.dim == 2
    for x in pts:
        ctx = ProjectionContext(mod, x, build_truncated=True)
        for row in cs_v.class_basis():
            gamma = project_syzygy(SyzygyClass(mod, 2, 1, row), ctx)
            assert ehbauer_membership(gamma, ctx)


def test_zero_projected_class_is_member(twisted_cubic):
    pts = find_rational_points(twisted_cubic.curve, 1, seed=14)
    ctx = ProjectionContext(twisted_cubic, pts[0], build_truncated=True)
    zero = SyzygyClass(ctx.w_module, 1, 1,
                       np.zeros(twisted_cubic.dim(1) * 3, dtype=np.int64),
                       context="W")
    assert ehbauer_membership(zero, ctx)


def test_drop_check_on_rational_normal_curves(twisted_cubic):
    pts = find_rational_points(twisted_cubic.curve, 4, seed=15)
    report = generic_drop_check(twisted_cubic, 2, pts)
    assert report["passed"]
    assert all(rec["dim"] == 1 for rec in report["per_point"])


def test_drop_check_hypothesis_violation(twisted_cubic):
    pts = find_rational_points(twisted_cubic.curve, 1, seed=16)
    with pytest.raises(ValueError):
        generic_drop_check(twisted_cubic, 3, pts)  # K_{3,1}(P1, O(3)) = 0


# -- exactness bookkeeping ----------------------------------------------------

def test_sequence_exactness_on_veronese(veronese, veronese_points):
    ctx = ProjectionContext(veronese, veronese_points[2])
    out = sequence_exactness_check(ctx, 2)
    assert out["applicable"] and out["exact"]
    assert out["rank_eta"] + out["rank_pi"] == out["dim_K_V"] == 8
