from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fintopos.cohomology import (
    ZERO,
    Z,
    AbSheaf,
    CochainComplex,
    FgAbGroup,
    cohomological_dimension_bounds,
    cohomology,
    constant_ab,
    cyclic,
    global_sections_group,
    homotopy_dimension_upper,
    integral_homology,
    nerve_complex,
    order_complex,
    pushforward_constant,
    sheaf_cohomology,
    simplicial_cohomology,
    skyscraper_ab,
    vanishing_audit,
)
from fintopos.errors import NotFunctorial, SpaceMismatch, VanishingViolated
from fintopos.finposet import chain, discrete, krull_dimension, pseudo_circle, random_poset, sierpinski
from fintopos.generators import random_ab_sheaf
from fintopos.sheaf import sections
from fintopos.simplicial import CombComplex

SIERP = sierpinski()
PCIRC = pseudo_circle()
DISC3 = discrete(3)
CHAIN3 = chain(3)


def strs(H):
    return [str(g) for g in H]


@st.composite
def pairs(draw, max_points=7):
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    X = random_poset(rng, rng.randint(1, max_points))
    return X, random_ab_sheaf(rng, X)


def test_groups_are_canonical():
    assert FgAbGroup.from_cyclic([6, 0, 4, 1]) == FgAbGroup(1, (2, 12))
    assert str(FgAbGroup(2, (2,))) == "Z^2 + Z/2"
    assert str(ZERO) == "0" and ZERO.is_trivial
    assert cyclic(1) == ZERO and cyclic(0) == Z
    assert FgAbGroup(0, (2, 4)).order() == 8
    with pytest.raises(ValueError):
        FgAbGroup(0, (2, 3))


def test_point_space_cohomology_is_the_stalk():
    X = discrete(1)
    A = FgAbGroup(1, (3,))
    assert sheaf_cohomology(X, constant_ab(X, A), 2) == [A, ZERO, ZERO]


def test_sierpinski_constant_z():
    C = nerve_complex(SIERP, constant_ab(SIERP, Z))
    assert C.ranks[:2] == [2, 1]
    assert strs(cohomology(C))[:2] == ["Z", "0"]


def test_pseudo_circle_constant_z():
    assert strs(sheaf_cohomology(PCIRC, constant_ab(PCIRC, Z), 4)) == ["Z", "Z", "0", "0", "0"]
    assert strs(vanishing_audit(PCIRC, constant_ab(PCIRC, Z)).table) == ["Z", "Z", "0", "0", "0"]


def test_small_complexes():
    C = CochainComplex.from_dense([[0], [0]], [[[2]]])
    assert strs(cohomology(C)) == ["0", "Z/2"]
    zero = CochainComplex.from_dense([[], [], []], [[], []])
    assert all(g.is_trivial for g in cohomology(zero))


def test_order_complexes():
    K = order_complex(SIERP)
    assert sorted(len(s) for s in K.J if s) == [1, 1, 2]
    K = order_complex(PCIRC)
    assert [len(K.simplices_by_dim()[d]) for d in range(2)] == [4, 4] and K.dimension == 1
    circle = CombComplex(range(3), [[0, 1], [1, 2], [0, 2]])
    assert strs(simplicial_cohomology(circle, Z)) == ["Z", "Z"]
    assert strs(integral_homology(circle)) == ["Z", "Z"]


def test_universal_coefficients_on_projective_plane():
    # six-vertex triangulation of RP^2
    faces = [(0, 1, 4), (0, 1, 5), (0, 2, 3), (0, 2, 4), (0, 3, 5), (1, 2, 3), (1, 2, 5), (1, 3, 4), (2, 4, 5), (3, 4, 5)]
    K = CombComplex(range(6), faces)
    assert strs(integral_homology(K)) == ["Z", "Z/2", "0"]
    assert strs(simplicial_cohomology(K, Z)) == ["Z", "0", "Z/2"]
    assert strs(simplicial_cohomology(K, cyclic(2))) == ["Z/2", "Z/2", "Z/2"]
    assert strs(simplicial_cohomology(K, cyclic(3))) == ["Z/3", "0", "0"]


def test_oracle_agreement_up_to_five_points():
    from fintopos.finposet import enumerate_posets

    for n in range(1, 6):
        for X in enumerate_posets(n):
            for A in (Z, cyclic(2), cyclic(3), FgAbGroup(1, (2,))):
                got = sheaf_cohomology(X, constant_ab(X, A), n)
                want = (simplicial_cohomology(order_complex(X), A) + [ZERO] * (n + 1))[: n + 1]
                assert got == want


@settings(max_examples=80, deadline=None)
@given(pairs())
def test_vanishing_above_krull_dimension(pair):
    X, F = pair
    rep = vanishing_audit(X, F)
    assert rep.ok and rep.krull == krull_dimension(X)


@settings(max_examples=80, deadline=None)
@given(pairs())
def test_differential_squares_to_zero(pair):
    X, F = pair
    nerve_complex(X, F).check_d_squared()


@settings(max_examples=60, deadline=None)
@given(pairs(max_points=5))
def test_degree_zero_is_global_sections(pair):
    X, F = pair
    G = global_sections_group(F)
    assert cohomology(nerve_complex(X, F))[0] == G
    if all(s.rank == 0 for s in F.stalks):
        S = F.underlying_set_sheaf()
        assert len(sections(S, range(X.n))) == G.order()


def test_chain_sheaves_vanish_above_two():
    rng = random.Random(5)
    for _ in range(30):
        H = sheaf_cohomology(CHAIN3, random_ab_sheaf(rng, CHAIN3), 5)
        assert all(g.is_trivial for g in H[3:])


def test_skyscraper_and_pushforward():
    F = skyscraper_ab(PCIRC, 2, Z)
    assert strs(sheaf_cohomology(PCIRC, F, 2)) == ["Z", "0", "0"]
    # c and d are separate components of up(a) inside {c, d}
    G = pushforward_constant(PCIRC, {2, 3}, Z)
    assert G.stalks[0] == FgAbGroup(2) and G.stalks[2] == Z


def test_dimension_bounds():
    assert cohomological_dimension_bounds(DISC3) == (0, 0)
    assert cohomological_dimension_bounds(PCIRC) == (1, 1)
    assert cohomological_dimension_bounds(SIERP) == (0, 1)
    assert [homotopy_dimension_upper(X) for X in (DISC3, SIERP, PCIRC)] == [0, 1, 1]


def test_sheaf_on_other_space_is_rejected():
    with pytest.raises(SpaceMismatch):
        nerve_complex(PCIRC, constant_ab(SIERP, Z))


def test_generization_must_respect_relations():
    with pytest.raises(NotFunctorial):
        AbSheaf(SIERP, [cyclic(2), Z], {(0, 1): [[1]]})


def test_violation_type_is_an_assertion():
    assert issubclass(VanishingViolated, AssertionError)
