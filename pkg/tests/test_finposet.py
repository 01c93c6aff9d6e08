from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fintopos.errors import CoreConditionFailed, CycleDetected, NotACover, NotOpen, ShrinkingUnavailable
from fintopos.finposet import (
    ContinuousMap,
    Cover,
    OpenSet,
    boundary,
    build_poset,
    canonical_form,
    chain,
    closure,
    covering_dimension,
    covering_dimension_bruteforce,
    discrete,
    enumerate_posets,
    find_isomorphism,
    heyting_dimension,
    interior,
    irreducible_closeds,
    krull_dimension,
    minimal_open,
    pseudo_circle,
    random_poset,
    refine_cover_core,
    sierpinski,
    subspace,
)

A, B, C, D = range(4)  # pseudo-circle points, a, b < c, d

SIERP = sierpinski()
PCIRC = pseudo_circle()
DISC3 = discrete(3)
CHAIN3 = chain(3)


@st.composite
def posets(draw, max_points=7):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(0, max_points))
    return random_poset(random.Random(seed), n)


def test_fixtures_from_relations():
    assert build_poset(2, [(0, 1)]) == SIERP
    assert build_poset(3, []) == DISC3
    with pytest.raises(CycleDetected):
        build_poset(2, [(0, 1), (1, 0)])


def test_relations_are_closed_transitively():
    X = build_poset(3, [(0, 1), (1, 2)])
    assert X.leq(0, 2)
    assert X == CHAIN3


def test_closure_interior_boundary():
    assert closure(SIERP, {1}) == {0, 1}
    assert closure(PCIRC, {C}) == {A, B, C}
    assert closure(DISC3, {0}) == {0}
    assert interior(PCIRC, {A, C, D}) == {A, C, D}
    assert interior(PCIRC, {A, B, C}) == {C}
    assert boundary(SIERP, {1}) == {0}
    assert boundary(PCIRC, {C, D}) == {A, B}
    assert boundary(DISC3, {0}) == frozenset()


def test_minimal_opens():
    assert minimal_open(SIERP, 0).members == {0, 1}
    assert minimal_open(SIERP, 1).members == {1}
    assert minimal_open(PCIRC, A).members == {A, C, D}


def test_open_sets_must_be_up_closed():
    with pytest.raises(NotOpen):
        OpenSet(SIERP, frozenset({0}))


def test_irreducible_closeds_have_generic_points():
    assert sorted(irreducible_closeds(SIERP), key=lambda p: p[1]) == [({0}, 0), ({0, 1}, 1)]
    assert sorted(g for _, g in irreducible_closeds(DISC3)) == [0, 1, 2]
    got = {g: Z for Z, g in irreducible_closeds(PCIRC)}
    assert got == {A: {A}, B: {B}, C: {A, B, C}, D: {A, B, D}}


def test_dimensions_of_fixtures():
    assert [krull_dimension(X) for X in (SIERP, DISC3, CHAIN3, PCIRC)] == [1, 0, 2, 1]
    assert [heyting_dimension(X) for X in (SIERP, DISC3, PCIRC)] == [1, 0, 1]
    # every cover of the Sierpinski space contains the whole space
    assert [covering_dimension(X) for X in (SIERP, DISC3, PCIRC)] == [0, 0, 1]


def test_empty_space_has_dimension_minus_one():
    E = build_poset(0, [])
    assert krull_dimension(E) == heyting_dimension(E) == covering_dimension(E) == -1


def test_covering_dimension_formula_matches_definition():
    for n in range(5):
        for X in enumerate_posets(n):
            assert covering_dimension(X) == covering_dimension_bruteforce(X)


@settings(max_examples=150, deadline=None)
@given(posets(max_points=9))
def test_krull_equals_heyting(X):
    assert krull_dimension(X) == heyting_dimension(X)


def test_poset_counts_up_to_isomorphism():
    assert [len(enumerate_posets(n)) for n in range(6)] == [1, 1, 2, 5, 16, 63]


@settings(max_examples=100, deadline=None)
@given(posets(max_points=6), st.randoms(use_true_random=False))
def test_relabelled_posets_are_isomorphic(X, rnd):
    perm = list(range(X.n))
    rnd.shuffle(perm)
    Y = build_poset(X.n, [(perm[x], perm[y]) for x in range(X.n) for y in range(X.n) if X.leq(x, y)])
    f = find_isomorphism(X, Y)
    assert f is not None
    assert all(X.leq(x, y) == Y.leq(f[x], f[y]) for x in range(X.n) for y in range(X.n))
    assert canonical_form(X) == canonical_form(Y)


def test_subspaces():
    assert subspace(SIERP, {0}).n == 1
    assert subspace(PCIRC, {A, B, C}) == build_poset(3, [(0, 2), (1, 2)])
    assert subspace(PCIRC, set()).n == 0


def test_preimage_of_open_is_open():
    f = ContinuousMap(PCIRC, SIERP, (0, 0, 1, 1))
    assert f.preimage_mask(0b10) == 0b1100
    with pytest.raises(ValueError):
        ContinuousMap(SIERP, PCIRC, (C, A))


def test_cover_must_cover():
    with pytest.raises(NotACover):
        Cover(PCIRC, (frozenset({C}), frozenset({D})))


def test_core_refinement_with_singletons_keeps_the_cover():
    cover = Cover(DISC3, tuple(frozenset({i}) for i in range(3)))
    subs = {frozenset({i}): [frozenset({i})] for i in range(3)}
    W, pi = refine_cover_core(DISC3, cover, 0, subs)
    nonempty = {(m.members, pi[lab]) for lab, m in zip(W.labels, W.members) if m.members}
    assert nonempty == {(frozenset({i}), i) for i in range(3)}


def test_core_refinement_on_a_single_member():
    W, pi = refine_cover_core(SIERP, Cover(SIERP, (frozenset({0, 1}),)), 0, {frozenset({0}): [frozenset({0, 1})]})
    assert set(pi.values()) == {0}


def test_core_refinement_needs_a_closure_shrinking():
    cover = Cover(PCIRC, (frozenset({A, C, D}), frozenset({B, C, D})))
    with pytest.raises(ShrinkingUnavailable):
        refine_cover_core(PCIRC, cover, 1, {frozenset({0, 1}): [frozenset({C, D})]})


def test_core_formula_can_break_the_overlap_condition():
    X = discrete(2)
    full = frozenset({0, 1})
    cover = Cover(X, (full, full, full))
    subs = {
        frozenset({0, 2}): [full],
        frozenset({1, 2}): [full],
        frozenset({0, 1}): [frozenset({0}), frozenset({1})],
    }
    with pytest.raises(CoreConditionFailed):
        refine_cover_core(X, cover, 1, subs)
