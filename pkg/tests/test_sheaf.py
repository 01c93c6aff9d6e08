from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fintopos.errors import NotFunctorial, TooLarge
from fintopos.finposet import ContinuousMap, build_poset, discrete, pseudo_circle, random_poset, sierpinski
from fintopos.generators import presheaf_corpus, random_morphism, random_presheaf, random_set_sheaf
from fintopos.sheaf import (
    CechNerve,
    SetSheaf,
    SheafMorphism,
    cech_effective,
    colim_finite,
    constant_presheaf,
    constant_sheaf,
    coproduct,
    fiber_product,
    find_isomorphism,
    fold_map,
    hom_set,
    image_factorization,
    is_iso,
    is_mono,
    is_separated,
    is_sheaf,
    is_surjective,
    plus_construction,
    presheaf_isomorphic,
    pullback,
    pullback_is_injective,
    pushforward,
    sections,
    sheafify_plus,
    skyscraper,
    subobject_lattice,
    terminal_sheaf,
)

SIERP = sierpinski()
PCIRC = pseudo_circle()
DISC3 = discrete(3)
POINT = discrete(1)


@st.composite
def spaces(draw, max_points=5):
    return random_poset(random.Random(draw(st.integers(0, 2**32 - 1))), draw(st.integers(1, max_points)))


@st.composite
def morphisms(draw, max_points=5):
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    return random_morphism(rng, random_poset(rng, rng.randint(1, max_points)), 3)


def test_generization_maps_must_compose():
    X = build_poset(3, [(0, 1), (1, 2)])
    with pytest.raises(NotFunctorial):
        SetSheaf(X, [["a", "b"], ["a", "b"], ["a", "b"]], {(0, 1): [0, 1], (1, 2): [0, 1], (0, 2): [1, 0]})


def test_sections_of_skyscraper():
    F = skyscraper(SIERP, 0, ["p", "q"])
    assert len(sections(F, {0, 1})) == 2
    assert len(sections(F, {1})) == 1


def test_sections_of_constant_sheaf_count_components():
    F = constant_sheaf(PCIRC, ["u", "v"])
    assert len(sections(F, {0, 1, 2, 3})) == 2
    assert len(sections(F, {2, 3})) == 4


def test_sections_presheaf_is_a_sheaf():
    for seed in range(30):
        rng = random.Random(seed)
        F = random_set_sheaf(rng, random_poset(rng, rng.randint(1, 5)))
        assert is_sheaf(F.sections_presheaf())


def test_constant_presheaf_on_disjoint_opens_is_not_a_sheaf():
    P = constant_presheaf(DISC3, ["a", "b"])
    assert not is_sheaf(P)
    assert not is_sheaf(P, exhaustive=True)


def test_presheaves_on_a_point_are_sheaves():
    P = constant_presheaf(POINT, ["a", "b", "c"])
    assert is_sheaf(P)


def test_sheafify_a_sheaf_gives_it_back():
    F = random_set_sheaf(random.Random(3), PCIRC)
    G, unit = sheafify_plus(F.sections_presheaf())
    assert unit.is_iso()
    assert find_isomorphism(F, G) is not None


def test_sheafify_constant_presheaf_gives_constant_sheaf():
    F, unit = sheafify_plus(constant_presheaf(DISC3, ["a", "b"]))
    assert find_isomorphism(F, constant_sheaf(DISC3, ["a", "b"])) is not None
    assert unit.check_natural()


def test_plus_of_separated_presheaf_is_a_sheaf():
    for P in presheaf_corpus(7, 40, max_points=5):
        if is_separated(P):
            Q, _ = plus_construction(P)
            assert is_sheaf(Q)


def test_plus_shortcut_agrees_with_all_sieves():
    for P in presheaf_corpus(3, 25, max_points=4, max_value=3):
        Q1, _ = plus_construction(P)
        Q2, _ = plus_construction(P, all_sieves=True)
        assert presheaf_isomorphic(Q1, Q2)


def test_plus_makes_any_presheaf_separated():
    for P in presheaf_corpus(1, 60):
        Q, _ = plus_construction(P)
        assert is_separated(Q)


def test_two_plus_steps_always_suffice():
    for P in presheaf_corpus(1, 200):
        Q, _ = plus_construction(P)
        R, _ = plus_construction(Q)
        assert is_sheaf(R)


def test_known_one_step_failure():
    # a non-separated presheaf for which one plus step is not enough
    P = presheaf_corpus(1, 200)[181]
    Q, _ = plus_construction(P)
    assert not is_separated(P)
    assert not is_sheaf(Q) and not is_sheaf(Q, exhaustive=True)
    F, _ = sheafify_plus(P)
    assert is_sheaf(F.sections_presheaf())


def test_binary_gluing_matches_exhaustive_checker():
    rng = random.Random(11)
    for _ in range(60):
        P = random_presheaf(rng, random_poset(rng, rng.randint(1, 4)), 3)
        assert is_sheaf(P) == is_sheaf(P, exhaustive=True)


def test_mono_and_surjective_examples():
    F = constant_sheaf(PCIRC, ["a", "b"])
    one = SheafMorphism.identity(F)
    assert is_mono(one) and is_surjective(one) and is_iso(one)
    sub = constant_sheaf(PCIRC, ["a"])
    inc = SheafMorphism(sub, F, [[0]] * 4)
    assert is_mono(inc) and not is_surjective(inc)
    fold = fold_map(F)
    assert is_surjective(fold) and not is_mono(fold)


@settings(max_examples=60, deadline=None)
@given(morphisms())
def test_image_factorization_laws(phi):
    e, m = image_factorization(phi)
    assert is_surjective(e) and is_mono(m)
    assert e.then(m) == phi


def test_image_factorization_extremes():
    F = random_set_sheaf(random.Random(5), SIERP)
    e, m = image_factorization(SheafMorphism.identity(F))
    assert is_iso(e) and is_iso(m)


def test_subobject_lattice_sizes():
    assert len(subobject_lattice(constant_sheaf(SIERP, ["*"]))) == 3
    assert len(subobject_lattice(terminal_sheaf(DISC3))) == 8
    assert len(subobject_lattice(constant_sheaf(SIERP, []))) == 1
    with pytest.raises(TooLarge):
        subobject_lattice(constant_sheaf(DISC3, list(range(7))))


@settings(max_examples=80, deadline=None)
@given(morphisms())
def test_surjective_iff_pullback_injective(phi):
    assert is_surjective(phi) == pullback_is_injective(phi)


@settings(max_examples=80, deadline=None)
@given(morphisms())
def test_surjections_are_effective(phi):
    if is_surjective(phi):
        assert cech_effective(phi)


def test_cech_levels_of_two_points_over_a_point():
    F = constant_sheaf(POINT, ["a", "b"])
    phi = SheafMorphism(F, terminal_sheaf(POINT), [[0, 0]])
    N = CechNerve(phi)
    assert [N.level(n).size(0) for n in range(4)] == [2, 4, 8, 16]
    assert N.check_identities(3)


def test_cech_levels_of_iso_are_the_target():
    F = random_set_sheaf(random.Random(2), PCIRC)
    N = CechNerve(SheafMorphism.identity(F))
    for n in range(3):
        assert find_isomorphism(N.level(n), F) is not None


def test_fiber_product_is_stalkwise():
    F = constant_sheaf(SIERP, ["a", "b"])
    T = terminal_sheaf(SIERP)
    f = SheafMorphism(F, T, [[0, 0], [0, 0]])
    P, p1, p2 = fiber_product(f, f)
    assert [P.size(x) for x in range(2)] == [4, 4]


def test_colimits():
    F = constant_sheaf(DISC3, ["a", "b"])
    C, inj = colim_finite([F], [])
    assert find_isomorphism(C, F) is not None
    S, _ = coproduct([F, F])
    C2, _ = colim_finite([F, F], [])
    assert find_isomorphism(S, C2) is not None
    assert find_isomorphism(S, constant_sheaf(DISC3, range(4))) is not None


def test_identity_pushforward_and_pullback():
    F = random_set_sheaf(random.Random(4), PCIRC)
    one = ContinuousMap.identity(PCIRC)
    assert find_isomorphism(pushforward(one, F), F) is not None
    assert find_isomorphism(pullback(one, F), F) is not None


def test_pushforward_to_a_point_is_global_sections():
    F = random_set_sheaf(random.Random(9), PCIRC)
    G = pushforward(ContinuousMap.to_point(PCIRC), F)
    assert G.size(0) == len(sections(F, range(4)))


def test_pullback_pushforward_adjunction_by_counting():
    f = ContinuousMap.to_point(SIERP)
    F = skyscraper(SIERP, 0, ["p", "q"])
    for k in range(1, 4):
        G = constant_sheaf(POINT, range(k))
        assert len(hom_set(pullback(f, G), F)) == len(hom_set(G, pushforward(f, F)))


def test_sheaf_document_round_trip():
    from fintopos.docs import parse_set_sheaf

    F = random_set_sheaf(random.Random(12), PCIRC)
    G = parse_set_sheaf(F.to_doc())
    assert G.stalks == F.stalks
    assert all(G.g(x, y) == F.g(x, y) for x, y in PCIRC.covering_pairs)
