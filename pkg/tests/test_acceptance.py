"""Acceptance suite: one test per criterion, each printing a single verdict line.

The verdict lines are collected into a summary section at the end of every
pytest run (see conftest.py).
"""

from __future__ import annotations

import itertools
import random
import time

from fintopos.cohomology import ZERO, Z, FgAbGroup, constant_ab, cyclic, order_complex
from fintopos.cohomology import sheaf_cohomology, simplicial_cohomology
from fintopos.finposet import Cover, discrete, enumerate_posets, heyting_dimension, krull_dimension, pseudo_circle
from fintopos.finposet import random_poset, refine_cover_core
from fintopos.generators import morphism_corpus, presheaf_corpus, random_ab_sheaf, random_simplicial_set, random_space
from fintopos.lattice import check_duality, check_duality_space, enumerate_distributive_lattices
from fintopos.sheaf import cech_effective, is_sheaf, is_surjective, plus_construction, pullback_is_injective
from fintopos.simplicial import (
    coskeleton,
    coskeleton_unit,
    count_homs,
    cech_augmented,
    cyclic_group_table,
    enumerate_small,
    homology,
    is_hypercovering,
    mutilate,
    nerve_of_group,
    postnikov_truncate,
    skeleton,
)

SEED = 1


def verdict(record, number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    print(line)
    record("verdict", line)
    assert ok, detail


def _pad(H: list[FgAbGroup], n: int) -> list[FgAbGroup]:
    return (list(H) + [ZERO] * n)[:n]


def test_01_krull_equals_heyting(record_property):
    t0 = time.perf_counter()
    bad = []
    exhaustive = 0
    for n in range(6):
        for X in enumerate_posets(n):
            exhaustive += 1
            if krull_dimension(X) != heyting_dimension(X):
                bad.append(X.to_doc())
    rng = random.Random(SEED)
    for _ in range(500):
        X = random_poset(rng, rng.randint(0, 12))
        if krull_dimension(X) != heyting_dimension(X):
            bad.append(X.to_doc())
    dt = time.perf_counter() - t0
    verdict(record_property, 1, "Krull = Heyting", not bad and dt < 30,
            f"{exhaustive} posets up to iso + 500 random, {len(bad)} mismatches, {dt:.1f}s (limit 30s)")


def test_02_vanishing_above_krull_dimension(record_property):
    t0 = time.perf_counter()
    rng = random.Random(SEED)
    violations = []
    for i in range(500):
        X = random_space(rng, 8)
        F = random_ab_sheaf(rng, X, max_rank=2, max_exponent=4)
        assert all(s.rank <= 2 and s.exponent <= 4 for s in F.stalks)
        k = krull_dimension(X)
        H = sheaf_cohomology(X, F, X.n + 2)
        if any(not g.is_trivial for g in H[k + 1:]):
            violations.append(i)
    dt = time.perf_counter() - t0
    verdict(record_property, 2, "vanishing above Krull dimension", not violations and dt < 120,
            f"500 pairs, violations at {violations}, {dt:.1f}s (limit 120s)")


def test_03_cohomology_matches_order_complex(record_property):
    t0 = time.perf_counter()
    mismatches = []
    cases = 0
    for n in range(1, 8):
        for X in enumerate_posets(n):
            K = order_complex(X)
            for A in (Z, cyclic(2), cyclic(3)):
                cases += 1
                lhs = sheaf_cohomology(X, constant_ab(X, A), n)
                rhs = _pad(simplicial_cohomology(K, A), n + 1)
                if lhs != rhs:
                    mismatches.append((X.to_doc(), str(A)))
    pcirc = [str(g) for g in sheaf_cohomology(pseudo_circle(), constant_ab(pseudo_circle(), Z), 4)]
    dt = time.perf_counter() - t0
    ok = not mismatches and pcirc == ["Z", "Z", "0", "0", "0"] and dt < 60
    verdict(record_property, 3, "nerve cohomology = order-complex cohomology", ok,
            f"{cases} cases, {len(mismatches)} mismatches, PCIRC {pcirc}, {dt:.1f}s (limit 60s)")


def test_04_one_step_sheafification(record_property):
    t0 = time.perf_counter()
    not_sheaf, not_stable = [], []
    for i, P in enumerate(presheaf_corpus(SEED, 200, max_points=6, max_value=4)):
        Q, _ = plus_construction(P)
        if not is_sheaf(Q):
            not_sheaf.append(i)
        _, eta = plus_construction(Q)
        if not eta.is_iso():
            not_stable.append(i)
    dt = time.perf_counter() - t0
    ok = not not_sheaf and not not_stable and dt < 30
    verdict(record_property, 4, "F+ is a sheaf and F++ = F+", ok,
            f"200 presheaves, F+ not a sheaf at {not_sheaf}, F++ != F+ at {not_stable}, {dt:.1f}s (limit 30s)")


def test_05_surjective_iff_subobject_pullback_injective(record_property):
    bad = []
    surjective = 0
    for i, phi in enumerate(morphism_corpus(SEED, 200, max_points=5, max_stalk=3)):
        s = is_surjective(phi)
        surjective += s
        if s != pullback_is_injective(phi):
            bad.append(i)
    verdict(record_property, 5, "surjective <=> Sub pullback injective", not bad,
            f"200 morphisms ({surjective} surjective), disagreements at {bad}")


def test_06_cech_nerve_effective(record_property):
    bad = []
    count = 0
    for i, phi in enumerate(morphism_corpus(SEED, 200, max_points=5, max_stalk=3)):
        if is_surjective(phi):
            count += 1
            if not cech_effective(phi):
                bad.append(i)
    verdict(record_property, 6, "Cech coequalizer = target", count > 0 and not bad,
            f"{count} surjections, non-effective at {bad}")


def test_07_coskeleton_adjunction(record_property):
    t0 = time.perf_counter()
    small = enumerate_small(4, 3)
    mismatches = 0
    checked = 0
    for n in (0, 1, 2):
        for Y in small:
            C = coskeleton(Y, n, d_max=3)
            for X in small:
                checked += 1
                mismatches += count_homs(X, C) != count_homs(skeleton(X, n), Y)
    # sampled pairs up to six nondegenerate simplices
    rng = random.Random(SEED)
    sampled = 0
    for _ in range(150):
        X = random_simplicial_set(rng, 6, 3)
        Y = random_simplicial_set(rng, 6, 3)
        n = rng.choice((0, 1, 2))
        sampled += 1
        mismatches += count_homs(X, coskeleton(Y, n, d_max=3)) != count_homs(skeleton(X, n), Y)
    dt = time.perf_counter() - t0
    verdict(record_property, 7, "|Hom(X, cosk Y)| = |Hom(sk X, Y)|", mismatches == 0 and dt < 60,
            f"{checked} exhaustive triples (<= 4 cells) + {sampled} sampled (<= 6 cells), "
            f"{mismatches} mismatches, {dt:.1f}s (limit 60s)")


def test_08_hypercovering_predicate(record_property):
    bad = []
    mutilated = 0
    for i, phi in enumerate(morphism_corpus(SEED, 200, max_points=5, max_stalk=3)):
        A = cech_augmented(phi, 3)
        res = is_hypercovering(A, 3)
        if is_surjective(phi):
            if res != (True, None):
                bad.append(("surjection", i, res))
                continue
            try:
                B = mutilate(A, 2)
            except ValueError:
                continue
            mutilated += 1
            r2 = is_hypercovering(B, 3)
            if r2 != (False, 2):
                bad.append(("mutilated", i, r2))
        elif res != (False, 0):
            bad.append(("non-surjection", i, res))
    verdict(record_property, 8, "hypercovering predicate", mutilated > 0 and not bad,
            f"{mutilated} mutilated nerves fail exactly at n = 2, problems: {bad}")


def test_09_duality_round_trips(record_property):
    bad = []
    spaces = lattices = 0
    for n in range(6):
        for X in enumerate_posets(n):
            spaces += 1
            chk = check_duality_space(X)
            if not (chk.ok and len(chk.witness) == X.n):
                bad.append(("space", X.to_doc()))
    for m in range(1, 9):
        for L in enumerate_distributive_lattices(m):
            lattices += 1
            chk = check_duality(L)
            if not (chk.ok and len(chk.witness) == L.m):
                bad.append(("lattice", m))
    verdict(record_property, 9, "duality round trips", not bad,
            f"{spaces} spaces and {lattices} lattices, {len(bad)} failures")


def test_10_core_refinement_disc3(record_property):
    X = discrete(3)
    cover = Cover(X, (frozenset({0, 1}), frozenset({1, 2})))
    k = 1
    W, pi = refine_cover_core(X, cover, k, {frozenset({0, 1}): [frozenset({1})]})
    subcover = {frozenset({0, 1}): [frozenset({1})]}
    # (a) every member sits inside the member it refines
    a_ok = all(m.members <= cover.member(pi[lab]).members for lab, m in zip(W.labels, W.members))
    # (b) (k+1)-fold overlaps over distinct indices land in a member of the given subcover
    b_ok = True
    for combo in itertools.combinations(range(len(W)), k + 1):
        J = frozenset(pi[W.labels[i]] for i in combo)
        if len(J) != k + 1:
            continue
        inter = frozenset.intersection(*(W.members[i].members for i in combo))
        if inter and not any(inter <= V for V in subcover[J]):
            b_ok = False
    covered = frozenset().union(*(m.members for m in W.members)) == frozenset(range(3))
    verdict(record_property, 10, "core refinement on DISC3", a_ok and b_ok and covered,
            f"{len(W)} members, (a) {a_ok}, (b) {b_ok}, covers {covered}")


def test_11_postnikov_calibration(record_property):
    B = nerve_of_group(cyclic_group_table(2), 4)
    T1 = postnikov_truncate(B, 1)
    unit = coskeleton_unit(B, 2)
    bijective = all(sorted(u) == list(range(T1.sizes[k])) for k, u in enumerate(unit))
    faces_ok = all(
        unit[k - 1][B.faces[k][i][x]] == T1.faces[k][i][unit[k][x]]
        for k in range(1, 5) for i in range(k + 1) for x in range(B.sizes[k])
    )
    T0 = postnikov_truncate(B, 0)
    H0 = homology(T0)
    trivial = H0[0] == Z and all(g.is_trivial for g in H0[1:])
    ok = bijective and faces_ok and trivial
    verdict(record_property, 11, "Postnikov calibration", ok,
            f"tau_1 B(Z/2) levels {list(T1.sizes)} vs {list(B.sizes)}, unit bijective {bijective}, "
            f"simplicial {faces_ok}; tau_0 homology {[str(g) for g in H0]}")
