import random

import numpy as np
import pytest

from gerbes import groups as grp
from gerbes.errors import MiddleMismatch, NotARefinement, NotMorita
from gerbes.extensions import band, band_class, cocycle_from_extension, complete_cocycle, extension_from_cocycle, outer_action, random_cocycle
from gerbes.groupoids import NERVE, POINTWISE, CoverModel, GroupoidMorphism, circle_cover, identity_morphism, one_object, pair_groupoid, restrict, star_cover
from gerbes.morita import (
    MoritaData,
    Refinement,
    Bitorsor,
    bitorsor_from_morphism,
    bitorsor_isomorphism,
    check_band_morita,
    check_cohomology_morita,
    compose_bitorsors,
    compose_extension_bitorsors,
    extension_bitorsor,
    identity_bitorsor,
    inverse_bitorsor,
    inverse_extension_bitorsor,
    kernel_orbits_coincide,
    pullback_along_refinement,
    pullback_extension,
    random_refinement,
    refine_cocycle,
    refinement_extension,
)

BARY = CoverModel(3, ((0, 1), (1,), (1, 2), (2,), (0, 2), (0,)), NERVE)
BARY_MAP = (0, 0, 1, 1, 2, 2)


def is_equivariant(B: Bitorsor, C: Bitorsor, f) -> bool:
    """Independent check that f: B -> C is a bijection commuting with both actions."""
    f = list(map(int, f))
    if sorted(f) != list(range(C.size)):
        return False
    for b in range(B.size):
        if C.jl[f[b]] != B.jl[b] or C.jr[f[b]] != B.jr[b]:
            return False
        for x in range(B.L.n_arrows):
            if B.left[x, b] >= 0 and C.left[x, f[b]] != f[B.left[x, b]]:
                return False
        for y in range(B.R.n_arrows):
            if B.right[b, y] >= 0 and C.right[f[b], y] != f[B.right[b, y]]:
                return False
    return True


def test_identity_refinement_changes_nothing():
    d = random_cocycle(grp.symmetric(3), circle_cover(NERVE), random.Random(0))
    ref = Refinement(d.cover, d.cover, (0, 1, 2))
    assert refine_cocycle(d, ref) == d
    E, E2, md = refinement_extension(d, ref)
    assert np.array_equal(md.total.arrow_map, np.arange(E.total.n_arrows))


def test_refinement_witness():
    with pytest.raises(NotARefinement) as exc:
        Refinement(circle_cover(NERVE), BARY, (1, 0, 1, 1, 2, 2)).check()
    assert exc.value.witness == (0, 0)
    with pytest.raises(NotARefinement):
        Refinement(circle_cover(NERVE), BARY, (0, 0, 1)).check()


def test_barycentric_refinement_keeps_nontrivial_band():
    Z3 = grp.cyclic(3)
    A = grp.automorphism_structure(Z3)
    d = complete_cocycle(Z3, circle_cover(NERVE), {(1, 2, None): A.reps[1]}, {}, A)
    ref = Refinement(d.cover, BARY, BARY_MAP).check()
    fine = refine_cocycle(d, ref)
    bc = band_class(band(fine))
    assert not bc.trivial
    assert {l[1] for l in bc.nontrivial_loops()} == {1}
    E, E2, md = refinement_extension(d, ref)
    assert check_band_morita(E, E2, md)


def test_random_refinements_preserve_invariants():
    rng = random.Random(1)
    G = grp.cyclic(3)
    for cover in (circle_cover(POINTWISE), star_cover(3, POINTWISE)):
        d = random_cocycle(G, cover, rng)
        ref = random_refinement(cover, rng, extra=1)
        assert ref.is_object_surjective()
        E, E2, md = refinement_extension(d, ref)
        assert band_class(band(refine_cocycle(d, ref))).trivial == band_class(band(d)).trivial
        assert check_band_morita(E, E2, md)
        res = check_cohomology_morita(E, E2, md, modulus=3)
        assert res and set(res.details) == {0, 1, 2}


def test_pullback_along_refinement_matches_refined_cocycle():
    d = random_cocycle(grp.symmetric(3), circle_cover(POINTWISE), random.Random(2))
    ref = Refinement(d.cover, BARY.with_mode(POINTWISE), BARY_MAP)
    E = extension_from_cocycle(d)
    P = pullback_along_refinement(E, ref)
    assert cocycle_from_extension(P) == refine_cocycle(d, ref)


def test_pullback_identity_and_doubling():
    E = extension_from_cocycle(random_cocycle(grp.cyclic(2), star_cover(3, POINTWISE), random.Random(3)))
    n = E.base.n_objects
    E1, md1 = pullback_extension(E, list(range(n)))
    assert E1.total.n_arrows == E.total.n_arrows
    assert check_band_morita(E, E1, md1)
    E2, md2 = pullback_extension(E, list(range(n)) * 2)
    assert E2.base.n_arrows == 4 * E.base.n_arrows
    assert E2.total.n_arrows == 4 * E.total.n_arrows
    assert check_band_morita(E, E2, md2)
    assert check_cohomology_morita(E, E2, md2, modulus=2)


def test_corrupted_band_is_detected():
    Z3 = grp.cyclic(3)
    A = grp.automorphism_structure(Z3)
    d = complete_cocycle(Z3, circle_cover(NERVE), {(1, 2, None): A.reps[1]}, {}, A)
    E = extension_from_cocycle(d)
    E2, md = pullback_extension(E, list(range(E.base.n_objects)))
    b2 = outer_action(E2, md.chi2, A)
    y = min(b2, key=lambda k: E2.base.arrows[k])
    b2[y] = (b2[y] + 1) % A.out.order
    res = check_band_morita(E, E2, md, band2=b2, auts=A)
    assert not res and res.witness == E2.base.arrows[y]


def test_non_morita_morphism_rejected():
    E = extension_from_cocycle(random_cocycle(grp.cyclic(2), circle_cover(POINTWISE), random.Random(4)))
    keep = [0, 1]
    sub_t, arr_t = restrict(E.total, keep)
    sub_b, arr_b = restrict(E.base, keep)
    md = MoritaData(GroupoidMorphism(sub_t, E.total, keep, arr_t).check(), GroupoidMorphism(sub_b, E.base, keep, arr_b).check())
    with pytest.raises(NotMorita):
        check_band_morita(E, E, md)
    with pytest.raises(NotMorita):
        check_cohomology_morita(E, E, md)


def test_adjoint_cohomology_small_case():
    E = extension_from_cocycle(random_cocycle(grp.cyclic(2), star_cover(2, POINTWISE), random.Random(5)))
    E2, md = pullback_extension(E, list(range(E.base.n_objects)) + [0])
    res = check_cohomology_morita(E, E2, md, module="adjoint", modulus=2, degrees=(0, 1))
    assert res, res.details


# bitorsors


def test_identity_bitorsor_is_a_unit():
    B = bitorsor_from_morphism(GroupoidMorphism(pair_groupoid(3), pair_groupoid(1), [0, 0, 0], [0] * 9).check()).check()
    for C in (compose_bitorsors(identity_bitorsor(B.L), B), compose_bitorsors(B, identity_bitorsor(B.R))):
        C.check()
        iso = bitorsor_isomorphism(C, B)
        assert iso is not None and is_equivariant(C, B, iso)


def _refinement_bitorsors():
    d = random_cocycle(grp.cyclic(2), circle_cover(NERVE), random.Random(6))
    ref = Refinement(d.cover, BARY, BARY_MAP).check()
    return refinement_extension(d, ref)


def test_inverse_bitorsor_cancels():
    E, E2, md = _refinement_bitorsors()
    B = bitorsor_from_morphism(md.base).check()
    Binv = inverse_bitorsor(B).check()
    for C, unit in ((compose_bitorsors(B, Binv), identity_bitorsor(B.L)), (compose_bitorsors(Binv, B), identity_bitorsor(B.R))):
        C.check()
        iso = bitorsor_isomorphism(C, unit)
        assert iso is not None and is_equivariant(C, unit, iso)


def test_composition_is_associative_and_functorial():
    P3, P2, P1 = pair_groupoid(3), pair_groupoid(2), pair_groupoid(1)
    f = GroupoidMorphism(P3, P2, [0, 1, 1], [P2.arrow((min(a, 1), min(b, 1))) for (a, b) in P3.arrows]).check()
    g = GroupoidMorphism(P2, P1, [0, 0], [0] * 4).check()
    Bf, Bg = bitorsor_from_morphism(f), bitorsor_from_morphism(g)
    Bgf = bitorsor_from_morphism(f.then(g))
    C = compose_bitorsors(Bf, Bg).check()
    iso = bitorsor_isomorphism(C, Bgf)
    assert iso is not None and is_equivariant(C, Bgf, iso)
    I = identity_bitorsor(P1)
    left = compose_bitorsors(compose_bitorsors(Bf, Bg), I).check()
    right = compose_bitorsors(Bf, compose_bitorsors(Bg, I)).check()
    iso = bitorsor_isomorphism(left, right)
    assert iso is not None and is_equivariant(left, right, iso)


def test_middle_mismatch():
    B = identity_bitorsor(pair_groupoid(2))
    with pytest.raises(MiddleMismatch):
        compose_bitorsors(B, identity_bitorsor(pair_groupoid(3)))


def test_bitorsor_isomorphism_follows_natural_isomorphism():
    Z3 = one_object(grp.cyclic(3))
    B = identity_bitorsor(Z3)
    inversion = GroupoidMorphism(Z3, Z3, [0], [0, 2, 1]).check()
    assert bitorsor_isomorphism(B, bitorsor_from_morphism(inversion)) is None
    P2 = pair_groupoid(2)
    swap = GroupoidMorphism(P2, P2, [1, 0], [P2.arrow((1 - a, 1 - b)) for (a, b) in P2.arrows]).check()
    C = bitorsor_from_morphism(swap)
    iso = bitorsor_isomorphism(identity_bitorsor(P2), C)
    assert iso is not None and is_equivariant(identity_bitorsor(P2), C, iso)


def test_kernel_orbits_survive_composition():
    E, E2, md = _refinement_bitorsors()
    X = extension_bitorsor(md, E2, E).check()
    assert kernel_orbits_coincide(X.bitorsor, E2, E)
    inv = inverse_extension_bitorsor(X).check()
    compose_extension_bitorsors(X, inv).check()
    compose_extension_bitorsors(inv, X).check()
    unit = extension_bitorsor(MoritaData(identity_morphism(E.total), identity_morphism(E.base), E.chi), E, E)
    assert len(unit.check().orbits()) == E.total.n_arrows // E.group.order
