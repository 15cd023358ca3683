import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gerbes import groups as grp
from gerbes.errors import BadComposition, EmptyCover, GroupoidAxiomError, NotAMorphism, NotSurjective
from gerbes.groupoids import (
    NERVE,
    POINTWISE,
    CoverModel,
    FiniteGroupoid,
    GroupoidMorphism,
    Nerve,
    cech_groupoid,
    check_simplicial_identities,
    circle_cover,
    connected_components,
    cover_from_nerve,
    disjoint_union,
    face,
    identity_morphism,
    is_isomorphism,
    is_morita_morphism,
    nerve_of_cover,
    nerve_tuples,
    one_object,
    pair_groupoid,
    pullback_groupoid,
    restrict,
    star_cover,
    tetrahedron_boundary_cover,
    validate_groupoid,
)


@st.composite
def covers(draw, max_points=4, max_sets=4):
    n = draw(st.integers(1, max_points))
    k = draw(st.integers(1, max_sets))
    sets = [set(draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n))) for _ in range(k)]
    for p in range(n):
        if not any(p in s for s in sets):
            sets[draw(st.integers(0, k - 1))].add(p)
    return CoverModel(n, tuple(tuple(sorted(s)) for s in sets), draw(st.sampled_from([POINTWISE, NERVE])))


def brute_tuples(G: FiniteGroupoid, n: int) -> int:
    if n == 0:
        return G.n_objects
    return sum(all(G.tgt[t[i]] == G.src[t[i + 1]] for i in range(n - 1)) for t in itertools.product(range(G.n_arrows), repeat=n))


@settings(max_examples=40, deadline=None)
@given(covers())
def test_cech_groupoid_counts_and_axioms(cover):
    G = cech_groupoid(cover)
    s = [len(cover.sets_at(p)) for p in range(cover.points)]
    assert G.n_objects == sum(s)
    assert G.n_arrows == sum(x * x for x in s)
    validate_groupoid(G)
    assert len(connected_components(G)) == cover.points


@settings(max_examples=25, deadline=None)
@given(covers(3, 3))
def test_nerve_tuple_counts_match_enumeration(cover):
    G = cech_groupoid(cover)
    for n in range(4):
        if G.n_arrows**n <= 20000:
            assert len(nerve_tuples(G, n)) == brute_tuples(G, n)


@pytest.mark.parametrize("G", [pair_groupoid(3), one_object(grp.symmetric(3)), cech_groupoid(circle_cover(POINTWISE))], ids=["pair3", "S3", "circle"])
def test_simplicial_identities(G):
    for n in (2, 3, 4):
        assert check_simplicial_identities(G, n) == []


def test_face_maps_on_x1_and_x2():
    G = pair_groupoid(2)
    X0, X1, X2 = (nerve_tuples(G, n) for n in range(3))
    assert np.array_equal(face(X1, X0, 0), G.tgt)
    assert np.array_equal(face(X1, X0, 1), G.src)
    T = X2.tuples
    assert np.array_equal(X1.tuples[face(X2, X1, 1)][:, 0], G.comp[T[:, 0], T[:, 1]])
    assert np.array_equal(X1.tuples[face(X2, X1, 0)][:, 0], T[:, 1])
    assert np.array_equal(X1.tuples[face(X2, X1, 2)][:, 0], T[:, 0])


def test_pair_groupoid_x2():
    assert len(nerve_tuples(pair_groupoid(3), 2)) == 27


def test_validate_groupoid_rejects_bad_composition():
    G = pair_groupoid(2)
    comp = G.comp.copy()
    x, y = map(int, np.argwhere(comp >= 0)[1])
    comp[x, y] = (comp[x, y] + 1) % G.n_arrows
    bad = FiniteGroupoid(G.objects, G.arrows, G.src, G.tgt, G.unit, comp, G.inv)
    with pytest.raises(GroupoidAxiomError) as exc:
        validate_groupoid(bad)
    assert exc.value.witness is not None


def test_mul_undefined():
    G = pair_groupoid(2)
    x = int(G.hom(0, 1)[0])
    with pytest.raises(BadComposition):
        G.mul(x, x)


def test_pullback_counts_match_formula():
    rng = random.Random(7)
    for _ in range(20):
        cover = CoverModel(2, ((0, 1), (1,), (0,)), POINTWISE)
        G = cech_groupoid(cover)
        J = list(range(G.n_objects)) + [rng.randrange(G.n_objects) for _ in range(rng.randint(0, 3))]
        rng.shuffle(J)
        H, proj = pullback_groupoid(G, J)
        expect = sum(len(G.hom(J[p], J[q])) for p in range(len(J)) for q in range(len(J)))
        assert H.n_arrows == expect
        validate_groupoid(H)
        proj.check()
        assert is_morita_morphism(proj)


def test_pullback_requires_surjectivity():
    G = pair_groupoid(3)
    with pytest.raises(NotSurjective) as exc:
        pullback_groupoid(G, [0, 1])
    assert exc.value.witness == 2


def test_refinement_projection_is_morita():
    coarse = circle_cover(POINTWISE)
    fine = CoverModel(3, ((0, 1), (1,), (1, 2), (2,), (0, 2), (0,)), POINTWISE)
    r = [0, 0, 1, 1, 2, 2]
    Yc, Yf = cech_groupoid(coarse), cech_groupoid(fine)
    obj = [Yc.obj((p, r[a])) for (p, a) in Yf.objects]
    arr = [Yc.arrow((p, r[a], r[b])) for (p, a, b) in Yf.arrows]
    f = GroupoidMorphism(Yf, Yc, obj, arr).check()
    assert is_morita_morphism(f)


def test_non_morita_witnesses():
    G = pair_groupoid(3)
    sub, arrows = restrict(G, [0, 1])
    inc = GroupoidMorphism(sub, G, [0, 1], arrows).check()
    res = is_morita_morphism(inc)
    assert not res and res.witness == ("object", 2)
    Z2, Z1 = one_object(grp.cyclic(2)), one_object(grp.cyclic(1))
    collapse = GroupoidMorphism(Z2, Z1, [0], [0, 0]).check()
    res = is_morita_morphism(collapse)
    assert not res and res.witness[0] == "arrows"


def test_identity_and_isomorphism():
    G = cech_groupoid(star_cover(3, POINTWISE))
    f = identity_morphism(G)
    assert is_isomorphism(f) and is_morita_morphism(f)
    assert is_morita_morphism(GroupoidMorphism(pair_groupoid(3), pair_groupoid(1), [0, 0, 0], [0] * 9).check())


def test_bad_morphism_rejected():
    G = pair_groupoid(2)
    with pytest.raises(NotAMorphism):
        GroupoidMorphism(G, G, [0, 1], [0] * G.n_arrows).check()


def test_disjoint_union_components():
    U = disjoint_union(pair_groupoid(2), one_object(grp.cyclic(3)))
    validate_groupoid(U)
    assert U.n_objects == 3 and U.n_arrows == 7
    assert sorted(map(len, connected_components(U))) == [1, 2]


def test_model_nerves():
    assert nerve_of_cover(tetrahedron_boundary_cover()).counts() == (4, 6, 4, 0)
    assert nerve_of_cover(circle_cover()).counts() == (3, 3, 0, 0)
    assert nerve_of_cover(star_cover(3)).counts() == (3, 3, 1, 0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(0, 4), min_size=1, max_size=4), min_size=1, max_size=4))
def test_cover_from_nerve_roundtrip(simplices):
    verts = sorted({v for s in simplices for v in s})
    relabel = {v: k for k, v in enumerate(verts)}
    N = Nerve.from_simplices([[relabel[v] for v in s] for s in simplices])
    assert nerve_of_cover(cover_from_nerve(N)) == N


def test_cover_errors():
    with pytest.raises(EmptyCover):
        CoverModel(2, ((0,),))
    with pytest.raises(EmptyCover):
        CoverModel(2, ((0,), ()))
    with pytest.raises(EmptyCover):
        CoverModel(1, ((0, 3),))


def test_admissible_keys():
    C = CoverModel(2, ((0, 1), (1,)), POINTWISE)
    assert C.admissible(0) == [(0, 0), (0, 1), (1, 1)]
    assert (1, 0, 1) in C.admissible(1) and (1, 0, 0) not in C.admissible(1)
    N = C.with_mode(NERVE)
    assert N.admissible(1) == [(0, 0, None), (0, 1, None), (1, 0, None), (1, 1, None)]
