"""Acceptance criteria 1-10.

Each test prints one PASS/FAIL line with its measured runtime.  Run directly
(``python3 tests/test_acceptance.py``) for just the summary lines.
"""

from __future__ import annotations

import itertools
import random
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from gerbes import groups as grp
from gerbes.cli import run
from gerbes.cohomology import (
    GroupoidModule,
    canonical_representative,
    cech_cohomology,
    cech_cohomology_bruteforce,
    classify_bound_gerbes,
    differentials_square_to_zero,
    groupoid_cohomology,
)
from gerbes.errors import InvalidCocycle
from gerbes.extensions import (
    band,
    band_class,
    canonical_lift_section,
    central_cocycle,
    cocycle_from_extension,
    complete_cocycle,
    extension_from_cocycle,
    gauge_by_automorphisms,
    gauged_trivialization,
    induced_from_central,
    is_central,
    normalize_central,
    random_central_values,
    random_cocycle,
    subgroup,
    symmetric_cochain,
    trivial_cocycle,
    twist_by_cochain,
    validate_cocycle,
)
from gerbes.groupoids import (
    NERVE,
    POINTWISE,
    CoverModel,
    Nerve,
    cech_groupoid,
    check_simplicial_identities,
    circle_cover,
    one_object,
    pair_groupoid,
    pullback_groupoid,
    star_cover,
    tetrahedron_boundary_cover,
)
from gerbes.morita import check_band_morita, check_cohomology_morita, pullback_extension, random_refinement, refinement_extension

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden"
TETRA = Nerve.from_simplices([(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)])


def report(n: int, ok: bool, detail: str, elapsed: float, budget: float | None, reporter=None):
    in_time = budget is None or elapsed < budget
    status = "PASS" if ok and in_time else "FAIL"
    limit = f" (limit {budget:g} s)" if budget else ""
    line = f"ACCEPTANCE {n:2d}: {status}  {detail}  [{elapsed:.2f} s{limit}]"
    if reporter is not None:
        reporter.ensure_newline()
        reporter.write_line(line)
    else:
        print(line)
    assert ok, line
    assert in_time, line


def random_cover(rng: random.Random, max_sets: int = 5, max_points: int = 4) -> CoverModel:
    npts = rng.randint(1, max_points)
    ns = rng.randint(1, max_sets)
    sets = [set(rng.sample(range(npts), rng.randint(1, npts))) for _ in range(ns)]
    for p in range(npts):
        if not any(p in s for s in sets):
            sets[rng.randrange(ns)].add(p)
    return CoverModel(npts, tuple(tuple(sorted(s)) for s in sets), rng.choice([NERVE, POINTWISE]))


# 1


def test_criterion_1_cocycle_associativity(reporter):
    rng = random.Random(101)
    t = time.perf_counter()
    groups = [grp.cyclic(2), grp.cyclic(4), grp.symmetric(3), grp.quaternion()]
    auts = {G.name: grp.automorphism_structure(G) for G in groups}
    checked = agree = flipped = valid_ok = 0
    for k in range(200):
        G = groups[k % 4]
        A = auts[G.name]
        cov = random_cover(rng)
        d = random_cocycle(G, cov, rng, A)
        valid_ok += bool(validate_cocycle(d).ok)
        extension_from_cocycle(d)
        # one single-value mutation per instance
        if rng.random() < 0.5:
            key = rng.choice(sorted(d.lam, key=lambda q: tuple(-1 if x is None else x for x in q)))
            lam = dict(d.lam)
            lam[key] = rng.choice([f for f in A.reps if f != lam[key]] or A.reps)
            m = d.copy(lam=lam)
        else:
            key = rng.choice(sorted(d.g, key=lambda q: tuple(-1 if x is None else x for x in q)))
            g = dict(d.g)
            g[key] = rng.choice([x for x in range(G.order) if x != g[key]])
            m = d.copy(g=g)
        v = validate_cocycle(m).ok
        try:
            extension_from_cocycle(m)
            e = True
        except InvalidCocycle:
            e = False
        checked += 1
        agree += v == e
        flipped += not v
    elapsed = time.perf_counter() - t
    ok = valid_ok == 200 and agree == checked
    report(1, ok, f"{valid_ok}/200 valid instances build; mutations agree {agree}/{checked} ({flipped} invalidated)", elapsed, 10, reporter)


# 2


def _oracle_gerbe_count(nerve: Nerve, G: grp.FiniteGroup) -> int:
    """Orbits of Z(G)-valued 2-cocycles under central coboundaries, by enumeration."""
    Z = grp.center(G)
    edges, tris, tets = nerve.dim(1), nerve.dim(2), nerve.dim(3)
    e_index = {e: k for k, e in enumerate(edges)}
    t_index = {t: k for k, t in enumerate(tris)}

    def delta2(c):
        out = []
        for s in tets:
            faces = [tuple(v for v in s if v != s[i]) for i in range(4)]
            # alternating product, written multiplicatively in the abelian Z(G)
            v = 0
            for i, f in enumerate(faces):
                x = c[t_index[f]]
                v = G.mul(v, x if i % 2 == 0 else G.inv(x))
            out.append(v)
        return out

    cocycles = [c for c in itertools.product(Z, repeat=len(tris)) if all(v == 0 for v in delta2(c))]
    bounds = set()
    for b in itertools.product(Z, repeat=len(edges)):
        vals = []
        for (i, j, k) in tris:
            vals.append(G.product(b[e_index[(j, k)]], G.inv(b[e_index[(i, k)]]), b[e_index[(i, j)]]))
        bounds.add(tuple(vals))
    seen, count = set(), 0
    for c in cocycles:
        if c in seen:
            continue
        count += 1
        seen.update(tuple(G.mul(x, y) for x, y in zip(c, b)) for b in bounds)
    return count


def test_criterion_2_giraud_counts(reporter):
    t = time.perf_counter()
    expected = {"S3": 1, "Q8": 2, "Z4": 4}
    found = {}
    ok = True
    for name, want in expected.items():
        G = grp.builtin_group(name)
        res = classify_bound_gerbes(TETRA, G)
        oracle = _oracle_gerbe_count(TETRA, G)
        found[name] = (res.count, res.h2.order, oracle)
        ok &= res.count == want == res.h2.order == oracle and res.enumerated
    elapsed = time.perf_counter() - t
    detail = ", ".join(f"{k}: {c} classes, |H2| {h}, oracle {o}" for k, (c, h, o) in found.items())
    report(2, ok, detail, elapsed, 5, reporter)


# 3


def test_criterion_3_band_detection(reporter):
    rng = random.Random(303)
    t = time.perf_counter()
    Z3 = grp.cyclic(3)
    A = grp.automorphism_structure(Z3)
    cov = circle_cover(NERVE)
    outer = complete_cocycle(Z3, cov, {(1, 2, None): A.reps[1]}, {}, A)
    bc = band_class(band(outer))
    loops = bc.nontrivial_loops()
    ok = not bc.trivial and len(loops) == 1 and loops[0][1] == 1
    inner_ok = 0
    n_inner = 0
    for G in (Z3, grp.symmetric(3), grp.quaternion()):
        AG = grp.automorphism_structure(G)
        inner = [f for f in AG.reps if AG.out_of(f) == 0]
        for _ in range(10):
            d = trivial_cocycle(G, cov, AG)
            d = gauge_by_automorphisms(d, {k: rng.choice(inner) for k in d.vertex_keys()})
            d = twist_by_cochain(d, symmetric_cochain(d, {k: rng.randrange(G.order) for k in d.lam if k[0] < k[1]}))
            n_inner += 1
            inner_ok += validate_cocycle(d).ok and band_class(band(d)).trivial
    ok = ok and inner_ok == n_inner
    elapsed = time.perf_counter() - t
    report(3, ok, f"outer Z3 circle band nontrivial with holonomy {loops[0][1] if loops else None} at edge {loops[0][0] if loops else None}; inner twists trivial {inner_ok}/{n_inner}", elapsed, 1, reporter)


# 4


def test_criterion_4_central_roundtrip(reporter):
    rng = random.Random(404)
    t = time.perf_counter()
    Q = grp.quaternion()
    AQ = grp.automorphism_structure(Q)
    A, emb = subgroup(Q, grp.center(Q))
    cov = tetrahedron_boundary_cover(NERVE)
    inner = [f for f in AQ.reps if AQ.out_of(f) == 0]
    good = 0
    for k in range(50):
        vals = random_central_values(A, cov, rng)
        dA = central_cocycle(A, cov, vals)
        E = induced_from_central(dA, Q, emb)
        want = canonical_representative(TETRA, Q, {key: emb[v] for key, v in dA.g.items()})
        h = {(i, j, None): rng.randrange(Q.order) for (p, i, j) in E.base.arrows if i < j}
        rho = canonical_lift_section(E, h)
        if k % 2 == 0:
            theta = {(i, None): rng.choice(inner) for i in range(cov.n_sets)}
            res = is_central(E, gauged_trivialization(E, theta), rho)
            cert = res.certificate if res else None
        else:  # outer gauge: the band is only trivializable, so normalize finds eta
            theta = {(i, None): rng.choice(AQ.reps) for i in range(cov.n_sets)}
            data = cocycle_from_extension(E, rho, gauged_trivialization(E, theta))
            res = is_central(normalize_central(data).data)
            cert = res.certificate if res else None
        if cert is not None and canonical_representative(TETRA, Q, cert.g) == want:
            good += 1
    elapsed = time.perf_counter() - t
    report(4, good == 50, f"{good}/50 induced Q8 extensions central with matching canonical representative", elapsed, 10, reporter)


# 5


def _unimodular(rng: random.Random, r: int) -> np.ndarray:
    T = np.eye(r, dtype=np.int64)
    for _ in range(3 * r):
        i, j = rng.sample(range(r), 2) if r > 1 else (0, 0)
        if i != j:
            T[i] += rng.choice((-1, 1)) * T[j]
    return T


def _int_inverse(T: np.ndarray) -> np.ndarray:
    inv = np.rint(np.linalg.inv(T.astype(float))).astype(np.int64)
    assert np.array_equal(T @ inv, np.eye(len(T), dtype=np.int64))
    return inv


def random_module(rng: random.Random, G, modulus):
    """Trivial, gauge-type (act(x) = T_src T_tgt^-1) or pulled back from a group character."""
    kind = rng.choice(["trivial", "gauge", "gauge"])
    r = rng.randint(1, 3)
    if kind == "trivial":
        return GroupoidModule.trivial(G, r, modulus)
    Ts = [_unimodular(rng, r) for _ in range(G.n_objects)]
    inv = [_int_inverse(T) for T in Ts]
    act = [Ts[int(G.src[x])] @ inv[int(G.tgt[x])] for x in range(G.n_arrows)]
    return GroupoidModule(G, [r] * G.n_objects, act, modulus, name="gauge")


def random_groupoid(rng: random.Random):
    kind = rng.choice(["cech", "pair", "group", "total", "pullback"])
    if kind == "cech":
        return cech_groupoid(random_cover(rng, 3, 3)), None
    if kind == "pair":
        return pair_groupoid(rng.randint(1, 3)), None
    if kind == "group":
        G = grp.builtin_group(rng.choice(["Z2", "Z3", "S3", "V4"]))
        chars = grp.sign_characters(G)
        return one_object(G), (G, rng.choice(chars))
    if kind == "total":
        G = grp.builtin_group(rng.choice(["Z2", "Z3"]))
        d = random_cocycle(G, random_cover(rng, 2, 2), rng)
        return extension_from_cocycle(d).total, None
    base = cech_groupoid(random_cover(rng, 2, 2))
    J = list(range(base.n_objects)) + [rng.randrange(base.n_objects)]
    return pullback_groupoid(base, J)[0], None


def test_criterion_5_differential_identities(reporter):
    rng = random.Random(505)
    t = time.perf_counter()
    pairs = ok_pairs = 0
    simplicial_bad = 0
    for _ in range(100):
        G, extra = random_groupoid(rng)
        modulus = rng.choice([None, None, 2, 3, 5])
        if extra is not None and rng.random() < 0.5:
            H, chars = extra
            M = GroupoidModule.from_group_module(grp.GroupModule.character(H, chars, modulus))
        else:
            M = random_module(rng, G, modulus)
        assert M.check()
        pairs += 1
        ok_pairs += differentials_square_to_zero(M, "right", 2) and differentials_square_to_zero(M, "left", 2)
        simplicial_bad += len(check_simplicial_identities(G, 3))
    elapsed = time.perf_counter() - t
    ok = ok_pairs == pairs and simplicial_bad == 0
    report(5, ok, f"d^2 = 0 on both sides for {ok_pairs}/{pairs} pairs; simplicial identity failures on X3: {simplicial_bad}", elapsed, 10, reporter)


# 6


def test_criterion_6_one_object(reporter):
    t = time.perf_counter()
    total = agree = 0
    for name in ("Z2", "Z3", "S3"):
        G = grp.builtin_group(name)
        chars = grp.sign_characters(G)
        for modulus in (None, 2, 3, 4):
            modules = [grp.GroupModule.trivial(G, 1, modulus)]
            if len(chars) > 1:
                modules.append(grp.GroupModule.character(G, chars[1], modulus))
            for M in modules:
                GM = GroupoidModule.from_group_module(M)
                for n in range(3):
                    total += 1
                    a = grp.group_cohomology(M, n)
                    agree += str(groupoid_cohomology(GM, n, "right")) == str(a) == str(groupoid_cohomology(GM, n, "left"))
    elapsed = time.perf_counter() - t
    report(6, agree == total, f"{agree}/{total} (group, module, coefficients, degree) cases equal on both sides", elapsed, None, reporter)


# 7


def test_criterion_7_morita(reporter):
    rng = random.Random(707)
    t = time.perf_counter()
    covers = [circle_cover(NERVE), circle_cover(POINTWISE), star_cover(2, POINTWISE), CoverModel(2, ((0,), (0, 1), (1,)), POINTWISE), CoverModel(3, ((0, 1), (1, 2)), NERVE)]
    band_ok = coh_ok = 0
    kinds = {"refinement": 0, "pullback": 0}
    for k in range(50):
        G = grp.builtin_group(rng.choice(["Z2", "Z3"]))
        cov = rng.choice(covers)
        d = random_cocycle(G, cov, rng)
        if k % 2 == 0:
            ref = random_refinement(cov, rng)
            E, E2, md = refinement_extension(d, ref)
            kinds["refinement"] += 1
        else:
            E = extension_from_cocycle(d)
            n0 = E.total.n_objects
            J = list(range(n0)) + [rng.randrange(n0) for _ in range(rng.randint(0, 2))]
            rng.shuffle(J)
            E2, md = pullback_extension(E, J)
            kinds["pullback"] += 1
        band_ok += bool(check_band_morita(E, E2, md))
        coh_ok += bool(check_cohomology_morita(E, E2, md, "trivial", None))
    elapsed = time.perf_counter() - t
    report(7, band_ok == coh_ok == 50, f"{kinds['refinement']} refinements + {kinds['pullback']} pullbacks: band {band_ok}/50, cohomology {coh_ok}/50", elapsed, 20, reporter)


# 8


def test_criterion_8_aut_facts(reporter):
    t = time.perf_counter()
    S3, Q8 = grp.symmetric(3), grp.quaternion()
    a_s3, a_q8 = grp.automorphism_structure(S3), grp.automorphism_structure(Q8)
    brute_s3 = sorted(grp.enumerate_automorphisms_bruteforce(S3))
    brute_q8 = sorted(grp.enumerate_automorphisms_bruteforce(Q8))
    inner_q8 = {grp.conjugation(Q8, x) for x in range(8)}
    facts = {
        "|Aut(S3)|": (len(a_s3.reps), len(brute_s3), 6),
        "|Out(S3)|": (a_s3.out.order, len(brute_s3) // len({grp.conjugation(S3, x) for x in range(6)}), 1),
        "|Z(Q8)|": (len(grp.center(Q8)), sum(all(Q8.mul(z, x) == Q8.mul(x, z) for x in range(8)) for z in range(8)), 2),
        "|Out(Q8)|": (a_q8.out.order, len(brute_q8) // len(inner_q8), 6),
    }
    ok = all(a == b == c for a, b, c in facts.values()) and sorted(a_s3.reps) == brute_s3 and sorted(a_q8.reps) == brute_q8
    elapsed = time.perf_counter() - t
    report(8, ok, ", ".join(f"{k} = {a} (oracle {b})" for k, (a, b, _) in facts.items()), elapsed, 5, reporter)


# 9


def all_small_nerves():
    """Every simplicial complex on vertex set {0..3} using all vertices, plus a few on 5 vertices."""
    subsets = [s for r in range(1, 5) for s in itertools.combinations(range(4), r)]
    out = []
    for n in range(1, 5):
        verts = set(range(n))
        cand = [s for s in subsets if set(s) <= verts]
        for r in range(1, len(cand) + 1):
            for family in itertools.combinations(cand, r):
                if any(set(a) < set(b) for a in family for b in family):
                    continue
                if set().union(*map(set, family)) != verts:
                    continue
                out.append(Nerve.from_simplices(family))
    out += [
        Nerve.from_simplices([(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]),
        Nerve.from_simplices([(0, 1, 2), (2, 3, 4)]),
        Nerve.from_simplices([(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 1, 4)]),
    ]
    return [N for N in out if max(N.counts()) <= 6]


def test_criterion_9_cech_oracle(reporter):
    t = time.perf_counter()
    nerves = all_small_nerves()
    cases = agree = 0
    for N in nerves:
        for m in (2, 3, 4):
            for k in range(4):
                cases += 1
                agree += cech_cohomology(N, [m], k) == cech_cohomology_bruteforce(N, m, k)
    elapsed = time.perf_counter() - t
    report(9, agree == cases, f"{len(nerves)} nerves x m in {{2,3,4}} x degrees 0..3: {agree}/{cases} agree", elapsed, None, reporter)


# 10

GOLDEN_CASES = {
    "validate_ok": ["validate", "s3_table.json", "circle.json", "tetrahedron.json", "circle_z3_outer.json", "q8_tetra_central.json", "z2_star_trivial_full.json", "circle_refinement.json"],
    "validate_mutated": ["validate", "z2_star_mutated_g.json", "bad_group.json", "bad_refinement.json"],
    "validate_malformed": ["validate", "malformed.json"],
    "classify_q8": ["classify", "Q8", "tetrahedron.json"],
    "classify_s3": ["classify", "S3", "tetra_cover.json"],
    "classify_z4": ["classify", "Z4", "tetrahedron.json"],
    "classify_size_bound": ["classify", "Q8", "tetrahedron.json", "--limit-enum", "10", "--strict"],
    "band_outer": ["band", "circle_z3_outer.json"],
    "band_inner": ["band", "circle_s3_inner.json"],
    "band_central": ["band", "q8_tetra_central.json"],
    "cohomology_cech": ["cohomology", "tetrahedron.json", "--degree", "2", "--coeff", "2"],
    "cohomology_group": ["cohomology", "S3", "--degree", "1", "--coeff", "3", "--module", "sign"],
    "cohomology_groupoid": ["cohomology", "circle_z3_outer.json", "--degree", "1", "--coeff", "3", "--module", "adjoint"],
    "pullback": ["pullback", "circle_z3_outer.json", "--double", "0"],
    "refine": ["refine", "circle_z3_outer.json", "circle_refinement.json"],
    "check_morita": ["check-morita", "circle_z3_outer.json", "circle_refinement.json"],
}


def golden_text(code: int, text: str) -> str:
    return f"exit {code}\n{text}"


def run_in_fixtures(argv):
    import os

    old = os.getcwd()
    os.chdir(FIXTURES)
    try:
        return run(argv)
    finally:
        os.chdir(old)


def test_criterion_10_determinism(reporter):
    t = time.perf_counter()
    same = matches = 0
    for name, argv in GOLDEN_CASES.items():
        a = golden_text(*run_in_fixtures(argv))
        b = golden_text(*run_in_fixtures(argv))
        same += a == b
        path = GOLDEN / f"{name}.txt"
        matches += path.exists() and path.read_text() == a
    elapsed = time.perf_counter() - t
    n = len(GOLDEN_CASES)
    report(10, same == matches == n, f"{same}/{n} commands byte-identical across runs, {matches}/{n} match golden files", elapsed, None, reporter)


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn(None)
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
