"""Finite groupoids, covers, nerves and composable tuples.

Composition is written left to right: ``comp[x, y]`` is defined when
``tgt(x) == src(y)`` and then runs from ``src(x)`` to ``tgt(y)``.  Undefined
entries of the composition table hold -1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .errors import (
    BadComposition,
    BadInverse,
    BadStructureMap,
    BadUnit,
    EmptyCover,
    NonAssociativeArrows,
    NotAMorphism,
    NotSurjective,
)
from .groups import FiniteGroup

POINTWISE = "pointwise"
NERVE = "nerve"


class FiniteGroupoid:
    """Objects and arrows are label tuples; all structure maps are index arrays."""

    def __init__(self, objects, arrows, src, tgt, unit, comp, inv, name: str = ""):
        self.objects = list(objects)
        self.arrows = list(arrows)
        self.src = np.asarray(src, dtype=np.int64)
        self.tgt = np.asarray(tgt, dtype=np.int64)
        self.unit = np.asarray(unit, dtype=np.int64)
        self.comp = np.asarray(comp, dtype=np.int64)
        self.inv = np.asarray(inv, dtype=np.int64)
        self.name = name
        self._obj_index = {o: i for i, o in enumerate(self.objects)}
        self._arrow_index = {a: i for i, a in enumerate(self.arrows)}
        for arr in (self.src, self.tgt, self.unit, self.comp, self.inv):
            arr.setflags(write=False)

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def n_arrows(self) -> int:
        return len(self.arrows)

    def obj(self, label) -> int:
        return self._obj_index[label]

    def arrow(self, label) -> int:
        return self._arrow_index[label]

    def mul(self, x: int, y: int) -> int:
        out = int(self.comp[x, y])
        if out < 0:
            raise BadComposition(f"arrows {x} and {y} are not composable", (x, y))
        return out

    def hom(self, a: int, b: int) -> np.ndarray:
        return np.nonzero((self.src == a) & (self.tgt == b))[0]

    def arrows_from(self, a: int) -> np.ndarray:
        return np.nonzero(self.src == a)[0]

    def __repr__(self):
        return f"FiniteGroupoid({self.name or '?'}, objects={self.n_objects}, arrows={self.n_arrows})"


def build_groupoid(objects, arrows, src_of: Callable, tgt_of: Callable, mul: Callable, unit_of: Callable, name: str = "", check: bool = True) -> FiniteGroupoid:
    """Assemble tables from label-level functions.

    ``src_of``/``tgt_of`` map an arrow label to an object label, ``mul`` maps
    two composable labels to a label and ``unit_of`` maps an object label to
    its unit arrow label.  Inverses are found by search.
    """
    objects = list(objects)
    arrows = list(arrows)
    oi = {o: i for i, o in enumerate(objects)}
    ai = {a: i for i, a in enumerate(arrows)}
    src = [oi[src_of(a)] for a in arrows]
    tgt = [oi[tgt_of(a)] for a in arrows]
    unit = [ai[unit_of(o)] for o in objects]
    n = len(arrows)
    comp = np.full((n, n), -1, dtype=np.int64)
    by_src: dict[int, list[int]] = {}
    for i, s in enumerate(src):
        by_src.setdefault(s, []).append(i)
    for x in range(n):
        for y in by_src.get(tgt[x], []):
            lab = mul(arrows[x], arrows[y])
            if lab not in ai:
                raise BadComposition(f"product of {arrows[x]} and {arrows[y]} is not an arrow", (x, y))
            comp[x, y] = ai[lab]
    inv = _find_inverses(src, tgt, unit, comp, by_src)
    G = FiniteGroupoid(objects, arrows, src, tgt, unit, comp, inv, name=name)
    if check:
        validate_groupoid(G)
    return G


def _find_inverses(src, tgt, unit, comp, by_src) -> list[int]:
    inv = []
    for x in range(len(src)):
        cands = [y for y in by_src.get(tgt[x], []) if comp[x, y] == unit[src[x]] and comp[y, x] == unit[tgt[x]]]
        inv.append(cands[0] if cands else -1)
    return inv


# validation


def validate_groupoid(G: FiniteGroupoid, chunk: int = 1 << 22) -> FiniteGroupoid:
    """Check every groupoid axiom exhaustively; raise with a witness tuple."""
    n, m = G.n_arrows, G.n_objects
    for name, arr, bound in (("src", G.src, m), ("tgt", G.tgt, m), ("unit", G.unit, n), ("inv", G.inv, n)):
        bad = np.nonzero((arr < 0) | (arr >= bound))[0]
        if len(bad):
            raise BadStructureMap(f"{name} undefined or out of range at {int(bad[0])}", (name, int(bad[0])))
    if G.comp.shape != (n, n):
        raise BadStructureMap("composition table has the wrong shape", ("comp",))
    composable = G.tgt[:, None] == G.src[None, :]
    defined = G.comp >= 0
    bad = np.argwhere(composable != defined)
    if len(bad):
        x, y = map(int, bad[0])
        raise BadComposition(f"composition of {x}, {y} defined iff composable fails", (x, y))
    xs, ys = np.nonzero(defined)
    xy = G.comp[xs, ys]
    if (xy >= n).any():
        k = int(np.argmax(xy >= n))
        raise BadComposition("composition out of range", (int(xs[k]), int(ys[k])))
    bad = np.nonzero((G.src[xy] != G.src[xs]) | (G.tgt[xy] != G.tgt[ys]))[0]
    if len(bad):
        k = int(bad[0])
        raise BadComposition("composite has wrong source or target", (int(xs[k]), int(ys[k])))
    # units
    u = G.unit
    bad = np.nonzero((G.src[u] != np.arange(m)) | (G.tgt[u] != np.arange(m)))[0]
    if len(bad):
        raise BadUnit(f"unit of object {int(bad[0])} is not a loop there", (int(bad[0]),))
    left = G.comp[u[G.src], np.arange(n)]
    right = G.comp[np.arange(n), u[G.tgt]]
    bad = np.nonzero((left != np.arange(n)) | (right != np.arange(n)))[0]
    if len(bad):
        raise BadUnit(f"unit law fails for arrow {int(bad[0])}", (int(bad[0]),))
    # associativity over composable triples, in chunks of pairs
    step = max(1, chunk // max(n, 1))
    for start in range(0, len(xs), step):
        a, b, ab = xs[start : start + step], ys[start : start + step], xy[start : start + step]
        bc = G.comp[b]  # (k, n)
        ok = bc >= 0
        lhs = np.where(ok, G.comp[ab][:, :], -1)
        rhs = np.where(ok, G.comp[a[:, None], np.where(ok, bc, 0)], -1)
        diff = np.argwhere(lhs != rhs)
        if len(diff):
            k, c = map(int, diff[0])
            raise NonAssociativeArrows("composition is not associative", (int(a[k]), int(b[k]), c))
    # inverses
    v = G.inv
    bad = np.nonzero(
        (G.src[v] != G.tgt) | (G.tgt[v] != G.src)
        | (G.comp[np.arange(n), v] != u[G.src]) | (G.comp[v, np.arange(n)] != u[G.tgt])
    )[0]
    if len(bad):
        raise BadInverse(f"arrow {int(bad[0])} has no two-sided inverse", (int(bad[0]),))
    return G


# standard groupoids


def one_object(G: FiniteGroup, name: str = "") -> FiniteGroupoid:
    n = G.order
    return FiniteGroupoid([0], list(range(n)), [0] * n, [0] * n, [0], G.table.copy(), G.inverse.copy(), name=name or f"B{G.name}")


def pair_groupoid(k: int) -> FiniteGroupoid:
    objs = list(range(k))
    arrows = [(a, b) for a in objs for b in objs]
    return build_groupoid(objs, arrows, lambda x: x[0], lambda x: x[1], lambda x, y: (x[0], y[1]), lambda o: (o, o), name=f"Pair{k}")


def disjoint_union(A: FiniteGroupoid, B: FiniteGroupoid) -> FiniteGroupoid:
    na, nb = A.n_arrows, B.n_arrows
    objs = [(0, o) for o in A.objects] + [(1, o) for o in B.objects]
    arrows = [(0, x) for x in A.arrows] + [(1, x) for x in B.arrows]
    comp = np.full((na + nb, na + nb), -1, dtype=np.int64)
    comp[:na, :na] = A.comp
    compB = B.comp.copy()
    compB[compB >= 0] += na
    comp[na:, na:] = compB
    return FiniteGroupoid(
        objs, arrows,
        np.concatenate([A.src, B.src + A.n_objects]), np.concatenate([A.tgt, B.tgt + A.n_objects]),
        np.concatenate([A.unit, B.unit + na]), comp, np.concatenate([A.inv, B.inv + na]),
        name=f"{A.name}+{B.name}",
    )


def connected_components(G: FiniteGroupoid) -> list[list[int]]:
    """Object indices grouped by reachability, each sorted, ordered by minimum."""
    parent = list(range(G.n_objects))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for s, t in zip(G.src.tolist(), G.tgt.tolist()):
        ra, rb = find(s), find(t)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    comps: dict[int, list[int]] = {}
    for o in range(G.n_objects):
        comps.setdefault(find(o), []).append(o)
    return sorted(comps.values())


def restrict(G: FiniteGroupoid, objects: Sequence[int]) -> tuple[FiniteGroupoid, np.ndarray]:
    """Full subgroupoid on the given objects, plus the arrow index map to G."""
    objs = sorted(objects)
    keep = np.nonzero(np.isin(G.src, objs) & np.isin(G.tgt, objs))[0]
    amap = np.full(G.n_arrows, -1, dtype=np.int64)
    amap[keep] = np.arange(len(keep))
    omap = np.full(G.n_objects, -1, dtype=np.int64)
    omap[objs] = np.arange(len(objs))
    sub = G.comp[np.ix_(keep, keep)]
    comp = np.where(sub >= 0, amap[np.where(sub >= 0, sub, 0)], -1)
    H = FiniteGroupoid(
        [G.objects[o] for o in objs], [G.arrows[a] for a in keep],
        omap[G.src[keep]], omap[G.tgt[keep]], amap[G.unit[objs]], comp, amap[G.inv[keep]],
        name=f"{G.name}|",
    )
    return H, keep


# morphisms


@dataclass
class GroupoidMorphism:
    source: FiniteGroupoid
    target: FiniteGroupoid
    obj_map: np.ndarray
    arrow_map: np.ndarray

    def __post_init__(self):
        self.obj_map = np.asarray(self.obj_map, dtype=np.int64)
        self.arrow_map = np.asarray(self.arrow_map, dtype=np.int64)

    def check(self) -> "GroupoidMorphism":
        S, T, f0, f1 = self.source, self.target, self.obj_map, self.arrow_map
        if len(f0) != S.n_objects or len(f1) != S.n_arrows:
            raise NotAMorphism("maps have the wrong length")
        if (f0 < 0).any() or (f0 >= T.n_objects).any() or (f1 < 0).any() or (f1 >= T.n_arrows).any():
            raise NotAMorphism("maps out of range")
        bad = np.nonzero((T.src[f1] != f0[S.src]) | (T.tgt[f1] != f0[S.tgt]))[0]
        if len(bad):
            raise NotAMorphism("arrow map does not cover the object map", (int(bad[0]),))
        bad = np.nonzero(f1[S.unit] != T.unit[f0])[0]
        if len(bad):
            raise NotAMorphism("units not preserved", (int(bad[0]),))
        xs, ys = np.nonzero(S.comp >= 0)
        lhs = f1[S.comp[xs, ys]]
        rhs = T.comp[f1[xs], f1[ys]]
        bad = np.nonzero(lhs != rhs)[0]
        if len(bad):
            k = int(bad[0])
            raise NotAMorphism("composition not preserved", (int(xs[k]), int(ys[k])))
        return self

    def then(self, other: "GroupoidMorphism") -> "GroupoidMorphism":
        return GroupoidMorphism(self.source, other.target, other.obj_map[self.obj_map], other.arrow_map[self.arrow_map])


def identity_morphism(G: FiniteGroupoid) -> GroupoidMorphism:
    return GroupoidMorphism(G, G, np.arange(G.n_objects), np.arange(G.n_arrows))


def is_isomorphism(f: GroupoidMorphism) -> bool:
    f.check()
    return (
        len(set(f.obj_map.tolist())) == f.target.n_objects == f.source.n_objects
        and len(set(f.arrow_map.tolist())) == f.target.n_arrows == f.source.n_arrows
    )


# covers and nerves


@dataclass(frozen=True)
class CoverModel:
    """A finite sample set {0..points-1} and subsets U_i of it."""

    points: int
    sets: tuple[tuple[int, ...], ...]
    mode: str = POINTWISE

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(tuple(sorted(set(s))) for s in self.sets))
        if self.mode not in (POINTWISE, NERVE):
            raise ValueError(f"mode must be {POINTWISE!r} or {NERVE!r}")
        if self.points < 1 or not self.sets:
            raise EmptyCover("cover needs at least one point and one set")
        for i, s in enumerate(self.sets):
            if not s:
                raise EmptyCover(f"set {i} is empty")
            if s[0] < 0 or s[-1] >= self.points:
                raise EmptyCover(f"set {i} mentions a point outside 0..{self.points - 1}")
        covered = set().union(*self.sets)
        missing = sorted(set(range(self.points)) - covered)
        if missing:
            raise EmptyCover(f"point {missing[0]} lies in no set")

    @property
    def n_sets(self) -> int:
        return len(self.sets)

    def common(self, idx: Iterable[int]) -> tuple[int, ...]:
        idx = list(idx)
        out = set(self.sets[idx[0]])
        for i in idx[1:]:
            out &= set(self.sets[i])
        return tuple(sorted(out))

    def sets_at(self, p: int) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.sets) if p in s)

    def with_mode(self, mode: str) -> "CoverModel":
        return CoverModel(self.points, self.sets, mode)

    def admissible(self, k: int) -> list[tuple]:
        """Keys of ordered (k+1)-tuples of set indices with a shared point.

        Pointwise keys end with the point; nerve keys end with None.
        """
        out = []
        if self.mode == POINTWISE:
            for p in range(self.points):
                for idx in itertools.product(self.sets_at(p), repeat=k + 1):
                    out.append(idx + (p,))
            return sorted(out)
        for idx in itertools.product(range(self.n_sets), repeat=k + 1):
            if self.common(idx):
                out.append(idx + (None,))
        return out


@dataclass(frozen=True)
class Nerve:
    vertices: int
    simplices: tuple[tuple[tuple[int, ...], ...], ...]  # by dimension 0..3, each sorted

    def dim(self, k: int) -> tuple[tuple[int, ...], ...]:
        return self.simplices[k] if k < len(self.simplices) else ()

    def counts(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.simplices)

    @classmethod
    def from_simplices(cls, maximal: Iterable[Sequence[int]], max_dim: int = 3) -> "Nerve":
        faces: set[tuple[int, ...]] = set()
        for s in maximal:
            s = tuple(sorted(set(s)))
            for k in range(1, min(len(s), max_dim + 1) + 1):
                faces.update(itertools.combinations(s, k))
        verts = sorted({v for f in faces for v in f})
        if verts != list(range(len(verts))):
            raise ValueError("vertices must be 0..n-1")
        by_dim = tuple(tuple(sorted(f for f in faces if len(f) == k + 1)) for k in range(max_dim + 1))
        return cls(len(verts), by_dim)


def nerve_of_cover(cover: CoverModel, max_dim: int = 3) -> Nerve:
    by_dim = []
    for k in range(max_dim + 1):
        by_dim.append(tuple(s for s in itertools.combinations(range(cover.n_sets), k + 1) if cover.common(s)))
    return Nerve(cover.n_sets, tuple(by_dim))


def cover_from_nerve(nerve: Nerve, mode: str = NERVE) -> CoverModel:
    """One point per maximal simplex; U_i = simplices containing vertex i."""
    all_faces = [s for d in nerve.simplices for s in d]
    maximal = [s for s in all_faces if not any(set(s) < set(t) for t in all_faces)]
    maximal.sort(key=lambda s: (len(s), s))
    sets = [tuple(p for p, s in enumerate(maximal) if v in s) for v in range(nerve.vertices)]
    return CoverModel(len(maximal), tuple(sets), mode)


def tetrahedron_boundary_cover(mode: str = NERVE) -> CoverModel:
    tris = list(itertools.combinations(range(4), 3))
    return CoverModel(4, tuple(tuple(p for p, t in enumerate(tris) if i in t) for i in range(4)), mode)


def circle_cover(mode: str = NERVE) -> CoverModel:
    return CoverModel(3, ((0, 1), (1, 2), (2, 0)), mode)


def star_cover(k: int = 3, mode: str = NERVE) -> CoverModel:
    return CoverModel(1, tuple((0,) for _ in range(k)), mode)


def cech_groupoid(cover: CoverModel) -> FiniteGroupoid:
    """Objects (p, i) with p in U_i, arrows (p, i, j) with p in U_i and U_j."""
    objects = sorted((p, i) for p in range(cover.points) for i in cover.sets_at(p))
    arrows = sorted((p, i, j) for p in range(cover.points) for i in cover.sets_at(p) for j in cover.sets_at(p))
    return build_groupoid(
        objects, arrows,
        lambda x: (x[0], x[1]), lambda x: (x[0], x[2]),
        lambda x, y: (x[0], x[1], y[2]), lambda o: (o[0], o[1], o[1]),
        name="Cech", check=False,
    )


# composable tuples and face maps


class ComposableTuples:
    """X_n as an (N, n) array of arrow indices in lexicographic order.

    For n = 0 the rows are objects (shape (N, 1), holding object indices).
    """

    def __init__(self, G: FiniteGroupoid, n: int, tuples: np.ndarray):
        self.groupoid = G
        self.n = n
        self.tuples = tuples
        self._radix = G.n_objects if n == 0 else G.n_arrows
        self._codes = self._encode(tuples)

    def __len__(self):
        return len(self.tuples)

    def _encode(self, T: np.ndarray) -> np.ndarray:
        codes = np.zeros(len(T), dtype=np.int64)
        for k in range(T.shape[1]):
            codes = codes * self._radix + T[:, k]
        return codes

    def lookup(self, T: np.ndarray) -> np.ndarray:
        """Positions of the given rows (which must all be in X_n)."""
        codes = self._encode(np.asarray(T, dtype=np.int64).reshape(-1, max(self.n, 1)))
        pos = np.searchsorted(self._codes, codes)
        assert (pos < len(self._codes)).all() and (self._codes[np.minimum(pos, len(self._codes) - 1)] == codes).all()
        return pos

    def anchor_left(self) -> np.ndarray:
        """src of the first arrow (the object itself when n = 0)."""
        return self.tuples[:, 0] if self.n == 0 else self.groupoid.src[self.tuples[:, 0]]

    def anchor_right(self) -> np.ndarray:
        """tgt of the last arrow (the object itself when n = 0)."""
        return self.tuples[:, 0] if self.n == 0 else self.groupoid.tgt[self.tuples[:, -1]]


def nerve_tuples(G: FiniteGroupoid, n: int) -> ComposableTuples:
    if not 0 <= n <= 4:
        raise ValueError("degree must be in 0..4")
    if n == 0:
        return ComposableTuples(G, 0, np.arange(G.n_objects, dtype=np.int64)[:, None])
    order = np.lexsort((np.arange(G.n_arrows), G.src))
    starts = np.searchsorted(G.src[order], np.arange(G.n_objects + 1))
    T = np.arange(G.n_arrows, dtype=np.int64)[:, None]
    for _ in range(n - 1):
        last_t = G.tgt[T[:, -1]]
        counts = starts[last_t + 1] - starts[last_t]
        rep = np.repeat(np.arange(len(T)), counts)
        offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        nxt = order[starts[last_t][rep] + offs]
        T = np.concatenate([T[rep], nxt[:, None]], axis=1)
    return ComposableTuples(G, n, T)


def face(X: ComposableTuples, lower: ComposableTuples, i: int) -> np.ndarray:
    """Index array of ε_i : X_n -> X_{n-1} into ``lower``.

    ε_0 drops the first arrow, ε_n drops the last, and 0 < i < n multiplies
    the i-th and (i+1)-th arrows.  On X_1, ε_0 = tgt and ε_1 = src.
    """
    G, n, T = X.groupoid, X.n, X.tuples
    if not 0 <= i <= n or n < 1:
        raise ValueError("face index out of range")
    if n == 1:
        return (G.tgt if i == 0 else G.src)[T[:, 0]].copy()
    if i == 0:
        return lower.lookup(T[:, 1:])
    if i == n:
        return lower.lookup(T[:, :-1])
    merged = G.comp[T[:, i - 1], T[:, i]]
    return lower.lookup(np.concatenate([T[:, : i - 1], merged[:, None], T[:, i + 1 :]], axis=1))


def check_simplicial_identities(G: FiniteGroupoid, n: int) -> list[tuple[int, int]]:
    """Pairs (i, j) with i < j where ε_i ε_j != ε_{j-1} ε_i on X_n (empty if all hold)."""
    X = [nerve_tuples(G, k) for k in range(n + 1)]
    bad = []
    for i in range(n):
        for j in range(i + 1, n + 1):
            lhs = face(X[n - 1], X[n - 2], i)[face(X[n], X[n - 1], j)] if n >= 2 else None
            rhs = face(X[n - 1], X[n - 2], j - 1)[face(X[n], X[n - 1], i)] if n >= 2 else None
            if n >= 2 and not np.array_equal(lhs, rhs):
                bad.append((i, j))
    return bad


# pullbacks and Morita morphisms


def pullback_groupoid(G: FiniteGroupoid, J: Sequence[int], labels: Sequence[Hashable] | None = None) -> tuple[FiniteGroupoid, GroupoidMorphism]:
    """Pullback along J: P0 -> objects of G, with its projection morphism.

    Arrows are (p, x, q) with J(p) = src(x), J(q) = tgt(x), sorted.
    """
    J = np.asarray(J, dtype=np.int64)
    missing = sorted(set(range(G.n_objects)) - set(J.tolist()))
    if missing:
        raise NotSurjective(f"object {missing[0]} is not hit", missing[0])
    P = list(labels) if labels is not None else list(range(len(J)))
    pre: dict[int, list[int]] = {}
    for p, o in enumerate(J.tolist()):
        pre.setdefault(o, []).append(p)
    triples = sorted((p, x, q) for x in range(G.n_arrows) for p in pre[int(G.src[x])] for q in pre[int(G.tgt[x])])
    T = np.array(triples, dtype=np.int64).reshape(-1, 3)
    idx = {t: k for k, t in enumerate(triples)}
    n = len(triples)
    comp = np.full((n, n), -1, dtype=np.int64)
    by_p: dict[int, list[int]] = {}
    for k, (p, _, _) in enumerate(triples):
        by_p.setdefault(p, []).append(k)
    for a, (p, x, q) in enumerate(triples):
        for b in by_p.get(q, []):
            _, y, r = triples[b]
            comp[a, b] = idx[(p, int(G.comp[x, y]), r)]
    unit = [idx[(p, int(G.unit[J[p]]), p)] for p in range(len(J))]
    inv = [idx[(q, int(G.inv[x]), p)] for (p, x, q) in triples]
    H = FiniteGroupoid(P, [(P[p], G.arrows[x], P[q]) for p, x, q in triples], T[:, 0], T[:, 2], unit, comp, inv, name=f"J*{G.name}")
    proj = GroupoidMorphism(H, G, J, T[:, 1])
    return H, proj


@dataclass
class MoritaResult:
    ok: bool
    witness: object = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def is_morita_morphism(f: GroupoidMorphism) -> MoritaResult:
    """Surjective on objects and the comparison x -> (s x, f x, t x) is a bijection."""
    f.check()
    S, T = f.source, f.target
    missing = sorted(set(range(T.n_objects)) - set(f.obj_map.tolist()))
    if missing:
        return MoritaResult(False, ("object", missing[0]), "object map not surjective")
    f0 = f.obj_map
    seen: dict[tuple, int] = {}
    for x in range(S.n_arrows):
        key = (int(S.src[x]), int(f.arrow_map[x]), int(S.tgt[x]))
        if key in seen:
            return MoritaResult(False, ("arrows", seen[key], x), "comparison not injective")
        seen[key] = x
    for p in range(S.n_objects):
        for q in range(S.n_objects):
            for y in T.hom(int(f0[p]), int(f0[q])).tolist():
                if (p, y, q) not in seen:
                    return MoritaResult(False, ("missing", p, y, q), "comparison not surjective")
    return MoritaResult(True)
