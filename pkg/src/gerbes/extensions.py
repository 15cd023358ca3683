"""Groupoid G-extensions over Čech groupoids and their non-abelian cocycles.

A cocycle is a pair of dictionaries:

* ``lam[(i, j, p)]`` an automorphism of G (a permutation tuple),
* ``g[(i, j, k, p)]`` an element of G,

defined on every ordered tuple of set indices sharing the point ``p``.  In
nerve mode the last key component is ``None`` and one value serves every
shared point.

The total groupoid has arrows ``(p, i, j, a)`` and product

    (x_ij, a)(x_jk, b) = (x_ik, g_ijk * lam_jk^-1(a) * b).

This product is associative with units ``(x_ii, 1)`` exactly when

    lam_ii = id,  g_iij = g_ijj = 1,
    lam_ij o lam_jk = lam_ik o AD(g_ijk)                  (tag C1)
    g_ijl * g_jkl = g_ikl * lam_kl^-1(g_ijk)              (tag C2)

which is what :func:`validate_cocycle` checks.
"""

from __future__ import annotations

import random as _random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import groups as grp
from .errors import (
    BadSection,
    BadTrivialization,
    InvalidCocycle,
    LiftFailure,
    NoCompletion,
    NotCentralSubgroup,
    NotConstant,
    NotTrivializable,
)
from .groupoids import NERVE, POINTWISE, CoverModel, FiniteGroupoid, GroupoidMorphism, cech_groupoid, nerve_of_cover
from .groups import AutStructure, FiniteGroup, compose, conjugation, inverse_perm

Perm = tuple


# cocycle data


class NonAbelianCocycle:
    """Full (all ordered tuples) cocycle data over a cover."""

    def __init__(self, group: FiniteGroup, cover: CoverModel, lam: Mapping, g: Mapping, auts: AutStructure | None = None):
        self.group = group
        self.cover = cover
        self.lam = {k: tuple(int(x) for x in v) for k, v in lam.items()}
        self.g = {k: int(v) for k, v in g.items()}
        self._auts = auts
        self._check_keys()

    @property
    def mode(self) -> str:
        return self.cover.mode

    @property
    def auts(self) -> AutStructure:
        if self._auts is None:
            self._auts = grp.automorphism_structure(self.group)
        return self._auts

    def _check_keys(self):
        want1 = set(self.cover.admissible(1))
        want2 = set(self.cover.admissible(2))
        for name, have, want in (("lambda", set(self.lam), want1), ("g", set(self.g), want2)):
            missing = sorted(want - have, key=_key_order)
            extra = sorted(have - want, key=_key_order)
            if missing or extra:
                k = (missing or extra)[0]
                what = "missing" if missing else "unexpected"
                raise InvalidCocycle(f"{what} {name} entry {k}", witness=("S", k))

    def key(self, idx: tuple, p: int) -> tuple:
        return idx + ((p,) if self.mode == POINTWISE else (None,))

    def lam_at(self, i: int, j: int, p: int) -> Perm:
        return self.lam[self.key((i, j), p)]

    def g_at(self, i: int, j: int, k: int, p: int) -> int:
        return self.g[self.key((i, j, k), p)]

    def vertex_keys(self) -> list[tuple]:
        return self.cover.admissible(0)

    def sorted_part(self) -> tuple[dict, dict]:
        lam = {k: v for k, v in self.lam.items() if k[0] < k[1]}
        g = {k: v for k, v in self.g.items() if k[0] < k[1] < k[2]}
        return lam, g

    def copy(self, lam=None, g=None) -> "NonAbelianCocycle":
        return NonAbelianCocycle(self.group, self.cover, lam if lam is not None else self.lam, g if g is not None else self.g, self._auts)

    def __eq__(self, other):
        return (
            isinstance(other, NonAbelianCocycle) and self.group == other.group and self.cover == other.cover
            and self.lam == other.lam and self.g == other.g
        )

    def __repr__(self):
        return f"NonAbelianCocycle({self.group.name}, sets={self.cover.n_sets}, mode={self.mode})"


def _key_order(k: tuple):
    return tuple(-1 if x is None else x for x in k)


def trivial_cocycle(G: FiniteGroup, cover: CoverModel, auts: AutStructure | None = None) -> NonAbelianCocycle:
    ident = grp.identity_perm(G.order)
    return NonAbelianCocycle(G, cover, {k: ident for k in cover.admissible(1)}, {k: 0 for k in cover.admissible(2)}, auts)


def with_mode(data: NonAbelianCocycle, mode: str) -> NonAbelianCocycle:
    """Convert between nerve-constant and pointwise storage."""
    if mode == data.mode:
        return data
    cover = data.cover.with_mode(mode)
    if mode == POINTWISE:
        lam = {k: data.lam[k[:-1] + (None,)] for k in cover.admissible(1)}
        g = {k: data.g[k[:-1] + (None,)] for k in cover.admissible(2)}
        return NonAbelianCocycle(data.group, cover, lam, g, data._auts)
    lam, g = {}, {}
    for store, src in ((lam, data.lam), (g, data.g)):
        for k, v in sorted(src.items(), key=lambda kv: _key_order(kv[0])):
            nk = k[:-1] + (None,)
            if nk in store and store[nk] != v:
                raise NotConstant(f"value at {k[:-1]} differs between points")
            store[nk] = v
    return NonAbelianCocycle(data.group, cover, lam, g, data._auts)


# validation


@dataclass
class CocycleReport:
    violations: list = field(default_factory=list)  # (tag, indices, point)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def tags(self) -> set:
        return {v[0] for v in self.violations}

    def lines(self) -> list[str]:
        return [f"{tag} {','.join(map(str, idx))} point={'-' if p is None else p}" for tag, idx, p in self.violations]


def validate_cocycle(data: NonAbelianCocycle) -> CocycleReport:
    """Every violated relation, sorted by (tag, indices, point)."""
    G = data.group
    T = G.table
    n = G.order
    ident = grp.identity_perm(n)
    out = []
    inv_cache: dict[Perm, Perm] = {}
    ok_aut: dict[Perm, bool] = {}

    def is_aut(f):
        if f not in ok_aut:
            ok_aut[f] = len(f) == n and grp.is_automorphism(G, f)
        return ok_aut[f]

    def pinv(f):
        if f not in inv_cache:
            inv_cache[f] = inverse_perm(f)
        return inv_cache[f]

    ad = [conjugation(G, x) for x in range(n)]
    for k, f in data.lam.items():
        if not is_aut(f):
            out.append(("A", k[:-1], k[-1]))
    for k, f in data.lam.items():
        if k[0] == k[1] and f != ident:
            out.append(("N", k[:-1], k[-1]))
    for k, v in data.g.items():
        i, j, l = k[:3]
        if (i == j or j == l) and v != 0:
            out.append(("N", k[:-1], k[-1]))
    if any(v[0] == "A" for v in out):
        return CocycleReport(sorted(out, key=_violation_order))
    # C1 on triples
    for (i, j, k, p), gv in data.g.items():
        lhs = compose(data.lam[(i, j, p)], data.lam[(j, k, p)])
        rhs = compose(data.lam[(i, k, p)], ad[gv])
        if lhs != rhs:
            out.append(("C1", (i, j, k), p))
    # C2 on quadruples
    for key in data.cover.admissible(3):
        i, j, k, l, p = key
        lhs = T[data.g[(i, j, l, p)], data.g[(j, k, l, p)]]
        rhs = T[data.g[(i, k, l, p)], pinv(data.lam[(k, l, p)])[data.g[(i, j, k, p)]]]
        if lhs != rhs:
            out.append(("C2", (i, j, k, l), p))
    return CocycleReport(sorted(out, key=_violation_order))


def _violation_order(v):
    tag, idx, p = v
    return (tag, tuple(idx), -1 if p is None else p)


# completion from sorted data


def complete_cocycle(G: FiniteGroup, cover: CoverModel, lam_sorted: Mapping, g_sorted: Mapping, auts: AutStructure | None = None) -> NonAbelianCocycle:
    """Fill every ordered tuple from data on i < j edges and i < j < k triples.

    Missing sorted entries are taken to be trivial.  The filled values follow
    the conventions lam_ii = id, lam_ji = lam_ij^-1 and g = 1 on degenerate
    triples; non-sorted triples come from a gauge frame on each triangle.
    """
    n = G.order
    ident = grp.identity_perm(n)
    lam: dict = {}
    g: dict = {}
    ad = [conjugation(G, x) for x in range(n)]
    for key in cover.admissible(1):
        i, j, p = key
        if i == j:
            lam[key] = ident
        elif i < j:
            lam[key] = tuple(lam_sorted.get(key, ident))
            if len(lam[key]) != n or sorted(lam[key]) != list(range(n)):
                raise NoCompletion(f"lambda at {key} is not a permutation", key)
    for (i, j, p), f in list(lam.items()):
        if i < j:
            lam[(j, i, p)] = inverse_perm(f)
    for key in cover.admissible(2):
        i, j, k, p = key
        if i == j or j == k or i == k:
            g[key] = 0
    # nondegenerate triples: frame per sorted triangle
    for key in cover.admissible(2):
        i, j, k, p = key
        if not (i < j < k):
            continue
        g012 = int(g_sorted.get(key, 0))
        l01, l02, l12 = lam[(i, j, p)], lam[(i, k, p)], lam[(j, k, p)]
        theta = {i: ident, j: l01, k: l02}
        r = {(i, j): 0, (i, k): 0, (j, k): l02[g012]}
        for (a, b), v in list(r.items()):
            r[(b, a)] = G.inv(v)
        for a in (i, j, k):
            r[(a, a)] = 0
        expect12 = compose(inverse_perm(theta[j]), compose(ad[r[(j, k)]], theta[k]))
        if expect12 != l12:
            raise NoCompletion(f"triangle {(i, j, k)} at point {p} is inconsistent", (i, j, k, p))
        for a, b, c in _perms3(i, j, k):
            val = G.product(G.inv(r[(a, c)]), r[(a, b)], r[(b, c)])
            g[(a, b, c, p)] = inverse_perm(theta[c])[val]
    data = NonAbelianCocycle(G, cover, lam, g, auts)
    report = validate_cocycle(data)
    if not report.ok:
        tag, idx, p = report.violations[0]
        raise NoCompletion(f"sorted data violates {tag} at {idx} point {p}", (tag, idx, p))
    return data


def _perms3(i, j, k):
    return [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)]


# extensions


@dataclass
class KernelTrivialization:
    """maps[m, a] is the kernel arrow at object m corresponding to a in G."""

    maps: np.ndarray

    def inverse(self, E: "GroupoidExtension") -> np.ndarray:
        inv = np.full(E.total.n_arrows, -1, dtype=np.int64)
        for m in range(self.maps.shape[0]):
            inv[self.maps[m]] = np.arange(self.maps.shape[1])
        return inv

    def check(self, E: "GroupoidExtension") -> "KernelTrivialization":
        X = E.total
        G = E.group
        if self.maps.shape != (X.n_objects, G.order):
            raise BadTrivialization("trivialization has the wrong shape")
        for m in range(X.n_objects):
            row = self.maps[m]
            if sorted(row.tolist()) != E.kernel_fiber(m).tolist():
                raise BadTrivialization(f"object {m}: not a bijection onto the kernel fiber")
            if (X.comp[row[:, None], row[None, :]] != row[G.table]).any():
                raise BadTrivialization(f"object {m}: not a homomorphism")
        return self


@dataclass
class GroupoidExtension:
    total: FiniteGroupoid
    base: FiniteGroupoid
    phi: np.ndarray
    group: FiniteGroup
    cover: CoverModel | None = None
    chi: KernelTrivialization | None = None
    rho: np.ndarray | None = None
    data: NonAbelianCocycle | None = None

    def kernel_fiber(self, m: int) -> np.ndarray:
        return np.nonzero(self.phi == self.base.unit[m])[0]

    def lifts(self, y: int) -> np.ndarray:
        return np.nonzero(self.phi == y)[0]

    def morphism(self) -> GroupoidMorphism:
        return GroupoidMorphism(self.total, self.base, np.arange(self.base.n_objects), self.phi)

    def check(self) -> "GroupoidExtension":
        """Verify the extension invariants exhaustively."""
        X, Y = self.total, self.base
        self.morphism().check()
        if X.n_objects != Y.n_objects:
            raise InvalidCocycle("total and base must share objects")
        if len(set(self.phi.tolist())) != Y.n_arrows:
            raise InvalidCocycle("phi is not surjective on arrows")
        fibers = [self.kernel_fiber(m) for m in range(X.n_objects)]
        for m, K in enumerate(fibers):
            if len(K) != self.group.order:
                raise InvalidCocycle(f"kernel fiber at object {m} has {len(K)} elements")
        for y in range(Y.n_arrows):
            L = self.lifts(y)
            K = fibers[int(Y.tgt[y])]
            if len(L) != len(K):
                raise InvalidCocycle(f"fiber over arrow {y} has the wrong size")
            orbit = set(X.comp[L[0], K].tolist())
            if orbit != set(L.tolist()):
                raise InvalidCocycle(f"kernel action on the fiber over arrow {y} is not transitive")
        if self.chi is not None:
            self.chi.check(self)
        return self


def _point_arrays(data: NonAbelianCocycle, p: int, S: Sequence[int]):
    G = data.group
    s, n = len(S), G.order
    L = np.zeros((s, s, n), dtype=np.int64)
    Linv = np.zeros((s, s, n), dtype=np.int64)
    Gv = np.zeros((s, s, s), dtype=np.int64)
    for a, i in enumerate(S):
        for b, j in enumerate(S):
            f = np.asarray(data.lam_at(i, j, p), dtype=np.int64)
            L[a, b] = f
            Linv[a, b, f] = np.arange(n)
            for c, k in enumerate(S):
                Gv[a, b, c] = data.g_at(i, j, k, p)
    return L, Linv, Gv


def _check_point(data, p, S, T, Linv, Gv):
    """Units and associativity of the product over point p (vectorized)."""
    s, n = len(S), T.shape[0]
    ar, an = np.arange(s), np.arange(n)
    U = T[Gv[:, :, :, None], Linv[None, :, :, :]]  # U[a,b,c,x] = g_abc * lam_bc^-1(x)
    XY = T[U]  # XY[a,b,c,x,y]
    for a in range(s):
        for b in range(s):
            if not np.array_equal(XY[a, a, b, 0], an):
                return ("unit", (S[a], S[a], S[b]), None)
            if not np.array_equal(XY[a, b, b, :, 0], an):
                return ("unit", (S[a], S[b], S[b]), None)
    A = ar.reshape(s, 1, 1, 1, 1, 1)
    C = ar.reshape(1, 1, s, 1, 1, 1)
    D = ar.reshape(1, 1, 1, s, 1, 1)
    left = T[U[A, C, D, XY[:, :, :, None, :, :]]]  # (s,s,s,s,n,n,n)
    A7 = ar.reshape(s, 1, 1, 1, 1, 1, 1)
    B7 = ar.reshape(1, s, 1, 1, 1, 1, 1)
    C7 = ar.reshape(1, 1, s, 1, 1, 1, 1)
    D7 = ar.reshape(1, 1, 1, s, 1, 1, 1)
    X7 = an.reshape(1, 1, 1, 1, n, 1, 1)
    Y7 = an.reshape(1, 1, 1, 1, 1, n, 1)
    Z7 = an.reshape(1, 1, 1, 1, 1, 1, n)
    right = T[U[A7, B7, D7, X7], XY[B7, C7, D7, Y7, Z7]]
    bad = np.argwhere(left != right)
    if len(bad):
        a, b, c, d, x, y, z = map(int, bad[0])
        return ("assoc", (S[a], S[b], S[c], S[d]), (x, y, z))
    return None


def extension_from_cocycle(data: NonAbelianCocycle) -> GroupoidExtension:
    """Build the total groupoid of the twisted product and check it exhaustively.

    Does not consult :func:`validate_cocycle`: the groupoid axioms are checked
    on the constructed product itself.  Raises InvalidCocycle with a witness
    ("unit" or "assoc", indices, elements) at the first failure.
    """
    G, cover = data.group, data.cover
    n = G.order
    T = G.table
    Y = cech_groupoid(cover)
    for k, f in data.lam.items():
        if sorted(f) != list(range(n)):
            raise InvalidCocycle(f"lambda at {k} is not a bijection", witness=("A", k))
    NA = Y.n_arrows * n
    comp = np.full((NA, NA), -1, dtype=np.int64)
    inv = np.zeros(NA, dtype=np.int64)
    for p in range(cover.points):
        S = cover.sets_at(p)
        L, Linv, Gv = _point_arrays(data, p, S)
        bad = _check_point(data, p, S, T, Linv, Gv)
        if bad is not None:
            kind, idx, elems = bad
            raise InvalidCocycle(f"{kind} fails at {idx} point {p}", witness=(kind, idx, p, elems))
        U = T[Gv[:, :, :, None], Linv[None, :, :, :]]
        XY = T[U]
        base = {(a, b): Y.arrow((p, S[a], S[b])) * n for a in range(len(S)) for b in range(len(S))}
        for a in range(len(S)):
            for b in range(len(S)):
                rows = base[(a, b)] + np.arange(n)
                for c in range(len(S)):
                    comp[base[(a, b)] : base[(a, b)] + n, base[(b, c)] : base[(b, c)] + n] = base[(a, c)] + XY[a, b, c]
                # inverse of (x_ab, x) is (x_ba, (g_aba lam_ba^-1(x))^-1)
                inv[rows] = base[(b, a)] + G.inverse[U[a, b, a]]
    arrows = [Y.arrows[c] + (a,) for c in range(Y.n_arrows) for a in range(n)]
    src = np.repeat(Y.src, n)
    tgt = np.repeat(Y.tgt, n)
    unit = Y.unit * n
    X = FiniteGroupoid(Y.objects, arrows, src, tgt, unit, comp, inv, name=f"X({G.name})")
    phi = np.repeat(np.arange(Y.n_arrows), n)
    chi = KernelTrivialization(np.array([Y.unit[m] * n + np.arange(n) for m in range(Y.n_objects)], dtype=np.int64))
    rho = np.arange(Y.n_arrows) * n
    return GroupoidExtension(X, Y, phi, G, cover, chi, rho, data)


def _edge_of(Y: FiniteGroupoid, y: int) -> tuple[int, int, int]:
    p, i, j = Y.arrows[y]
    return i, j, p


def cocycle_from_extension(E: GroupoidExtension, rho: np.ndarray | None = None, chi: KernelTrivialization | None = None, conventions: bool = True, auts: AutStructure | None = None) -> NonAbelianCocycle:
    """Read off (lam, g) from a section rho of phi and a kernel trivialization chi.

    lam_ij(a) = chi_i^-1(rho_ij chi_j(a) rho_ij^-1) and
    g_ijk = chi_k^-1(rho_ik^-1 rho_ij rho_jk).  With ``conventions`` the
    section must also satisfy rho(y^-1) = rho(y)^-1.
    """
    X, Y, G = E.total, E.base, E.group
    rho = E.rho if rho is None else np.asarray(rho, dtype=np.int64)
    chi = E.chi if chi is None else chi
    if rho is None or chi is None:
        raise BadSection("a section and a kernel trivialization are required")
    if len(rho) != Y.n_arrows or (E.phi[rho] != np.arange(Y.n_arrows)).any():
        raise BadSection("rho is not a section of phi")
    if (rho[Y.unit] != X.unit).any():
        raise BadSection("rho does not send units to units")
    if conventions and (rho[Y.inv] != X.inv[rho]).any():
        y = int(np.argmax(rho[Y.inv] != X.inv[rho]))
        raise BadSection(f"rho(y^-1) != rho(y)^-1 at base arrow {Y.arrows[y]}")
    chi.check(E)
    chinv = chi.inverse(E)
    cover = E.cover
    n = G.order
    lam: dict = {}
    g: dict = {}
    for y in range(Y.n_arrows):
        i, j, p = _edge_of(Y, y)
        si, sj = int(Y.src[y]), int(Y.tgt[y])
        r = int(rho[y])
        rinv = int(X.inv[r])
        f = tuple(int(chinv[X.comp[X.comp[r, chi.maps[sj][a]], rinv]]) for a in range(n))
        _store(lam, (i, j), p, f, cover)
    for key in cover.with_mode(POINTWISE).admissible(2):
        i, j, k, p = key
        yij, yjk, yik = Y.arrow((p, i, j)), Y.arrow((p, j, k)), Y.arrow((p, i, k))
        w = X.comp[X.comp[X.inv[rho[yik]], rho[yij]], rho[yjk]]
        _store(g, (i, j, k), p, int(chinv[w]), cover)
    return NonAbelianCocycle(G, cover, lam, g, auts)


def _store(d: dict, idx: tuple, p: int, value, cover: CoverModel):
    if cover.mode == POINTWISE:
        d[idx + (p,)] = value
        return
    key = idx + (None,)
    if key in d and d[key] != value:
        raise NotConstant(f"value at {idx} differs between points; use pointwise mode")
    d[key] = value


def canonical_lift_section(E: GroupoidExtension, h: Mapping) -> np.ndarray:
    """Section x_ij -> rho0(x_ij) chi0_j(h_ij) for i < j, extended by inverses.

    ``h`` is keyed like lambda; it needs entries for i < j only.  The result
    satisfies rho(unit) = unit and rho(y^-1) = rho(y)^-1.
    """
    X, Y = E.total, E.base
    rho = np.array(E.rho, dtype=np.int64)
    for y in range(Y.n_arrows):
        i, j, p = _edge_of(Y, y)
        if i < j:
            key = (i, j, p if E.cover.mode == POINTWISE else None)
            rho[y] = X.comp[E.rho[y], E.chi.maps[int(Y.tgt[y])][int(h.get(key, 0))]]
    for y in range(Y.n_arrows):
        i, j, p = _edge_of(Y, y)
        if i > j:
            rho[y] = X.inv[rho[Y.inv[y]]]
    return rho


def gauged_trivialization(E: GroupoidExtension, theta: Mapping) -> KernelTrivialization:
    """chi'_m = chi_m o theta_m, theta keyed by vertex keys (i, p) or (i, None)."""
    maps = np.array(E.chi.maps, dtype=np.int64)
    for m, (p, i) in enumerate(E.base.objects):
        key = (i, p if E.cover.mode == POINTWISE else None)
        if key in theta:
            maps[m] = E.chi.maps[m][np.asarray(theta[key], dtype=np.int64)]
    return KernelTrivialization(maps)


def default_section(E: GroupoidExtension) -> np.ndarray:
    """Least lift over i < j edges, units over loops, inverses otherwise."""
    X, Y = E.total, E.base
    rho = np.full(Y.n_arrows, -1, dtype=np.int64)
    for y in range(Y.n_arrows):
        i, j, _ = _edge_of(Y, y)
        if i == j:
            rho[y] = X.unit[Y.src[y]]
        elif i < j:
            rho[y] = E.lifts(y)[0]
    for y in range(Y.n_arrows):
        i, j, _ = _edge_of(Y, y)
        if i > j:
            rho[y] = X.inv[rho[Y.inv[y]]]
    return rho


def check_isomorphism(new: GroupoidExtension, old: GroupoidExtension, amap: np.ndarray) -> bool:
    """amap: new total arrows -> old total arrows is an iso over the identity of the base."""
    amap = np.asarray(amap, dtype=np.int64)
    if len(set(amap.tolist())) != old.total.n_arrows or len(amap) != new.total.n_arrows:
        return False
    f = GroupoidMorphism(new.total, old.total, np.arange(new.total.n_objects), amap)
    try:
        f.check()
    except Exception:
        return False
    return bool((old.phi[amap] == new.phi).all())


# twists


def twist_by_cochain(data: NonAbelianCocycle, h: Mapping) -> NonAbelianCocycle:
    """lam'_ij = lam_ij o AD(h_ij), g'_ijk = h_ik^-1 g_ijk lam_jk^-1(h_ij) h_jk.

    ``h`` is keyed like lambda (missing entries count as 1) and h_ii = 1.
    """
    G = data.group
    ad = [conjugation(G, x) for x in range(G.order)]
    H = {k: int(h.get(k, 0)) for k in data.lam}
    for k, v in H.items():
        if k[0] == k[1] and v != 0:
            raise ValueError(f"cochain must be trivial on loops, got {v} at {k}")
    lam = {k: compose(f, ad[H[k]]) for k, f in data.lam.items()}
    g = {}
    for (i, j, k, p), v in data.g.items():
        lam_jk_inv = inverse_perm(data.lam[(j, k, p)])
        g[(i, j, k, p)] = G.product(G.inv(H[(i, k, p)]), v, lam_jk_inv[H[(i, j, p)]], H[(j, k, p)])
    return data.copy(lam, g)


def twist_isomorphism(new: GroupoidExtension, old: GroupoidExtension, h: Mapping) -> np.ndarray:
    """(p, i, j, a) in the twisted extension -> (p, i, j, h_ij a) in the original."""
    G = new.group
    out = np.zeros(new.total.n_arrows, dtype=np.int64)
    for x, (p, i, j, a) in enumerate(new.total.arrows):
        key = (i, j, p if new.cover.mode == POINTWISE else None)
        out[x] = old.total.arrow((p, i, j, G.mul(int(h.get(key, 0)), a)))
    return out


def symmetric_cochain(data: NonAbelianCocycle, h_sorted: Mapping) -> dict:
    """Extend h from i < j edges by h_ii = 1, h_ji = lam_ij(h_ij)^-1."""
    G = data.group
    out = {}
    for k in data.lam:
        i, j, p = k
        if i == j:
            out[k] = 0
        elif i < j:
            out[k] = int(h_sorted.get(k, 0))
    for (i, j, p), v in list(out.items()):
        if i < j:
            out[(j, i, p)] = G.inv(data.lam[(i, j, p)][v])
    return out


def inverse_cochain(data: NonAbelianCocycle, h: Mapping) -> dict:
    """Cochain undoing twist_by_cochain(data, h): twisting the result by it gives data back."""
    G = data.group
    return {k: G.inv(int(h.get(k, 0))) for k in data.lam}


def gauge_by_automorphisms(data: NonAbelianCocycle, theta: Mapping) -> NonAbelianCocycle:
    """lam'_ij = theta_i^-1 lam_ij theta_j, g'_ijk = theta_k^-1(g_ijk)."""
    n = data.group.order
    ident = grp.identity_perm(n)
    th = {k: tuple(theta.get(k, ident)) for k in data.vertex_keys()}
    thinv = {k: inverse_perm(v) for k, v in th.items()}
    lam = {(i, j, p): compose(thinv[(i, p)], compose(f, th[(j, p)])) for (i, j, p), f in data.lam.items()}
    g = {(i, j, k, p): thinv[(k, p)][v] for (i, j, k, p), v in data.g.items()}
    return data.copy(lam, g)


def gauge_isomorphism(new: GroupoidExtension, old: GroupoidExtension, theta: Mapping) -> np.ndarray:
    """(p, i, j, a) in the gauged extension -> (p, i, j, theta_j(a)) in the original."""
    n = new.group.order
    ident = grp.identity_perm(n)
    out = np.zeros(new.total.n_arrows, dtype=np.int64)
    for x, (p, i, j, a) in enumerate(new.total.arrows):
        key = (j, p if new.cover.mode == POINTWISE else None)
        out[x] = old.total.arrow((p, i, j, theta.get(key, ident)[a]))
    return out


# outer action and band


def outer_action(E: GroupoidExtension, chi: KernelTrivialization | None = None, auts: AutStructure | None = None) -> dict:
    """Base arrow index -> Out element of chi_s^-1 o AD_x o chi_t for any lift x.

    Raises InvalidCocycle if two lifts disagree (which cannot happen for a
    genuine extension).
    """
    X, Y, G = E.total, E.base, E.group
    chi = chi or E.chi
    auts = auts or grp.automorphism_structure(G)
    chinv = chi.inverse(E)
    out = {}
    for y in range(Y.n_arrows):
        s, t = int(Y.src[y]), int(Y.tgt[y])
        vals = set()
        for x in E.lifts(y).tolist():
            xi = int(X.inv[x])
            f = tuple(int(chinv[X.comp[X.comp[x, chi.maps[t][a]], xi]]) for a in range(G.order))
            vals.add(auts.out_of(f))
        if len(vals) != 1:
            raise InvalidCocycle(f"outer action depends on the lift over {Y.arrows[y]}")
        out[y] = vals.pop()
    return out


@dataclass
class BandCocycle:
    auts: AutStructure
    cover: CoverModel
    values: dict  # lambda-style key -> Out index

    @property
    def out(self) -> FiniteGroup:
        return self.auts.out

    def violations(self) -> list[tuple]:
        """Triples where bar_ij bar_jk bar_ki != 1."""
        O = self.out
        bad = []
        for (i, j, k, p) in self.cover.admissible(2):
            v = O.product(self.values[(i, j, p)], self.values[(j, k, p)], self.values[(k, i, p)])
            if v != 0:
                bad.append((i, j, k, p))
        return bad

    def is_identically_trivial(self) -> bool:
        return all(v == 0 for v in self.values.values())


def band(data: NonAbelianCocycle) -> BandCocycle:
    auts = data.auts
    return BandCocycle(auts, data.cover, {k: auts.out_of(f) for k, f in data.lam.items()})


def band_of_extension(E: GroupoidExtension, chi: KernelTrivialization | None = None, auts: AutStructure | None = None) -> BandCocycle:
    auts = auts or grp.automorphism_structure(E.group)
    act = outer_action(E, chi, auts)
    vals = {}
    for y, o in act.items():
        i, j, p = _edge_of(E.base, y)
        _store(vals, (i, j), p, o, E.cover)
    return BandCocycle(auts, E.cover, vals)


def _band_graph(b: BandCocycle):
    verts = b.cover.admissible(0)
    adj: dict = {v: [] for v in verts}
    for (i, j, p) in sorted(b.values, key=_key_order):
        if i != j:
            adj[(i, p)].append(((j, p), (i, j, p)))
    return verts, adj


def band_is_trivial(b: BandCocycle) -> dict | None:
    """eta with bar_ij = eta_i eta_j^-1 on every edge, or None.

    Gauge-fixed on a breadth-first spanning tree per component.
    """
    O = b.out
    verts, adj = _band_graph(b)
    eta: dict = {}
    for root in verts:
        if root in eta:
            continue
        eta[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v, e in adj[u]:
                if v not in eta:
                    eta[v] = O.mul(O.inv(b.values[e]), eta[u])
                    queue.append(v)
    for (i, j, p), val in b.values.items():
        if val != O.mul(eta[(i, p)], O.inv(eta[(j, p)])):
            return None
    return eta


@dataclass
class BandClass:
    trivial: bool
    trivialization: dict | None = None
    loops: list = field(default_factory=list)  # (edge key, holonomy, conjugacy class)

    def nontrivial_loops(self) -> list:
        return [l for l in self.loops if l[1] != 0]


def band_class(b: BandCocycle) -> BandClass:
    """Trivial with a trivialization, or the holonomy of every independent loop."""
    eta = band_is_trivial(b)
    O = b.out
    verts, adj = _band_graph(b)
    P: dict = {}
    tree: set = set()
    for root in verts:
        if root in P:
            continue
        P[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for v, e in adj[u]:
                if v not in P:
                    P[v] = O.mul(P[u], b.values[e])
                    tree.add(frozenset((u, v)))
                    queue.append(v)
    loops = []
    for (i, j, p) in sorted(b.values, key=_key_order):
        if i >= j or frozenset(((i, p), (j, p))) in tree:
            continue
        hol = O.product(P[(i, p)], b.values[(i, j, p)], O.inv(P[(j, p)]))
        loops.append(((i, j, p), hol, b.auts.conjugacy_class_out(hol)))
    return BandClass(eta is not None, eta, loops)


# central extensions


def _lift(auts: AutStructure, o: int) -> Perm:
    try:
        return auts.lift(o)
    except ValueError:
        raise LiftFailure(f"no automorphism lifts Out element {o}") from None


@dataclass
class Normalization:
    data: NonAbelianCocycle  # lam = id, g central
    theta: dict
    h: dict
    intermediate: NonAbelianCocycle

    def isomorphism(self, new: GroupoidExtension, old: GroupoidExtension) -> np.ndarray:
        """Normalized extension -> original extension, arrow by arrow."""
        G = new.group
        n = G.order
        ident = grp.identity_perm(n)
        out = np.zeros(new.total.n_arrows, dtype=np.int64)
        pw = new.cover.mode == POINTWISE
        for x, (p, i, j, a) in enumerate(new.total.arrows):
            hij = self.h.get((i, j, p if pw else None), 0)
            th = self.theta.get((j, p if pw else None), ident)
            out[x] = old.total.arrow((p, i, j, th[G.mul(hij, a)]))
        return out


def normalize_central(data: NonAbelianCocycle, eta: Mapping | None = None, verify: bool = True) -> Normalization:
    """Gauge by lifted eta, then twist by an inner cochain so that lam = id.

    The result has g valued in Z(G) and satisfying the abelian relation.  With
    ``verify`` the two extensions are built and the composed isomorphism is
    checked arrow by arrow.
    """
    G = data.group
    auts = data.auts
    if eta is None:
        eta = band_is_trivial(band(data))
        if eta is None:
            raise NotTrivializable("band has nontrivial holonomy")
    theta = {k: _lift(auts, eta[k]) for k in data.vertex_keys()}
    mid = gauge_by_automorphisms(data, theta)
    ad_index: dict[Perm, int] = {}
    for x in range(G.order):
        ad_index.setdefault(conjugation(G, x), x)  # least element per inner automorphism
    h: dict = {}
    for k, f in mid.lam.items():
        i, j, p = k
        if i == j:
            h[k] = 0
        elif i < j:
            if f not in ad_index:
                raise NotTrivializable(f"lambda at {k} is not inner after gauging")
            h[k] = G.inv(ad_index[f])
    for k, f in mid.lam.items():
        i, j, p = k
        if i > j:
            fwd = mid.lam[(j, i, p)]
            if f == inverse_perm(fwd):
                h[k] = G.inv(fwd[h[(j, i, p)]])
            else:
                if f not in ad_index:
                    raise NotTrivializable(f"lambda at {k} is not inner after gauging")
                h[k] = G.inv(ad_index[f])
    out = twist_by_cochain(mid, h)
    ident = grp.identity_perm(G.order)
    assert all(f == ident for f in out.lam.values())
    Z = set(grp.center(G))
    assert all(v in Z for v in out.g.values())
    norm = Normalization(out, theta, h, mid)
    if verify:
        new, old = extension_from_cocycle(out), extension_from_cocycle(data)
        if not check_isomorphism(new, old, norm.isomorphism(new, old)):
            raise InvalidCocycle("normalization isomorphism check failed")
    return norm


@dataclass
class CentralityResult:
    ok: bool
    certificate: NonAbelianCocycle | None = None
    witness: object = None

    def __bool__(self):
        return self.ok


def is_central(obj, chi: KernelTrivialization | None = None, rho: np.ndarray | None = None) -> CentralityResult:
    """Band identically trivial for the given trivialization; certificate is
    the normalized Z(G)-valued cocycle.  Accepts cocycle data or an extension."""
    if isinstance(obj, GroupoidExtension):
        rho = rho if rho is not None else (obj.rho if obj.rho is not None else default_section(obj))
        data = cocycle_from_extension(obj, rho, chi or obj.chi)
    else:
        data = obj
    b = band(data)
    for k in sorted(b.values, key=_key_order):
        if b.values[k] != 0:
            return CentralityResult(False, None, k)
    norm = normalize_central(data, {v: 0 for v in data.vertex_keys()}, verify=False)
    return CentralityResult(True, norm.data)


def subgroup(G: FiniteGroup, elements: Iterable[int]) -> tuple[FiniteGroup, list[int]]:
    """The subgroup on the given elements (sorted, identity first) and the embedding."""
    els = sorted(set(int(e) for e in elements))
    idx = {e: k for k, e in enumerate(els)}
    try:
        table = [[idx[G.mul(a, b)] for b in els] for a in els]
    except KeyError:
        raise NotCentralSubgroup("elements are not closed under multiplication") from None
    return grp.validate_group(table, name=f"sub({G.name})"), els


def induced_from_central(data_A: NonAbelianCocycle, G: FiniteGroup, embedding: Sequence[int]) -> GroupoidExtension:
    """(X~ x G) / A for a cocycle data_A over A with lam = id.

    ``embedding[a]`` is the element of G for a in A; its image must lie in
    Z(G).  The diagonal action is (x, g) ~ (x z, z^-1 g); orbits are
    represented by their least member.
    """
    A = data_A.group
    emb = [int(e) for e in embedding]
    if len(set(emb)) != A.order or emb[0] != 0:
        raise NotCentralSubgroup("embedding must be injective and send 1 to 1")
    for a in range(A.order):
        for b in range(A.order):
            if emb[A.mul(a, b)] != G.mul(emb[a], emb[b]):
                raise NotCentralSubgroup("embedding is not a homomorphism")
    Z = set(grp.center(G))
    if not set(emb) <= Z:
        raise NotCentralSubgroup("image is not central")
    ident = grp.identity_perm(A.order)
    if any(f != ident for f in data_A.lam.values()):
        raise NotCentralSubgroup("central data must have lambda = id")
    Xt = extension_from_cocycle(data_A)
    XT, Y = Xt.total, Xt.base
    nA, nG = A.order, G.order
    # orbit of ((c, a), g) under z: ((c, a z), z^-1 g); arrows of X~ are c*nA + a
    rep = {}
    for c in range(Y.n_arrows):
        for a in range(nA):
            for g in range(nG):
                orbit = [(c * nA + A.mul(a, z), G.mul(G.inv(emb[z]), g)) for z in range(nA)]
                rep[(c * nA + a, g)] = min(orbit)
    reps = sorted(set(rep.values()))
    index = {r: k for k, r in enumerate(reps)}
    N = len(reps)
    comp = np.full((N, N), -1, dtype=np.int64)
    inv = np.zeros(N, dtype=np.int64)
    src = np.array([XT.src[x] for x, _ in reps], dtype=np.int64)
    tgt = np.array([XT.tgt[x] for x, _ in reps], dtype=np.int64)
    by_src: dict[int, list[int]] = {}
    for k, s in enumerate(src.tolist()):
        by_src.setdefault(s, []).append(k)
    for k, (x, g) in enumerate(reps):
        for l in by_src[int(tgt[k])]:
            y, h = reps[l]
            comp[k, l] = index[rep[(int(XT.comp[x, y]), G.mul(g, h))]]
        inv[k] = index[rep[(int(XT.inv[x]), G.inv(g))]]
    unit = np.array([index[rep[(int(XT.unit[m]), 0)]] for m in range(Y.n_objects)], dtype=np.int64)
    labels = [XT.arrows[x] + (g,) for x, g in reps]
    X = FiniteGroupoid(Y.objects, labels, src, tgt, unit, comp, inv, name=f"Ind({G.name})")
    phi = np.array([Xt.phi[x] for x, _ in reps], dtype=np.int64)
    chi = KernelTrivialization(np.array([[index[rep[(int(XT.unit[m]), g)]] for g in range(nG)] for m in range(Y.n_objects)], dtype=np.int64))
    rho = np.array([index[rep[(int(Xt.rho[y]), 0)]] for y in range(Y.n_arrows)], dtype=np.int64)
    cover = data_A.cover
    return GroupoidExtension(X, Y, phi, G, cover, chi, rho, None)


def central_cocycle(G: FiniteGroup, cover: CoverModel, g_sorted: Mapping, auts: AutStructure | None = None) -> NonAbelianCocycle:
    """lam = id data from Z(G)-values on sorted triangles (completed)."""
    return complete_cocycle(G, cover, {}, g_sorted, auts)


# random instances


def random_central_values(G: FiniteGroup, cover: CoverModel, rng: _random.Random, tries: int = 50) -> dict:
    """Random Z(G)-valued abelian cocycle on sorted triangles (per point in pointwise mode)."""
    Z = grp.center(G)
    tri = [k for k in cover.admissible(2) if k[0] < k[1] < k[2]]
    for _ in range(tries):
        vals = {k: rng.choice(Z) for k in tri}
        try:
            complete_cocycle(G, cover, {}, vals)
            return vals
        except NoCompletion:
            continue
    return {k: 0 for k in tri}


def random_cocycle(G: FiniteGroup, cover: CoverModel, rng: _random.Random, auts: AutStructure | None = None, outer: bool = True) -> NonAbelianCocycle:
    """A random valid cocycle: central part, automorphism gauge, inner twist.

    Edges lying in no triangle additionally get a random automorphism when
    ``outer`` is set, which may produce a non-trivializable band.
    """
    auts = auts or grp.automorphism_structure(G)
    base = central_cocycle(G, cover, random_central_values(G, cover, rng), auts)
    lam_s, g_s = base.sorted_part()
    in_triangle = {(k[a], k[b], k[3]) for k in cover.admissible(2) for a, b in ((0, 1), (0, 2), (1, 2))}
    if outer:
        for key in lam_s:
            if key not in in_triangle:
                lam_s[key] = rng.choice(auts.reps)
    data = complete_cocycle(G, cover, lam_s, g_s, auts)
    theta = {k: rng.choice(auts.reps) for k in data.vertex_keys()}
    data = gauge_by_automorphisms(data, theta)
    h_sorted = {k: rng.randrange(G.order) for k in data.lam if k[0] < k[1]}
    return twist_by_cochain(data, symmetric_cochain(data, h_sorted))
