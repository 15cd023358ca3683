"""Pullbacks, refinements, bitorsors and executable Morita-invariance checks."""

from __future__ import annotations

import random as _random
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import groups as grp
from .cohomology import GroupoidModule, groupoid_cohomology
from .errors import BitorsorError, MiddleMismatch, NotARefinement, NotMorita, NotSurjective
from .extensions import (
    GroupoidExtension,
    KernelTrivialization,
    NonAbelianCocycle,
    extension_from_cocycle,
    outer_action,
)
from .groupoids import (
    NERVE,
    POINTWISE,
    CoverModel,
    FiniteGroupoid,
    GroupoidMorphism,
    MoritaResult,
    cech_groupoid,
    identity_morphism,
    is_morita_morphism,
    pullback_groupoid,
)


@dataclass
class MoritaData:
    """Morphism of extensions E2 -> E: on totals, on bases, plus E2's trivialization.

    ``chi2`` is compatible: total(chi2[m][a]) == chi[obj(m)][a].
    """

    total: GroupoidMorphism
    base: GroupoidMorphism
    chi2: KernelTrivialization | None = None


# refinements


@dataclass(frozen=True)
class Refinement:
    coarse: CoverModel
    fine: CoverModel
    r: tuple[int, ...]

    def check(self) -> "Refinement":
        if self.fine.points != self.coarse.points:
            raise NotARefinement("fine and coarse covers must share the point set", ("points",))
        if len(self.r) != self.fine.n_sets:
            raise NotARefinement("map must have one entry per fine set", ("length",))
        for a, i in enumerate(self.r):
            if not 0 <= i < self.coarse.n_sets:
                raise NotARefinement(f"fine set {a} maps outside the coarse cover", (a,))
            extra = set(self.fine.sets[a]) - set(self.coarse.sets[i])
            if extra:
                p = min(extra)
                raise NotARefinement(f"point {p} of fine set {a} is not in coarse set {i}", (a, p))
        return self

    def is_object_surjective(self) -> bool:
        return all(any(self.r[a] == i and p in self.fine.sets[a] for a in range(self.fine.n_sets)) for p in range(self.coarse.points) for i in self.coarse.sets_at(p))


def refine_cocycle(data: NonAbelianCocycle, ref: Refinement) -> NonAbelianCocycle:
    """lam'_ab = lam_r(a)r(b), g'_abc = g_r(a)r(b)r(c) on the fine cover."""
    ref.check()
    fine = ref.fine.with_mode(data.mode)
    r = ref.r
    lam = {(a, b, p): data.lam[(r[a], r[b], p)] for (a, b, p) in fine.admissible(1)}
    g = {(a, b, c, p): data.g[(r[a], r[b], r[c], p)] for (a, b, c, p) in fine.admissible(2)}
    return NonAbelianCocycle(data.group, fine, lam, g, data._auts)


def refinement_extension(data: NonAbelianCocycle, ref: Refinement) -> tuple[GroupoidExtension, GroupoidExtension, MoritaData]:
    """Extensions over both covers and the comparison morphism fine -> coarse."""
    E = extension_from_cocycle(data)
    fdata = refine_cocycle(data, ref)
    E2 = extension_from_cocycle(fdata)
    r = ref.r
    obj = np.array([E.base.obj((p, r[a])) for (p, a) in E2.base.objects], dtype=np.int64)
    base_map = np.array([E.base.arrow((p, r[a], r[b])) for (p, a, b) in E2.base.arrows], dtype=np.int64)
    tot_map = np.array([E.total.arrow((p, r[a], r[b], x)) for (p, a, b, x) in E2.total.arrows], dtype=np.int64)
    md = MoritaData(
        GroupoidMorphism(E2.total, E.total, obj, tot_map).check(),
        GroupoidMorphism(E2.base, E.base, obj, base_map).check(),
        E2.chi,
    )
    return E, E2, md


def random_refinement(cover: CoverModel, rng: _random.Random, max_parts: int = 2, extra: int = 0) -> Refinement:
    """Split each set into up to ``max_parts`` covering pieces, plus a few extra subsets."""
    sets, r = [], []
    for i, U in enumerate(cover.sets):
        k = rng.randint(1, min(max_parts, len(U)))
        pts = list(U)
        rng.shuffle(pts)
        parts = [set() for _ in range(k)]
        for c, p in enumerate(pts):
            parts[c % k].add(p)
        for part in parts:
            if rng.random() < 0.15:
                part.add(rng.choice(U))
            sets.append(tuple(sorted(part)))
            r.append(i)
    for _ in range(rng.randint(0, extra)):
        i = rng.randrange(cover.n_sets)
        U = cover.sets[i]
        sets.append(tuple(sorted(rng.sample(U, rng.randint(1, len(U))))))
        r.append(i)
    order = sorted(range(len(sets)), key=lambda a: (sets[a], r[a]))
    fine = CoverModel(cover.points, tuple(sets[a] for a in order), cover.mode)
    return Refinement(cover, fine, tuple(r[a] for a in order)).check()


# pullbacks


def pullback_extension(E: GroupoidExtension, J: Sequence[int], labels=None) -> tuple[GroupoidExtension, MoritaData]:
    """Pull total and base back along J: P0 -> objects; kernel fibers are pulled back too."""
    X2, F = pullback_groupoid(E.total, J, labels)
    Y2, f = pullback_groupoid(E.base, J, labels)
    P = X2.objects
    phi = np.array([Y2.arrow((p, E.base.arrows[int(E.phi[x])], q)) for (p, _, q), x in zip(X2.arrows, F.arrow_map)], dtype=np.int64)
    J = np.asarray(J, dtype=np.int64)
    chi2 = None
    if E.chi is not None:
        chi2 = KernelTrivialization(np.array([[X2.arrow((P[p], E.total.arrows[int(E.chi.maps[J[p]][a])], P[p])) for a in range(E.group.order)] for p in range(len(J))], dtype=np.int64))
    E2 = GroupoidExtension(X2, Y2, phi, E.group, None, chi2, None, None)
    md = MoritaData(F, f, chi2)
    check_kernel_pullback(E, E2, md)
    return E2, md


def check_kernel_pullback(E: GroupoidExtension, E2: GroupoidExtension, md: MoritaData) -> bool:
    """Kernel of E2 at m maps isomorphically onto the kernel of E at obj(m)."""
    for m in range(E2.total.n_objects):
        K2 = E2.kernel_fiber(m)
        K = E.kernel_fiber(int(md.total.obj_map[m]))
        img = md.total.arrow_map[K2]
        if sorted(img.tolist()) != K.tolist():
            raise NotMorita(f"kernel at object {m} does not map onto the pulled-back kernel", (m,))
    return True


def pullback_along_refinement(E: GroupoidExtension, ref: Refinement) -> GroupoidExtension:
    """Pullback of E along (p, a) -> (p, r(a)), relabelled as an extension over the fine cover.

    The total arrows are put in the order used by extension_from_cocycle, so
    the canonical section and trivialization apply.
    """
    fine = ref.fine.with_mode(E.cover.mode)
    Yf = cech_groupoid(fine)
    J = [E.base.obj((p, ref.r[a])) for (p, a) in Yf.objects]
    E2, md = pullback_extension(E, J, Yf.objects)
    X2, n = E2.total, E.group.order
    # relabel ((p,a), (p,i,j,x), (p,b)) -> (p, a, b, x)
    new_index = np.zeros(X2.n_arrows, dtype=np.int64)
    for k, (P, xl, Q) in enumerate(X2.arrows):
        p, a = P
        _, b = Q
        new_index[k] = Yf.arrow((p, a, b)) * n + xl[3]
    order = np.argsort(new_index)
    pos = np.empty_like(order)
    pos[order] = np.arange(len(order))
    comp = np.where(X2.comp >= 0, pos[np.where(X2.comp >= 0, X2.comp, 0)], -1)[np.ix_(order, order)]
    labels = [Yf.arrows[int(new_index[k]) // n] + (int(new_index[k]) % n,) for k in order]
    X = FiniteGroupoid(Yf.objects, labels, X2.src[order], X2.tgt[order], pos[X2.unit], comp, pos[X2.inv[order]], name=X2.name)
    phi = np.repeat(np.arange(Yf.n_arrows), n)
    chi = KernelTrivialization(pos[E2.chi.maps])
    rho = np.arange(Yf.n_arrows) * n
    return GroupoidExtension(X, Yf, phi, E.group, fine, chi, rho, None)


# Morita checks


@dataclass
class CheckResult:
    ok: bool
    witness: object = None
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok


def _require_morita(md: MoritaData):
    res = is_morita_morphism(md.base)
    if not res:
        raise NotMorita(f"base morphism is not Morita: {res.reason}", res.witness)
    res = is_morita_morphism(md.total)
    if not res:
        raise NotMorita(f"total morphism is not Morita: {res.reason}", res.witness)


def check_band_morita(E: GroupoidExtension, E2: GroupoidExtension, md: MoritaData, band2: dict | None = None, auts=None) -> CheckResult:
    """Band of E2 equals the pullback of the band of E, arrow by arrow.

    Bands are read as outer actions relative to E.chi and md.chi2; ``band2``
    may replace the computed band of E2 (used to test corrupted data).
    """
    _require_morita(md)
    auts = auts or grp.automorphism_structure(E.group)
    b = outer_action(E, E.chi, auts)
    b2 = band2 if band2 is not None else outer_action(E2, md.chi2 or E2.chi, auts)
    for y in range(E2.base.n_arrows):
        if b2[y] != b[int(md.base.arrow_map[y])]:
            return CheckResult(False, E2.base.arrows[y], {"expected": b[int(md.base.arrow_map[y])], "found": b2[y]})
    return CheckResult(True)


def check_cohomology_morita(E: GroupoidExtension, E2: GroupoidExtension, md: MoritaData, module: str = "trivial", modulus: int | None = None, degrees: Sequence[int] = (0, 1, 2), side: str = "right") -> CheckResult:
    """Right-complex cohomology of the totals agrees in every listed degree.

    ``module`` is "trivial" (rank 1) or "adjoint" (permutation module on
    kernel fibers); the module on E2 is the pullback along the total morphism.
    """
    _require_morita(md)
    X = E.total
    if module == "trivial":
        M = GroupoidModule.trivial(X, 1, modulus)
    elif module == "adjoint":
        M = GroupoidModule.adjoint(X, [E.kernel_fiber(m).tolist() for m in range(X.n_objects)], modulus)
    else:
        raise ValueError("module must be 'trivial' or 'adjoint'")
    M2 = M.pullback(md.total)
    out = {}
    for n in degrees:
        h, h2 = groupoid_cohomology(M, n, side), groupoid_cohomology(M2, n, side)
        out[n] = (str(h), str(h2))
        if str(h) != str(h2):
            return CheckResult(False, n, out)
    return CheckResult(True, None, out)


# bitorsors


class Bitorsor:
    """Carrier B with a left action of L and a right action of R.

    left[x, b] = x.b, defined when tgt(x) == jl[b], with jl[x.b] == src(x);
    right[b, y] = b.y, defined when jr[b] == src(y), with jr[b.y] == tgt(y).
    Undefined entries hold -1.
    """

    def __init__(self, L: FiniteGroupoid, R: FiniteGroupoid, labels, jl, jr, left, right):
        self.L, self.R = L, R
        self.labels = list(labels)
        self.jl = np.asarray(jl, dtype=np.int64)
        self.jr = np.asarray(jr, dtype=np.int64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)

    @property
    def size(self) -> int:
        return len(self.labels)

    def check(self) -> "Bitorsor":
        """Actions, commutation, and both torsor conditions, exhaustively."""
        L, R, N = self.L, self.R, self.size
        for x in range(L.n_arrows):
            for b in range(N):
                v = self.left[x, b]
                if (L.tgt[x] == self.jl[b]) != (v >= 0):
                    raise BitorsorError("left action defined on the wrong pairs", (x, b))
                if v >= 0 and (self.jl[v] != L.src[x] or self.jr[v] != self.jr[b]):
                    raise BitorsorError("left action moves the wrong anchors", (x, b))
        for b in range(N):
            for y in range(R.n_arrows):
                v = self.right[b, y]
                if (R.src[y] == self.jr[b]) != (v >= 0):
                    raise BitorsorError("right action defined on the wrong pairs", (b, y))
                if v >= 0 and (self.jr[v] != R.tgt[y] or self.jl[v] != self.jl[b]):
                    raise BitorsorError("right action moves the wrong anchors", (b, y))
        for b in range(N):
            if self.left[L.unit[self.jl[b]], b] != b or self.right[b, R.unit[self.jr[b]]] != b:
                raise BitorsorError("units do not act trivially", (b,))
        for x, x2 in zip(*np.nonzero(L.comp >= 0)):
            for b in np.nonzero(self.jl == L.tgt[x2])[0]:
                if self.left[L.comp[x, x2], b] != self.left[x, self.left[x2, b]]:
                    raise BitorsorError("left action not associative", (int(x), int(x2), int(b)))
        for y, y2 in zip(*np.nonzero(R.comp >= 0)):
            for b in np.nonzero(self.jr == R.src[y])[0]:
                if self.right[b, R.comp[y, y2]] != self.right[self.right[b, y], y2]:
                    raise BitorsorError("right action not associative", (int(b), int(y), int(y2)))
        for b in range(N):
            for x in np.nonzero(L.tgt == self.jl[b])[0]:
                xb = self.left[x, b]
                for y in np.nonzero(R.src == self.jr[b])[0]:
                    if self.right[xb, y] != self.left[x, self.right[b, y]]:
                        raise BitorsorError("actions do not commute", (int(x), b, int(y)))
        if set(self.jr.tolist()) != set(range(R.n_objects)) or set(self.jl.tolist()) != set(range(L.n_objects)):
            raise BitorsorError("moment maps are not surjective")
        for b in range(N):
            for b2 in range(N):
                if self.jr[b] == self.jr[b2]:
                    xs = [x for x in np.nonzero(L.tgt == self.jl[b2])[0] if self.left[x, b2] == b]
                    if len(xs) != 1:
                        raise BitorsorError("left action not free and transitive on fibers", (b, b2))
                if self.jl[b] == self.jl[b2]:
                    ys = [y for y in np.nonzero(R.src == self.jr[b])[0] if self.right[b, y] == b2]
                    if len(ys) != 1:
                        raise BitorsorError("right action not free and transitive on fibers", (b, b2))
        return self


def identity_bitorsor(G: FiniteGroupoid) -> Bitorsor:
    n = G.n_arrows
    return Bitorsor(G, G, G.arrows, G.src, G.tgt, G.comp, G.comp)


def bitorsor_from_morphism(f: GroupoidMorphism) -> Bitorsor:
    """B_f = {(p, y) : f(p) = src(y)} with x.(p, y) = (src x, f(x) y) and (p, y).z = (p, y z)."""
    S, T = f.source, f.target
    carrier = [(p, y) for p in range(S.n_objects) for y in T.arrows_from(int(f.obj_map[p])).tolist()]
    idx = {c: k for k, c in enumerate(carrier)}
    N = len(carrier)
    left = np.full((S.n_arrows, N), -1, dtype=np.int64)
    right = np.full((N, T.n_arrows), -1, dtype=np.int64)
    for k, (p, y) in enumerate(carrier):
        for x in np.nonzero(S.tgt == p)[0].tolist():
            left[x, k] = idx[(int(S.src[x]), int(T.comp[f.arrow_map[x], y]))]
        for z in T.arrows_from(int(T.tgt[y])).tolist():
            right[k, z] = idx[(p, int(T.comp[y, z]))]
    labels = [(S.objects[p], T.arrows[y]) for p, y in carrier]
    return Bitorsor(S, T, labels, [p for p, _ in carrier], [int(T.tgt[y]) for _, y in carrier], left, right)


def inverse_bitorsor(B: Bitorsor) -> Bitorsor:
    """Same carrier, y.b := b.y^-1 and b.x := x^-1.b."""
    N = B.size
    left = np.full((B.R.n_arrows, N), -1, dtype=np.int64)
    right = np.full((N, B.L.n_arrows), -1, dtype=np.int64)
    for b in range(N):
        for y in range(B.R.n_arrows):
            left[y, b] = B.right[b, B.R.inv[y]]
        for x in range(B.L.n_arrows):
            right[b, x] = B.left[B.L.inv[x], b]
    return Bitorsor(B.R, B.L, B.labels, B.jr, B.jl, left, right)


def _same_groupoid(A: FiniteGroupoid, B: FiniteGroupoid) -> bool:
    return A is B or (A.arrows == B.arrows and A.objects == B.objects and np.array_equal(A.comp, B.comp))


def compose_bitorsors(B1: Bitorsor, B2: Bitorsor) -> Bitorsor:
    """(B1 x_M B2) / M with (b1.x, b2) ~ (b1, x.b2); left action from B1, right from B2."""
    if not _same_groupoid(B1.R, B2.L):
        raise MiddleMismatch("right groupoid of the first bitorsor must be the left groupoid of the second")
    M = B1.R
    pairs = [(b1, b2) for b1 in range(B1.size) for b2 in range(B2.size) if B1.jr[b1] == B2.jl[b2]]
    rep = {}
    for b1, b2 in pairs:
        if (b1, b2) in rep:
            continue
        orbit = [(int(B1.right[b1, x]), int(B2.left[M.inv[x], b2])) for x in M.arrows_from(int(B1.jr[b1])).tolist()]
        r = min(orbit)
        for o in orbit:
            rep[o] = r
    reps = sorted(set(rep.values()))
    idx = {r: k for k, r in enumerate(reps)}
    N = len(reps)
    left = np.full((B1.L.n_arrows, N), -1, dtype=np.int64)
    right = np.full((N, B2.R.n_arrows), -1, dtype=np.int64)
    for k, (b1, b2) in enumerate(reps):
        for x in np.nonzero(B1.left[:, b1] >= 0)[0].tolist():
            left[x, k] = idx[rep[(int(B1.left[x, b1]), b2)]]
        for y in np.nonzero(B2.right[b2] >= 0)[0].tolist():
            right[k, y] = idx[rep[(b1, int(B2.right[b2, y]))]]
    labels = [(B1.labels[b1], B2.labels[b2]) for b1, b2 in reps]
    return Bitorsor(B1.L, B2.R, labels, [B1.jl[b1] for b1, _ in reps], [B2.jr[b2] for _, b2 in reps], left, right)


def bitorsor_isomorphism(B: Bitorsor, C: Bitorsor, max_size: int = 64) -> np.ndarray | None:
    """An equivariant bijection B -> C by exhaustive search, or None."""
    if B.size > max_size or C.size > max_size:
        raise BitorsorError(f"carriers larger than {max_size} are not searched")
    if B.size != C.size or not (_same_groupoid(B.L, C.L) and _same_groupoid(B.R, C.R)):
        return None
    N = B.size
    L, R = B.L, B.R

    def neighbours(T: Bitorsor, b):
        for x in np.nonzero(T.left[:, b] >= 0)[0].tolist():
            yield ("l", x), int(T.left[x, b])
        for y in np.nonzero(T.right[b] >= 0)[0].tolist():
            yield ("r", y), int(T.right[b, y])

    def extend(f: dict, b: int, c: int) -> dict | None:
        f = dict(f)
        f[b] = c
        queue = deque([b])
        while queue:
            u = queue.popleft()
            cu = f[u]
            if B.jl[u] != C.jl[cu] or B.jr[u] != C.jr[cu]:
                return None
            for (kind, a), v in neighbours(B, u):
                w = int(C.left[a, cu]) if kind == "l" else int(C.right[cu, a])
                if w < 0:
                    return None
                if v in f:
                    if f[v] != w:
                        return None
                else:
                    f[v] = w
                    queue.append(v)
        if len(set(f.values())) != len(f):
            return None
        return f

    def search(f: dict) -> dict | None:
        free = [b for b in range(N) if b not in f]
        if not free:
            return f
        b = free[0]
        used = set(f.values())
        for c in range(N):
            if c in used or B.jl[b] != C.jl[c] or B.jr[b] != C.jr[c]:
                continue
            g = extend(f, b, c)
            if g is not None:
                out = search(g)
                if out is not None:
                    return out
        return None

    f = search({})
    return None if f is None else np.array([f[b] for b in range(N)], dtype=np.int64)


def kernel_orbits(B: Bitorsor, kernel_left: Sequence[int], kernel_right: Sequence[int]) -> tuple[list, list]:
    """Partitions of the carrier into orbits of the left and right kernel actions."""

    def parts(act) -> list:
        seen, out = set(), []
        for b in range(B.size):
            if b in seen:
                continue
            orb = sorted(act(b))
            seen.update(orb)
            out.append(tuple(orb))
        return sorted(out)

    kl = list(kernel_left)
    kr = list(kernel_right)
    left = parts(lambda b: {b} | {int(B.left[x, b]) for x in kl if B.left[x, b] >= 0})
    right = parts(lambda b: {b} | {int(B.right[b, y]) for y in kr if B.right[b, y] >= 0})
    return left, right


def kernel_orbits_coincide(B: Bitorsor, E_left: GroupoidExtension, E_right: GroupoidExtension) -> CheckResult:
    KL = [int(a) for m in range(E_left.total.n_objects) for a in E_left.kernel_fiber(m)]
    KR = [int(a) for m in range(E_right.total.n_objects) for a in E_right.kernel_fiber(m)]
    left, right = kernel_orbits(B, KL, KR)
    if left != right:
        diff = sorted(set(left) ^ set(right))
        return CheckResult(False, diff[0])
    return CheckResult(True)


@dataclass
class ExtensionBitorsor:
    """Bitorsor between the total groupoids of two extensions (left acts on the carrier first)."""

    bitorsor: Bitorsor
    left: GroupoidExtension
    right: GroupoidExtension

    def check(self) -> "ExtensionBitorsor":
        self.bitorsor.check()
        res = kernel_orbits_coincide(self.bitorsor, self.left, self.right)
        if not res:
            raise BitorsorError("kernel orbits of the two sides differ", res.witness)
        return self

    def orbits(self) -> list:
        KL = [int(a) for m in range(self.left.total.n_objects) for a in self.left.kernel_fiber(m)]
        return kernel_orbits(self.bitorsor, KL, [])[0]


def extension_bitorsor(md: MoritaData, E_source: GroupoidExtension, E_target: GroupoidExtension) -> ExtensionBitorsor:
    return ExtensionBitorsor(bitorsor_from_morphism(md.total), E_source, E_target)


def compose_extension_bitorsors(A: ExtensionBitorsor, B: ExtensionBitorsor) -> ExtensionBitorsor:
    return ExtensionBitorsor(compose_bitorsors(A.bitorsor, B.bitorsor), A.left, B.right)


def inverse_extension_bitorsor(A: ExtensionBitorsor) -> ExtensionBitorsor:
    return ExtensionBitorsor(inverse_bitorsor(A.bitorsor), A.right, A.left)
