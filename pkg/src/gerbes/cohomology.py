"""Čech cohomology of nerves, bound gerbe classification, groupoid cohomology."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import groups as grp
from . import linalg
from .errors import SizeBound
from .groupoids import (
    ComposableTuples,
    FiniteGroupoid,
    GroupoidMorphism,
    Nerve,
    connected_components,
    face,
    nerve_tuples,
    one_object,
    restrict,
)
from .groups import FiniteGroup, GroupCohomology, GroupModule
from .linalg import AbelianGroup

DEFAULT_ENUM_LIMIT = 10**6


# Čech complex of a nerve


@dataclass
class IntComplex:
    dims: list[int]
    diffs: list[list[list[int]]]  # diffs[k] : C^k -> C^{k+1}, shape dims[k+1] x dims[k]

    def is_complex(self) -> bool:
        for k in range(len(self.diffs) - 1):
            if not linalg.matmul_is_zero(self.diffs[k + 1], self.diffs[k]):
                return False
        return True


def cech_complex(nerve: Nerve) -> IntComplex:
    """Alternating-sum differential on functions of sorted simplices, degrees 0..3."""
    simp = [list(nerve.dim(k)) for k in range(4)]
    dims = [len(s) for s in simp]
    diffs = []
    for k in range(3):
        idx = {s: c for c, s in enumerate(simp[k])}
        D = [[0] * dims[k] for _ in range(dims[k + 1])]
        for r, s in enumerate(simp[k + 1]):
            for i in range(len(s)):
                D[r][idx[s[:i] + s[i + 1 :]]] += (-1) ** i
        diffs.append(D)
    return IntComplex(dims, diffs)


def _diff(C: IntComplex, k: int):
    """d^k as a matrix, or None when one side is zero-dimensional."""
    if k < 0 or k >= len(C.diffs):
        return None
    return C.diffs[k]


def cech_cohomology(nerve: Nerve, coeff: Sequence[int], k: int) -> AbelianGroup:
    """H^k(nerve; A) for A = sum of Z/a (a = 0 meaning Z), from integer Smith forms.

    With e the invariant factors of d^{k-1}, f those of d^k and c = dim C^k:
    H^k(Z)   = Z^(c - r - s) + sum Z/e,
    H^k(Z/m) = (Z/m)^(c - r - s) + sum Z/gcd(e, m) + sum Z/gcd(f, m).
    """
    if not 0 <= k <= 3:
        raise ValueError("degree must be in 0..3")
    C = cech_complex(nerve)
    c = C.dims[k]
    e = linalg.invariant_factors(_diff(C, k - 1)) if k >= 1 and C.dims[k - 1] and c else []
    f = linalg.invariant_factors(_diff(C, k)) if k < 3 and C.dims[k + 1] and c else []
    free = c - len(e) - len(f)
    parts = []
    for a in coeff:
        a = int(a)
        if a == 0:
            parts += [0] * free + [x for x in e if x > 1]
        else:
            parts += [a] * free + [math.gcd(x, a) for x in e] + [math.gcd(x, a) for x in f]
    return AbelianGroup.from_cyclic([x for x in parts if x != 1])


def cech_cohomology_bruteforce(nerve: Nerve, m: int, k: int) -> AbelianGroup:
    """Oracle: enumerate all Z/m cochains, cocycles and coboundaries."""
    C = cech_complex(nerve)
    c = C.dims[k]
    if m ** c > 10**6:
        raise SizeBound("too many cochains to enumerate")
    dk = _diff(C, k) if k < 3 else None
    dprev = _diff(C, k - 1) if k >= 1 else None
    cochains = _all_vectors(m, c)
    if dk is not None and C.dims[k + 1]:
        cocycles = cochains[~np.any((cochains @ np.array(dk, dtype=np.int64).reshape(C.dims[k + 1], c).T) % m, axis=1)]
    else:
        cocycles = cochains
    if dprev is not None and C.dims[k - 1]:
        pre = _all_vectors(m, C.dims[k - 1])
        bounds = np.unique((pre @ np.array(dprev, dtype=np.int64).reshape(c, C.dims[k - 1]).T) % m, axis=0)
    else:
        bounds = np.zeros((1, c), dtype=np.int64)
    return _finite_quotient(cocycles, bounds, m)


def _all_vectors(m: int, c: int) -> np.ndarray:
    rows = list(itertools.product(range(m), repeat=c))
    return np.array(rows, dtype=np.int64).reshape(len(rows), c)


def _finite_quotient(Zs: np.ndarray, Bs: np.ndarray, m: int) -> AbelianGroup:
    """Isomorphism type of Z/B from counts of elements killed by each divisor."""
    Bset = {tuple(b) for b in Bs.tolist()}
    order = len(Zs) // len(Bset)
    counts = {}
    for d in range(1, m + 1):
        if m % d == 0:
            killed = sum(1 for z in Zs.tolist() if tuple((d * x) % m for x in z) in Bset)
            counts[d] = killed // len(Bset)
    return _group_from_kernel_counts(order, counts)


def _group_from_kernel_counts(order: int, counts: Mapping[int, int]) -> AbelianGroup:
    """Invariant factors of a finite abelian group from |A[d]| for d | exponent."""
    factors = []
    for p in _primes(order):
        # a_k = number of cyclic p-parts of order >= p^k
        logs = [0]
        k = 1
        while True:
            d = p**k
            if d not in counts:
                break
            logs.append(round(math.log(counts[d], p)))
            k += 1
        ge = [logs[i] - logs[i - 1] for i in range(1, len(logs))]
        ge.append(0)
        for i in range(len(ge) - 1):
            factors += [p ** (i + 1)] * (ge[i] - ge[i + 1])
    return AbelianGroup.from_cyclic(factors)


def _primes(n: int) -> list[int]:
    return sorted(linalg._factorize(n)) if n > 1 else []


def abelian_invariants(G: FiniteGroup, elements: Sequence[int]) -> list[int]:
    """Cyclic decomposition (invariant factors) of an abelian subgroup."""
    els = list(elements)
    exp = math.lcm(*[G.element_order(x) for x in els]) if els else 1
    counts = {}
    for d in range(1, exp + 1):
        if exp % d == 0:
            counts[d] = sum(1 for x in els if G.power(x, d) == 0)
    return list(_group_from_kernel_counts(len(els), counts).torsion)


# bound gerbes


@dataclass
class GerbeClassification:
    center: list[int]
    center_factors: list[int]
    h2: AbelianGroup
    count: int
    representatives: list[tuple[int, ...]] | None
    triangles: list[tuple[int, ...]]
    enumerated: bool = True


def _central_coboundaries(nerve: Nerve, G: FiniteGroup, Z: list[int], limit: int) -> set[tuple[int, ...]]:
    edges = list(nerve.dim(1))
    tris = list(nerve.dim(2))
    if len(Z) ** len(edges) > limit:
        raise SizeBound(f"{len(Z)}^{len(edges)} central 1-cochains exceed limit {limit}")
    eidx = {e: c for c, e in enumerate(edges)}
    out = set()
    for h in itertools.product(Z, repeat=len(edges)):
        out.add(tuple(G.product(h[eidx[(j, k)]], G.inv(h[eidx[(i, k)]]), h[eidx[(i, j)]]) for (i, j, k) in tris))
    return out


def central_cocycles(nerve: Nerve, G: FiniteGroup, Z: list[int] | None = None, limit: int = DEFAULT_ENUM_LIMIT) -> list[tuple[int, ...]]:
    """All g on sorted triangles with g_ijl g_jkl = g_ikl g_ijk on sorted 3-simplices."""
    Z = grp.center(G) if Z is None else Z
    tris = list(nerve.dim(2))
    if len(Z) ** len(tris) > limit:
        raise SizeBound(f"{len(Z)}^{len(tris)} central 2-cochains exceed limit {limit}")
    tidx = {t: c for c, t in enumerate(tris)}
    out = []
    for g in itertools.product(Z, repeat=len(tris)):
        if all(
            G.mul(g[tidx[(i, j, l)]], g[tidx[(j, k, l)]]) == G.mul(g[tidx[(i, k, l)]], g[tidx[(i, j, k)]])
            for (i, j, k, l) in nerve.dim(3)
        ):
            out.append(g)
    return out


def canonical_representative(nerve: Nerve, G: FiniteGroup, g: Sequence[int] | Mapping, limit: int = DEFAULT_ENUM_LIMIT) -> tuple[int, ...]:
    """Lexicographically least cocycle in the coboundary orbit of g.

    ``g`` is a tuple over sorted triangles or a mapping keyed by (i, j, k[, p]).
    """
    tris = list(nerve.dim(2))
    if isinstance(g, Mapping):
        g = tuple(int(_lookup_triangle(g, t)) for t in tris)
    B = _central_coboundaries(nerve, G, grp.center(G), limit)
    return min(tuple(G.mul(a, b) for a, b in zip(g, cb)) for cb in B)


def _lookup_triangle(g: Mapping, t: tuple):
    for key in (t, t + (None,)):
        if key in g:
            return g[key]
    raise KeyError(t)


def classify_bound_gerbes(nerve: Nerve, G: FiniteGroup, limit: int = DEFAULT_ENUM_LIMIT, strict: bool = False) -> GerbeClassification:
    """Classes of lam = id cocycles with values in Z(G) modulo central coboundaries.

    Beyond ``limit`` the count comes from H^2 alone (representatives None),
    or SizeBound is raised when ``strict``.
    """
    Z = grp.center(G)
    factors = abelian_invariants(G, Z)
    h2 = cech_cohomology(nerve, factors or [1], 2)
    tris = list(nerve.dim(2))
    try:
        cocycles = central_cocycles(nerve, G, Z, limit)
        B = sorted(_central_coboundaries(nerve, G, Z, limit))
    except SizeBound:
        if strict:
            raise
        return GerbeClassification(Z, factors, h2, h2.order, None, tris, enumerated=False)
    seen: set = set()
    reps = []
    for g in cocycles:  # product order is lexicographic, so the first of each orbit is least
        if g in seen:
            continue
        reps.append(g)
        seen.update(tuple(G.mul(a, b) for a, b in zip(g, cb)) for cb in B)
    return GerbeClassification(Z, factors, h2, len(reps), reps, tris)


# groupoid modules and differentials


class GroupoidModule:
    """Fibers V_o (rank per object) with act(x): V_tgt(x) -> V_src(x).

    Matrices are lists of rows; entries are Fractions over Q or ints mod m.
    """

    def __init__(self, base: FiniteGroupoid, ranks: Sequence[int], act: Sequence, modulus: int | None = None, name: str = ""):
        self.base = base
        self.ranks = [int(r) for r in ranks]
        self.modulus = modulus
        self.name = name
        mats = [[[Fraction(v) for v in row] for row in np.asarray(A, dtype=object).tolist()] for A in act]
        self.integral = modulus is not None or all(v.denominator == 1 for A in mats for row in A for v in row)
        dtype = np.int64 if self.integral else object
        conv = (lambda v: int(v) % modulus) if modulus else (int if self.integral else (lambda v: v))
        self.act = [
            np.array([[conv(v) for v in row] for row in A], dtype=dtype).reshape(self.ranks[base.src[x]], self.ranks[base.tgt[x]])
            for x, A in enumerate(mats)
        ]

    @property
    def coefficient(self) -> str:
        return f"Z/{self.modulus}" if self.modulus else "Q"

    def _mm(self, A, B):
        P = A.dot(B)
        return P % self.modulus if self.modulus else P

    def check(self) -> bool:
        """Units act trivially and act(x y) = act(x) act(y) on composable pairs."""
        G = self.base
        for o in range(G.n_objects):
            if not np.array_equal(self.act[G.unit[o]], np.eye(self.ranks[o], dtype=int)):
                return False
        xs, ys = np.nonzero(G.comp >= 0)
        for x, y in zip(xs.tolist(), ys.tolist()):
            if not np.array_equal(self.act[G.comp[x, y]], self._mm(self.act[x], self.act[y])):
                return False
        return True

    def inverse_act(self, x: int):
        return self.act[int(self.base.inv[x])]

    @classmethod
    def trivial(cls, G: FiniteGroupoid, rank: int = 1, modulus: int | None = None):
        eye = np.eye(rank, dtype=int).tolist()
        return cls(G, [rank] * G.n_objects, [eye] * G.n_arrows, modulus, name="trivial")

    @classmethod
    def from_group_module(cls, M: GroupModule):
        B = one_object(M.group)
        return cls(B, [M.rank], [M.action[g] for g in range(M.group.order)], M.modulus, name=M.name)

    @classmethod
    def adjoint(cls, G: FiniteGroupoid, kernel_fibers: Sequence[Sequence[int]], modulus: int | None = None):
        """Permutation module on kernel fibers by conjugation k -> x k x^-1."""
        pos = [{k: c for c, k in enumerate(K)} for K in kernel_fibers]
        act = []
        for x in range(G.n_arrows):
            s, t = int(G.src[x]), int(G.tgt[x])
            A = [[0] * len(kernel_fibers[t]) for _ in range(len(kernel_fibers[s]))]
            xi = int(G.inv[x])
            for c, k in enumerate(kernel_fibers[t]):
                A[pos[s][int(G.comp[G.comp[x, k], xi])]][c] = 1
            act.append(A)
        return cls(G, [len(K) for K in kernel_fibers], act, modulus, name="adjoint")

    def pullback(self, f: GroupoidMorphism) -> "GroupoidModule":
        return GroupoidModule(f.source, [self.ranks[o] for o in f.obj_map], [self.act[y] for y in f.arrow_map], self.modulus, name=f"pullback({self.name})")

    def restrict(self, sub: FiniteGroupoid, objs: Sequence[int], arrows: Sequence[int]) -> "GroupoidModule":
        return GroupoidModule(sub, [self.ranks[o] for o in sorted(objs)], [self.act[a] for a in arrows], self.modulus, name=self.name)


def _offsets(mod: GroupoidModule, anchors: np.ndarray) -> np.ndarray:
    r = np.asarray(mod.ranks, dtype=np.int64)[anchors]
    return np.concatenate([[0], np.cumsum(r)])


def _differential(mod: GroupoidModule, n: int, side: str):
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if not 1 <= n <= 3:
        raise ValueError("differential degree must be in 1..3")
    G = mod.base
    Xs = [nerve_tuples(G, k) for k in (n - 1, n)]
    Xlow, Xn = Xs
    anc_low = Xlow.anchor_left() if side == "left" else Xlow.anchor_right()
    anc_n = Xn.anchor_left() if side == "left" else Xn.anchor_right()
    off_low, off_n = _offsets(mod, anc_low), _offsets(mod, anc_n)
    D = np.zeros((int(off_n[-1]), int(off_low[-1])), dtype=np.int64 if mod.integral else object)
    faces = [face(Xn, Xlow, i) for i in range(n + 1)]
    T = Xn.tuples
    for row in range(len(Xn)):
        r0 = int(off_n[row])
        rk = mod.ranks[int(anc_n[row])]
        for i in range(n + 1):
            col = int(faces[i][row])
            c0 = int(off_low[col])
            sign = -1 if i % 2 else 1
            if side == "left" and i == 0:
                A = mod.act[int(T[row, 0])]
                D[r0 : r0 + rk, c0 : c0 + A.shape[1]] += A
            elif side == "right" and i == n:
                A = mod.inverse_act(int(T[row, -1]))
                D[r0 : r0 + rk, c0 : c0 + A.shape[1]] += sign * A
            else:
                for t in range(rk):
                    D[r0 + t, c0 + t] += sign
    if mod.modulus:
        D = D % mod.modulus
    return D


def groupoid_differential_left(mod: GroupoidModule, n: int):
    """Matrix of C^{n-1} -> C^n: act(x_1) f(ε_0 x) + sum_{i>=1} (-1)^i f(ε_i x)."""
    return _differential(mod, n, "left")


def groupoid_differential_right(mod: GroupoidModule, n: int):
    """Matrix of C^{n-1} -> C^n: sum_{i<n} (-1)^i f(ε_i x) + (-1)^n act(x_n)^-1 f(ε_n x)."""
    return _differential(mod, n, "right")


def cochain_dim(mod: GroupoidModule, n: int, side: str) -> int:
    X = nerve_tuples(mod.base, n)
    anc = X.anchor_left() if side == "left" else X.anchor_right()
    return int(np.asarray(mod.ranks, dtype=np.int64)[anc].sum())


def groupoid_cohomology(mod: GroupoidModule, n: int, side: str = "right", limit: int = 4 * 10**7) -> GroupCohomology:
    """H^n of the left or right complex, n in 0..2, summed over components."""
    if not 0 <= n <= 2:
        raise ValueError("degree must be in 0..2")
    G = mod.base
    comps = connected_components(G)
    if len(comps) > 1:
        total = None
        for objs in comps:
            sub, arrows = restrict(G, objs)
            part = groupoid_cohomology(mod.restrict(sub, objs, arrows), n, side, limit)
            total = part if total is None else _add(total, part)
        return total
    dim = cochain_dim(mod, n, side)
    nxt = cochain_dim(mod, n + 1, side)
    if dim * nxt > limit:
        raise SizeBound(f"differential with {dim * nxt} entries exceeds limit {limit}")
    d_out = _differential(mod, n + 1, side)
    d_in = _differential(mod, n, side) if n >= 1 else None
    if mod.modulus is None:
        rk_in = linalg.rank(d_in) if d_in is not None and d_in.size else 0
        rk_out = linalg.rank(d_out) if d_out.size else 0
        return GroupCohomology(n, mod.coefficient, rank=dim - rk_out - rk_in)
    if _is_prime(mod.modulus):
        p = mod.modulus
        rk_in = linalg.rank_mod(d_in, p) if d_in is not None and d_in.size else 0
        rk_out = linalg.rank_mod(d_out, p) if d_out.size else 0
        return GroupCohomology(n, mod.coefficient, group=AbelianGroup.from_cyclic([p] * (dim - rk_in - rk_out)))
    factors = linalg.quotient_mod(d_in if d_in is not None and d_in.size else None, d_out if d_out.size else None, mod.modulus, dim)
    return GroupCohomology(n, mod.coefficient, group=AbelianGroup.from_cyclic(factors))


def _is_prime(m: int) -> bool:
    return m >= 2 and all(m % q for q in range(2, int(m**0.5) + 1))


def _add(a: GroupCohomology, b: GroupCohomology) -> GroupCohomology:
    if a.group is None:
        return GroupCohomology(a.degree, a.coefficient, rank=a.rank + b.rank)
    return GroupCohomology(a.degree, a.coefficient, group=a.group + b.group)


def differentials_square_to_zero(mod: GroupoidModule, side: str, max_n: int = 2) -> bool:
    for n in range(1, max_n + 1):
        A = _differential(mod, n, side)
        B = _differential(mod, n + 1, side)
        if A.size and B.size and not linalg.matmul_is_zero(B, A, mod.modulus):
            return False
    return True
