"""Finite groups given by multiplication tables.

Element 0 is always the identity.  Automorphisms are permutations of element
indices; ``compose(f, g)`` applies ``g`` first, then ``f``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from . import linalg
from .errors import BadIdentity, NoInverse, NonAssociative, NotAModule, OrderBound, SizeBound

DEFAULT_ORDER_BOUND = 24


class FiniteGroup:
    """A group on elements 0..n-1 with identity 0."""

    def __init__(self, table, name: str = "", labels: Sequence[Hashable] | None = None):
        self.table = np.asarray(table, dtype=np.int64)
        self.table.setflags(write=False)
        self.name = name
        self.labels = tuple(labels) if labels is not None else tuple(range(len(self.table)))
        inv = np.argmin(self.table, axis=1)  # 0 is the smallest index
        self.inverse = inv
        self.inverse.setflags(write=False)

    @property
    def order(self) -> int:
        return len(self.table)

    def __len__(self):
        return self.order

    def __iter__(self):
        return iter(range(self.order))

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def product(self, *xs: int) -> int:
        out = 0
        for x in xs:
            out = int(self.table[out, x])
        return out

    def power(self, a: int, k: int) -> int:
        out = 0
        for _ in range(k):
            out = int(self.table[out, a])
        return out

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = int(self.table[x, a])
            k += 1
        return k

    def is_abelian(self) -> bool:
        return bool((self.table == self.table.T).all())

    def subgroup_generated(self, gens: Iterable[int]) -> list[int]:
        gens = list(gens)
        seen = {0}
        frontier = [0]
        while frontier:
            nxt = []
            for x in frontier:
                for s in gens:
                    y = int(self.table[x, s])
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return sorted(seen)

    def generators(self) -> list[int]:
        """Greedy generating set: scan elements in index order."""
        gens: list[int] = []
        span = {0}
        for a in range(self.order):
            if a not in span:
                gens.append(a)
                span = set(self.subgroup_generated(gens))
        return gens

    def __eq__(self, other):
        return isinstance(other, FiniteGroup) and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash(self.table.tobytes())

    def __repr__(self):
        return f"FiniteGroup({self.name or '?'}, order={self.order})"


def group_violations(table) -> list[tuple]:
    """All violated axioms as tuples ("identity",), ("assoc", a, b, c), ("inverse", a)."""
    T = np.asarray(table)
    out: list[tuple] = []
    if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] == 0:
        return [("shape",)]
    n = T.shape[0]
    if T.min() < 0 or T.max() >= n:
        return [("range",)]
    ident = np.arange(n)
    if not (np.array_equal(T[0], ident) and np.array_equal(T[:, 0], ident)):
        out.append(("identity",))
    left = T[T[:, :, None], np.arange(n)[None, None, :]]  # (ab)c
    right = T[np.arange(n)[:, None, None], T[None, :, :]]  # a(bc)
    for a, b, c in zip(*np.nonzero(left != right)):
        out.append(("assoc", int(a), int(b), int(c)))
    for a in range(n):
        if not np.any((T[a] == 0) & (T[:, a] == 0)):
            out.append(("inverse", a))
    return out


def validate_group(table, name: str = "", labels=None) -> FiniteGroup:
    """Check the group axioms exhaustively and return the group."""
    violations = group_violations(table)
    if violations:
        first = violations[0]
        kind = first[0]
        if kind in ("identity", "shape", "range"):
            raise BadIdentity(f"bad identity/shape: {first}", violations)
        if kind == "assoc":
            raise NonAssociative(f"non-associative triple {first[1:]}", violations)
        raise NoInverse(f"element {first[1]} has no inverse", violations)
    return FiniteGroup(table, name=name, labels=labels)


def group_from_elements(elements: Sequence[Hashable], mul: Callable, name: str = "") -> FiniteGroup:
    """Build a table from a list of elements (identity first) and a product."""
    index = {e: i for i, e in enumerate(elements)}
    n = len(elements)
    table = [[index[mul(elements[a], elements[b])] for b in range(n)] for a in range(n)]
    return validate_group(table, name=name, labels=elements)


# standard groups


def cyclic(n: int) -> FiniteGroup:
    return FiniteGroup([[(a + b) % n for b in range(n)] for a in range(n)], name=f"Z{n}")


def symmetric(k: int) -> FiniteGroup:
    perms = sorted(itertools.permutations(range(k)))  # identity is lexicographically first
    return group_from_elements(perms, lambda p, q: tuple(p[q[i]] for i in range(k)), name=f"S{k}")


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of the n-gon; elements (s, r) meaning x -> s*x + r mod n, s = +-1."""
    elems = [(1, r) for r in range(n)] + [(-1, r) for r in range(n)]
    return group_from_elements(
        elems, lambda p, q: (p[0] * q[0], (p[0] * q[1] + p[1]) % n), name=f"D{n}"
    )


_QUAT = {  # unit products i*j = k etc as (sign, unit)
    ("1", "1"): (1, "1"), ("1", "i"): (1, "i"), ("1", "j"): (1, "j"), ("1", "k"): (1, "k"),
    ("i", "1"): (1, "i"), ("i", "i"): (-1, "1"), ("i", "j"): (1, "k"), ("i", "k"): (-1, "j"),
    ("j", "1"): (1, "j"), ("j", "i"): (-1, "k"), ("j", "j"): (-1, "1"), ("j", "k"): (1, "i"),
    ("k", "1"): (1, "k"), ("k", "i"): (1, "j"), ("k", "j"): (-1, "i"), ("k", "k"): (-1, "1"),
}


def quaternion() -> FiniteGroup:
    """Q8 with elements 1, -1, i, -i, j, -j, k, -k (indices 0..7)."""
    elems = [(s, u) for u in "1ijk" for s in (1, -1)]

    def mul(p, q):
        s, u = _QUAT[p[1], q[1]]
        return (p[0] * q[0] * s, u)

    return group_from_elements(elems, mul, name="Q8")


def klein() -> FiniteGroup:
    return direct_product(cyclic(2), cyclic(2), name="V4")


def direct_product(G: FiniteGroup, H: FiniteGroup, name: str = "") -> FiniteGroup:
    elems = [(a, b) for a in range(G.order) for b in range(H.order)]
    return group_from_elements(
        elems, lambda p, q: (G.mul(p[0], q[0]), H.mul(p[1], q[1])), name=name or f"{G.name}x{H.name}"
    )


BUILTIN = {
    "Z1": lambda: cyclic(1), "Z2": lambda: cyclic(2), "Z3": lambda: cyclic(3),
    "Z4": lambda: cyclic(4), "Z5": lambda: cyclic(5), "Z6": lambda: cyclic(6),
    "S3": lambda: symmetric(3), "S4": lambda: symmetric(4), "Q8": quaternion,
    "D4": lambda: dihedral(4), "V4": klein,
}


def builtin_group(name: str) -> FiniteGroup:
    try:
        return BUILTIN[name]()
    except KeyError:
        raise KeyError(f"unknown group {name!r}; known: {sorted(BUILTIN)}") from None


# center, conjugation, automorphisms


def center(G: FiniteGroup) -> list[int]:
    T = G.table
    return [z for z in range(G.order) if np.array_equal(T[z], T[:, z])]


def compose(f: Sequence[int], g: Sequence[int]) -> tuple[int, ...]:
    """f after g."""
    return tuple(f[x] for x in g)


def inverse_perm(f: Sequence[int]) -> tuple[int, ...]:
    out = [0] * len(f)
    for i, y in enumerate(f):
        out[y] = i
    return tuple(out)


def identity_perm(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def conjugation(G: FiniteGroup, g: int) -> tuple[int, ...]:
    """AD_g as a permutation: a -> g a g^-1."""
    gi = G.inv(g)
    return tuple(int(x) for x in G.table[G.table[g], gi])


def is_automorphism(G: FiniteGroup, perm: Sequence[int]) -> bool:
    p = np.asarray(perm)
    if sorted(perm) != list(range(G.order)) or p[0] != 0:
        return False
    return bool((p[G.table] == G.table[p[:, None], p[None, :]]).all())


def extend_homomorphism(G: FiniteGroup, gens: Sequence[int], images: Sequence, mul, unit):
    """Extend generator images to a homomorphism G -> target, or None.

    ``mul`` and ``unit`` describe the target.  The map is built by breadth
    first search over right multiplication by generators and every relation
    x*s met along the way is checked.
    """
    phi: dict[int, object] = {0: unit}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for s, img in zip(gens, images):
                y = G.mul(x, s)
                val = mul(phi[x], img)
                if y in phi:
                    if phi[y] != val:
                        return None
                else:
                    phi[y] = val
                    nxt.append(y)
        frontier = nxt
    if len(phi) != G.order:
        return None
    # every edge x -> x*s was checked once both ends were known
    for x in range(G.order):
        for s, img in zip(gens, images):
            if phi[G.mul(x, s)] != mul(phi[x], img):
                return None
    return [phi[x] for x in range(G.order)]


def enumerate_automorphisms(G: FiniteGroup, limit_order: int = DEFAULT_ORDER_BOUND) -> list[tuple[int, ...]]:
    """All automorphisms, sorted lexicographically, by generator-image backtracking."""
    if G.order > limit_order:
        raise OrderBound(f"|G| = {G.order} exceeds automorphism search bound {limit_order}")
    gens = G.generators()
    orders = [G.element_order(x) for x in range(G.order)]
    candidates = [[y for y in range(G.order) if orders[y] == orders[s]] for s in gens]
    found = []

    def partial_ok(k: int, images: list[int]) -> bool:
        # the assignment restricted to the first k generators must extend on their span
        sub = G.subgroup_generated(gens[:k])
        phi = {0: 0}
        frontier = [0]
        while frontier:
            nxt = []
            for x in frontier:
                for s, img in zip(gens[:k], images):
                    y, v = G.mul(x, s), G.mul(phi[x], img)
                    if y in phi:
                        if phi[y] != v:
                            return False
                    else:
                        phi[y] = v
                        nxt.append(y)
            frontier = nxt
        return len(set(phi.values())) == len(sub)

    def search(k: int, images: list[int]):
        if k == len(gens):
            perm = extend_homomorphism(G, gens, images, G.mul, 0)
            if perm is not None and len(set(perm)) == G.order:
                found.append(tuple(perm))
            return
        for y in candidates[k]:
            images.append(y)
            if partial_ok(k + 1, images):
                search(k + 1, images)
            images.pop()

    search(0, [])
    return sorted(found)


def enumerate_automorphisms_bruteforce(G: FiniteGroup) -> list[tuple[int, ...]]:
    """Oracle: test every bijection fixing 0.  Only for tiny groups."""
    out = []
    for rest in itertools.permutations(range(1, G.order)):
        perm = (0,) + rest
        if is_automorphism(G, perm):
            out.append(perm)
    return sorted(out)


@dataclass
class AutStructure:
    """Aut(G) with its inner subgroup and the quotient Out(G)."""

    group: FiniteGroup
    aut: FiniteGroup
    reps: list[tuple[int, ...]]
    inn: list[int]
    out: FiniteGroup
    proj: list[int]
    index: dict = field(repr=False, default_factory=dict)

    def aut_index(self, perm: Sequence[int]) -> int:
        return self.index[tuple(perm)]

    def out_of(self, perm: Sequence[int]) -> int:
        return self.proj[self.index[tuple(perm)]]

    def lift(self, o: int) -> tuple[int, ...]:
        """First automorphism (canonical order) in the coset o."""
        return self.reps[self.proj.index(o)]

    def conjugacy_class_out(self, o: int) -> tuple[int, ...]:
        O = self.out
        return tuple(sorted({O.product(x, o, O.inv(x)) for x in range(O.order)}))


def automorphism_structure(G: FiniteGroup, limit_order: int = DEFAULT_ORDER_BOUND) -> AutStructure:
    reps = enumerate_automorphisms(G, limit_order)
    index = {p: i for i, p in enumerate(reps)}
    table = [[index[compose(f, g)] for g in reps] for f in reps]
    aut = FiniteGroup(table, name=f"Aut({G.name})")
    inn = sorted({index[conjugation(G, g)] for g in range(G.order)})
    inn_set = set(inn)
    coset_of: dict[int, int] = {}
    cosets: list[int] = []
    for a in range(len(reps)):
        if a in coset_of:
            continue
        o = len(cosets)
        cosets.append(a)
        for h in inn:
            coset_of[aut.mul(a, h)] = o
    proj = [coset_of[a] for a in range(len(reps))]
    out_table = [[proj[aut.mul(cosets[x], cosets[y])] for y in range(len(cosets))] for x in range(len(cosets))]
    out = FiniteGroup(out_table, name=f"Out({G.name})")
    assert all(proj[h] == 0 for h in inn_set)
    return AutStructure(G, aut, reps, inn, out, proj, index)


# modules and low-degree cohomology


class GroupModule:
    """A rank-r module over Q (modulus None) or Z/m with a G-action.

    ``action[g]`` is an r x r matrix (tuple of rows); entries are Fractions
    over Q and ints in 0..m-1 over Z/m.
    """

    def __init__(self, group: FiniteGroup, rank: int, action, modulus: int | None = None, name: str = ""):
        if modulus is not None and modulus < 2:
            raise ValueError("modulus must be >= 2")
        self.group = group
        self.rank = rank
        self.modulus = modulus
        self.name = name
        norm = (lambda x: int(x) % modulus) if modulus else Fraction
        self.action = [tuple(tuple(norm(x) for x in row) for row in action[g]) for g in range(group.order)]
        self._check()

    def _mm(self, A, B):
        r = self.rank
        out = []
        for i in range(r):
            row = []
            for j in range(r):
                s = sum(A[i][k] * B[k][j] for k in range(r))
                row.append(s % self.modulus if self.modulus else s)
            out.append(tuple(row))
        return tuple(out)

    def _check(self):
        r = self.rank
        ident = tuple(tuple(int(i == j) for j in range(r)) for i in range(r))
        if self.action[0] != ident:
            raise NotAModule("identity must act trivially")
        G = self.group
        for g in range(G.order):
            for h in range(G.order):
                if self._mm(self.action[g], self.action[h]) != self.action[G.mul(g, h)]:
                    raise NotAModule(f"action(g h) != action(g) action(h) at g={g}, h={h}")

    def apply(self, g: int, v: Sequence) -> tuple:
        A = self.action[g]
        out = tuple(sum(A[i][k] * v[k] for k in range(self.rank)) for i in range(self.rank))
        return tuple(x % self.modulus for x in out) if self.modulus else out

    @property
    def coefficient(self) -> str:
        return f"Z/{self.modulus}" if self.modulus else "Q"

    def elements(self) -> list[tuple[int, ...]]:
        if not self.modulus:
            raise ValueError("rational module is infinite")
        return list(itertools.product(range(self.modulus), repeat=self.rank))

    @classmethod
    def trivial(cls, G: FiniteGroup, rank: int = 1, modulus: int | None = None):
        ident = tuple(tuple(int(i == j) for j in range(rank)) for i in range(rank))
        return cls(G, rank, [ident] * G.order, modulus, name="trivial")

    @classmethod
    def character(cls, G: FiniteGroup, values: Sequence[int], modulus: int | None = None, name="sign"):
        """Rank-1 module where g acts by the scalar values[g]."""
        return cls(G, 1, [((v,),) for v in values], modulus, name=name)


def sign_characters(G: FiniteGroup) -> list[list[int]]:
    """All homomorphisms G -> {+1, -1}, as value lists, sorted."""
    gens = G.generators()
    out = []
    for images in itertools.product((1, -1), repeat=len(gens)):
        vals = extend_homomorphism(G, gens, images, lambda a, b: a * b, 1)
        if vals is not None:
            out.append(vals)
    return sorted(out, reverse=True)


def bar_differential(M: GroupModule, n: int):
    """Matrix of d: C^n -> C^{n+1} of the inhomogeneous bar complex.

    C^n = maps G^n -> M, basis ordered by (tuple in lexicographic order,
    coordinate).  (df)(g1..g_{n+1}) = g1 f(g2..) + sum_i (-1)^i f(..g_i g_{i+1}..)
    + (-1)^{n+1} f(g1..g_n).
    """
    G, r = M.group, M.rank
    N = G.order
    rows = N ** (n + 1) * r
    cols = N**n * r
    D = [[0] * cols for _ in range(rows)]
    tuples = list(itertools.product(range(N), repeat=n + 1))

    def col(t, k):
        idx = 0
        for x in t:
            idx = idx * N + x
        return idx * r + k

    for ti, t in enumerate(tuples):
        for i in range(r):
            row = D[ti * r + i]
            A = M.action[t[0]]
            for k in range(r):
                if A[i][k]:
                    row[col(t[1:], k)] += A[i][k]
            for j in range(1, n + 1):
                face = t[: j - 1] + (G.mul(t[j - 1], t[j]),) + t[j + 1 :]
                row[col(face, i)] += (-1) ** j
            row[col(t[:-1], i)] += (-1) ** (n + 1)
    if M.modulus:
        D = [[x % M.modulus for x in row] for row in D]
    return D


def _cochain_to_map(M: GroupModule, vec) -> tuple[tuple, ...]:
    r = M.rank
    return tuple(tuple(vec[g * r + k] for k in range(r)) for g in range(M.group.order))


def _check_side(side: str):
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")


def is_z1(M: GroupModule, F, side: str = "left") -> bool:
    """Left: F(gh) = F(g) + g F(h).  Right: F(gh) = h^-1 F(g) + F(h)."""
    _check_side(side)
    G = M.group
    m = M.modulus
    for g in range(G.order):
        for h in range(G.order):
            if side == "left":
                rhs = [a + b for a, b in zip(F[g], M.apply(g, F[h]))]
            else:
                rhs = [a + b for a, b in zip(M.apply(G.inv(h), F[g]), F[h])]
            if m:
                rhs = [x % m for x in rhs]
            if tuple(rhs) != tuple(F[G.mul(g, h)]):
                return False
    return True


def z1_cocycles(M: GroupModule, side: str = "left") -> list[tuple[tuple, ...]]:
    """Z^1(G, M): a canonical basis over Q, every cocycle (sorted) over Z/m."""
    _check_side(side)
    G = M.group
    if M.rank == 0:
        return [tuple(() for _ in range(G.order))]
    if not M.modulus:
        eqs = _z1_equations(M, side)
        return [_cochain_to_map(M, v) for v in linalg.nullspace(eqs, ncols=G.order * M.rank)]
    # a cocycle is determined by its values on generators
    gens = G.generators()
    elems = M.elements()
    out = []
    for images in itertools.product(elems, repeat=len(gens)):
        F = _extend_cocycle(M, gens, images, side)
        if F is not None and is_z1(M, F, side):
            out.append(F)
    return sorted(set(out))


def _z1_equations(M: GroupModule, side: str):
    G, r = M.group, M.rank
    n = G.order * r
    eqs = []
    for g in range(G.order):
        for h in range(G.order):
            gh = G.mul(g, h)
            for i in range(r):
                row = [Fraction(0)] * n
                row[gh * r + i] += 1
                if side == "left":
                    row[g * r + i] -= 1
                    for k in range(r):
                        row[h * r + k] -= M.action[g][i][k]
                else:
                    row[h * r + i] -= 1
                    A = M.action[G.inv(h)]
                    for k in range(r):
                        row[g * r + k] -= A[i][k]
                eqs.append(row)
    return eqs


def _extend_cocycle(M: GroupModule, gens, images, side):
    G, m = M.group, M.modulus
    F = {0: tuple([0] * M.rank)}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for s, v in zip(gens, images):
                y = G.mul(x, s)
                if side == "left":
                    val = tuple((a + b) % m for a, b in zip(F[x], M.apply(x, v)))
                else:
                    val = tuple((a + b) % m for a, b in zip(M.apply(G.inv(s), F[x]), v))
                if y in F:
                    if F[y] != val:
                        return None
                else:
                    F[y] = val
                    nxt.append(y)
        frontier = nxt
    return tuple(F[g] for g in range(G.order))


def coboundary_of(M: GroupModule, xi: Sequence, side: str = "left") -> tuple[tuple, ...]:
    """Left: g -> g xi - xi.  Right: g -> xi - g^-1 xi."""
    _check_side(side)
    G, m = M.group, M.modulus
    out = []
    for g in range(G.order):
        if side == "left":
            v = [a - b for a, b in zip(M.apply(g, xi), xi)]
        else:
            v = [a - b for a, b in zip(xi, M.apply(G.inv(g), xi))]
        out.append(tuple(x % m for x in v) if m else tuple(v))
    return tuple(out)


def b1_coboundaries(M: GroupModule, side: str = "left") -> list[tuple[tuple, ...]]:
    """B^1(G, M): a canonical basis over Q, every coboundary (sorted) over Z/m."""
    _check_side(side)
    G, r = M.group, M.rank
    if r == 0:
        return [tuple(() for _ in range(G.order))]
    if M.modulus:
        return sorted({coboundary_of(M, xi, side) for xi in M.elements()})
    gens = []
    for k in range(r):
        e = [Fraction(int(i == k)) for i in range(r)]
        gens.append([x for v in coboundary_of(M, e, side) for x in v])
    basis = linalg.row_space(gens, G.order * r)
    return [_cochain_to_map(M, v) for v in basis]


@dataclass(frozen=True)
class GroupCohomology:
    degree: int
    coefficient: str
    rank: int | None = None  # over Q
    group: linalg.AbelianGroup | None = None  # over Z/m

    @property
    def size(self):
        """Dimension over Q or cardinality over Z/m."""
        return self.rank if self.group is None else self.group.order

    def __str__(self):
        if self.group is None:
            return f"Q^{self.rank}" if self.rank else "0"
        return str(self.group)


def group_cohomology(M: GroupModule, n: int, size_limit: int = 2_000_000) -> GroupCohomology:
    """H^n(G, M) from the inhomogeneous bar complex, n <= 3."""
    if not 0 <= n <= 3:
        raise ValueError("degree must be in 0..3")
    G, r = M.group, M.rank
    cells = G.order ** (n + 1) * r * G.order**n * r
    if cells > size_limit:
        raise SizeBound(f"bar complex matrix with {cells} entries exceeds limit {size_limit}")
    dim = G.order**n * r
    d_in = bar_differential(M, n - 1) if n > 0 else None
    d_out = bar_differential(M, n)
    if M.modulus is None:
        rk_in = linalg.rank(d_in) if d_in else 0
        return GroupCohomology(n, M.coefficient, rank=dim - linalg.rank(d_out) - rk_in)
    factors = linalg.quotient_mod(d_in, d_out, M.modulus, dim)
    return GroupCohomology(n, M.coefficient, group=linalg.AbelianGroup.from_cyclic(factors))

