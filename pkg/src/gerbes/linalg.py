"""Exact integer and rational linear algebra.

Heavy lifting (rank, Hermite and Smith invariants, rational solves) is done by
python-flint.  ``smith_normal_form`` is a plain-integer implementation that
also returns the unimodular transforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

import flint
import numpy as np

__all__ = [
    "AbelianGroup",
    "smith_normal_form",
    "invariant_factors",
    "to_fmpz",
    "to_fmpq",
    "rank",
    "rank_mod",
    "nullspace",
    "row_space",
    "quotient_mod",
    "matmul_is_zero",
]


@dataclass(frozen=True)
class AbelianGroup:
    """Finitely generated abelian group Z^free_rank + sum Z/t, t in torsion.

    ``torsion`` holds the invariant factors t_1 | t_2 | ... (all > 1).
    """

    torsion: tuple[int, ...] = ()
    free_rank: int = 0

    @classmethod
    def from_cyclic(cls, orders: Iterable[int]) -> "AbelianGroup":
        """Canonical form of a direct sum of cyclic groups (0 means Z)."""
        free = 0
        primary: dict[int, list[int]] = {}
        for n in orders:
            n = abs(int(n))
            if n == 0:
                free += 1
                continue
            for p, e in _factorize(n).items():
                primary.setdefault(p, []).append(p**e)
        for powers in primary.values():
            powers.sort(reverse=True)
        length = max((len(v) for v in primary.values()), default=0)
        factors = []
        for k in range(length):
            d = 1
            for powers in primary.values():
                if k < len(powers):
                    d *= powers[k]
            factors.append(d)
        return cls(tuple(sorted(factors)), free)

    @property
    def order(self) -> int | None:
        if self.free_rank:
            return None
        out = 1
        for t in self.torsion:
            out *= t
        return out

    @property
    def factors(self) -> list[int]:
        """Invariant factors followed by one 0 per free summand."""
        return list(self.torsion) + [0] * self.free_rank

    def __add__(self, other: "AbelianGroup") -> "AbelianGroup":
        return AbelianGroup.from_cyclic(self.factors + other.factors)

    def __str__(self) -> str:
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        for t in sorted(set(self.torsion)):
            k = self.torsion.count(t)
            parts.append(f"Z{t}" if k == 1 else f"Z{t}^{k}")
        return " x ".join(parts) if parts else "0"


def _factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


# conversions


def _shape(M) -> tuple[int, int]:
    if isinstance(M, (flint.fmpz_mat, flint.fmpq_mat)):
        return M.nrows(), M.ncols()
    if isinstance(M, np.ndarray):
        return M.shape
    M = list(M)
    return len(M), (len(M[0]) if M else 0)


def to_fmpz(M, shape=None) -> flint.fmpz_mat:
    if isinstance(M, flint.fmpz_mat):
        return M
    if isinstance(M, np.ndarray):
        r, c = M.shape
        return flint.fmpz_mat(r, c, [int(x) for x in M.ravel().tolist()])
    rows = [list(r) for r in M]
    r = len(rows)
    c = len(rows[0]) if rows else (shape[1] if shape else 0)
    return flint.fmpz_mat(r, c, [int(x) for row in rows for x in row])


def to_fmpq(M) -> flint.fmpq_mat:
    if isinstance(M, flint.fmpq_mat):
        return M
    if isinstance(M, flint.fmpz_mat):
        return flint.fmpq_mat(M)
    rows = [list(r) for r in (M.tolist() if isinstance(M, np.ndarray) else M)]
    r = len(rows)
    c = len(rows[0]) if rows else 0
    flat = []
    for row in rows:
        for x in row:
            x = Fraction(x)
            flat.append(flint.fmpq(x.numerator, x.denominator))
    return flint.fmpq_mat(r, c, flat)


def _is_integral(M) -> bool:
    if isinstance(M, flint.fmpz_mat):
        return True
    if isinstance(M, flint.fmpq_mat):
        return False
    if isinstance(M, np.ndarray):
        return M.dtype.kind in "iub"
    return all(
        isinstance(x, int) or (isinstance(x, Fraction) and x.denominator == 1)
        for row in M
        for x in row
    )


# Smith normal form with transforms


def smith_normal_form(M: Sequence[Sequence[int]]):
    """Return (U, D, V) with U*M*V == D, U and V unimodular, D in Smith form.

    Entries are Python ints; the diagonal of D is non-negative and each
    nonzero entry divides the next.
    """
    A = [[int(x) for x in row] for row in M]
    m = len(A)
    n = len(A[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst -= q * row_src
        if q:
            A[dst] = [a - q * b for a, b in zip(A[dst], A[src])]
            U[dst] = [a - q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):  # col_dst -= q * col_src
        if q:
            for row in A:
                row[dst] -= q * row[src]
            for row in V:
                row[dst] -= q * row[src]

    for t in range(min(m, n)):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            clean = True
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, A[i][t] // A[t][t])
                    clean = clean and A[i][t] == 0
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, A[t][j] // A[t][t])
                    clean = clean and A[t][j] == 0
            if not clean:
                best = (t, t)
                for i in range(t + 1, m):
                    if A[i][t] and abs(A[i][t]) < abs(A[best[0]][best[1]]):
                        best = (i, t)
                for j in range(t + 1, n):
                    if A[t][j] and abs(A[t][j]) < abs(A[best[0]][best[1]]):
                        best = (t, j)
                swap_rows(t, best[0])
                swap_cols(t, best[1])
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % A[t][t]),
                None,
            )
            if bad is None:
                break
            add_row(t, bad, -1)
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
    return U, A, V


def invariant_factors(M) -> list[int]:
    """Nonzero diagonal entries of the Smith form of an integer matrix."""
    r, c = _shape(M)
    if r == 0 or c == 0:
        return []
    S = to_fmpz(M).snf()
    out = []
    for i in range(min(r, c)):
        d = int(S[i, i])
        if d:
            out.append(abs(d))
    return out


def rank(M) -> int:
    """Exact rank over Q."""
    r, c = _shape(M)
    if r == 0 or c == 0:
        return 0
    if isinstance(M, np.ndarray) and M.dtype.kind in "iu" and M.ndim == 2:
        return _rank_gram(M)
    if _is_integral(M):
        return to_fmpz(M).rank()
    return to_fmpq(M).rank()


def _rank_gram(M: np.ndarray) -> int:
    # over Q, rank(M) == rank(M^T M); the Gram matrix on the short side is small
    if M.shape[0] < M.shape[1]:
        M = M.T
    if M.shape[0] <= 2 * M.shape[1]:
        return to_fmpz(M).rank()
    bound = int(np.abs(M).max()) ** 2 * M.shape[0]
    if bound < 2**52:
        F = M.astype(np.float64)
        gram = np.rint(F.T @ F).astype(np.int64)
    else:
        O = M.astype(object)
        gram = O.T @ O
    return to_fmpz(gram).rank()


def rank_mod(M, p: int) -> int:
    """Rank over the prime field F_p."""
    r, c = _shape(M)
    if r == 0 or c == 0:
        return 0
    if isinstance(M, np.ndarray) and M.dtype.kind in "iu":
        return flint.nmod_mat(r, c, (M % p).ravel().tolist(), p).rank()
    rows = M.tolist() if isinstance(M, np.ndarray) else [list(x) for x in M]
    return flint.nmod_mat(r, c, [int(x) % p for row in rows for x in row], p).rank()


def _rref_rows(M) -> tuple[list[list[Fraction]], list[int]]:
    r, c = _shape(M)
    if r == 0 or c == 0:
        return [], []
    R, rk = to_fmpq(M).rref()
    rows = []
    pivots = []
    for i in range(rk):
        row = [Fraction(int(R[i, j].p), int(R[i, j].q)) for j in range(c)]
        pivots.append(next(j for j, x in enumerate(row) if x))
        rows.append(row)
    return rows, pivots


def nullspace(M, ncols: int | None = None) -> list[list[Fraction]]:
    """Canonical basis of {x : Mx = 0} over Q (one vector per free column)."""
    r, c = _shape(M)
    if ncols is not None:
        c = ncols
    if r == 0:
        return [[Fraction(int(i == j)) for i in range(c)] for j in range(c)]
    rows, pivots = _rref_rows(M)
    free = [j for j in range(c) if j not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * c
        v[f] = Fraction(1)
        for row, p in zip(rows, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def row_space(vectors: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    """Reduced row echelon basis of the span of ``vectors``."""
    if not vectors:
        return []
    rows, _ = _rref_rows([list(v) for v in vectors])
    return rows


def matmul_is_zero(B, A, modulus: int | None = None) -> bool:
    """Check B*A == 0 (mod ``modulus`` if given)."""
    rb, cb = _shape(B)
    ra, ca = _shape(A)
    if rb == 0 or ca == 0 or cb == 0:
        return True
    if _is_integral(B) and _is_integral(A):
        P = to_fmpz(B) * to_fmpz(A)
        if modulus is None:
            return P.is_zero()
        return all(int(x) % modulus == 0 for x in P.entries())
    return (to_fmpq(B) * to_fmpq(A)).is_zero()


def quotient_mod(A, B, m: int, c: int) -> list[int]:
    """Invariant factors of ker(B) / im(A) over Z/m.

    A maps (Z/m)^a -> (Z/m)^c and B maps (Z/m)^c -> (Z/m)^r; both given as
    integer lifts.  With H an upper triangular basis of rowspan(B) + m Z^c,
    the kernel lattice {x : Bx = 0 mod m} is spanned by the columns of
    m H^-1, so image vectors v have kernel coordinates H v / m.  The Smith
    form of that coordinate matrix gives the quotient.
    """
    if c == 0:
        return []
    H = hnf_mod(_as_rows(B) if B is not None else [], m, c)
    if A is not None and _shape(A)[1]:
        Gm = hnf_mod(np.array(_as_rows(A), dtype=np.int64).T, m, c)
    else:
        Gm = m * np.eye(c, dtype=np.int64)
    P = to_fmpz(Gm) * to_fmpz(H).transpose()
    coords = []
    for i in range(c):
        row = []
        for j in range(c):
            q, r = divmod(int(P[i, j]), m)
            assert r == 0, "image must lie in the kernel lattice"
            row.append(q)
        coords.append(row)
    return [d for d in invariant_factors(coords) if d != 1]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _nonzero_unique(W: np.ndarray) -> np.ndarray:
    if len(W) == 0:
        return W
    W = np.ascontiguousarray(W[np.any(W != 0, axis=1)])
    if len(W) < 2:
        return W
    keys = W.view(np.dtype((np.void, W.dtype.itemsize * W.shape[1]))).ravel()
    _, idx = np.unique(keys, return_index=True)
    return W[np.sort(idx)]


def hnf_mod(rows, m: int, c: int) -> np.ndarray:
    """Upper triangular c x c basis of (row lattice of ``rows``) + m Z^c.

    Work is done on residues mod m, which is legitimate because every m e_j
    lies in the lattice.  Diagonal entries are positive divisors of m.
    """
    W = np.asarray(rows, dtype=np.int64)
    W = _nonzero_unique(W.reshape(-1, c) % m) if W.size else np.zeros((0, c), dtype=np.int64)
    out = np.zeros((c, c), dtype=np.int64)
    for j in range(c):
        col = W[:, j]
        nz = np.nonzero(col)[0]
        piv = np.zeros(c, dtype=np.int64)
        piv[j] = m
        rest = [W[col == 0]]
        if len(nz):
            target = gcd_list([m, *np.unique(col[nz]).tolist()])
            gcds = np.gcd(col[nz], m)
            hit = nz[np.argmax(gcds == target)] if (gcds == target).any() else None
            if hit is not None:
                # one pivot row reaches the gcd: eliminate everything else at once
                w = W[hit]
                g, s, t = _xgcd(int(w[j]), m)
                piv = (s * w) % m
                piv[j] = g
                left = ((t * (m // g)) * w) % m
                left[j] = 0
                others = W[nz[nz != hit]]
                red = (others - (others[:, j] // g)[:, None] * piv[None, :]) % m
                rest += [left[None, :], red]
            else:
                for w in W[nz]:
                    a, b = int(w[j]), int(piv[j])
                    g, s, t = _xgcd(a, b)
                    newp = (s * w + t * piv) % m
                    newp[j] = g
                    other = ((a // g) * piv - (b // g) * w) % m
                    other[j] = 0
                    piv = newp
                    rest.append(other[None, :])
        g = int(piv[j])
        extra = ((m // g) * piv) % m
        extra[j] = 0
        rest.append(extra[None, :])
        out[j] = piv
        W = _nonzero_unique(np.concatenate(rest))
    return out


def _as_rows(M) -> list[list[int]]:
    if isinstance(M, (flint.fmpz_mat, flint.fmpq_mat)):
        return [[int(M[i, j]) for j in range(M.ncols())] for i in range(M.nrows())]
    if isinstance(M, np.ndarray):
        return M.tolist()
    return [list(r) for r in M]


def gcd_list(values: Iterable[int]) -> int:
    g = 0
    for v in values:
        g = gcd(g, int(v))
    return g
