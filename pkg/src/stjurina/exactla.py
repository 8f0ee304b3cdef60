"""Exact rational linear algebra: echelon forms, subspaces, Kronecker sums, modular rank."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

Vector = tuple[Fraction, ...]

# above this dimension callers may opt into modular rank
EXACT_RANK_LIMIT = 300


class AmbientMismatch(ValueError):
    pass


class NotContained(ValueError):
    pass


class BadPrime(ValueError):
    pass


class RatMatrix:
    """Dense matrix with Fraction entries, stored row-major."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence], cols: int | None = None):
        rows = [tuple(Fraction(x) for x in r) for r in entries]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged matrix")
        self.entries = tuple(rows)
        self.rows = len(rows)
        self.cols = cols

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls([[0] * cols for _ in range(rows)], cols)

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int | None = None) -> "RatMatrix":
        if not columns:
            return cls([[] for _ in range(rows or 0)], 0)
        n = len(columns[0])
        return cls([[col[i] for col in columns] for i in range(n)], len(columns))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self.entries)

    def transpose(self) -> "RatMatrix":
        return RatMatrix([self.column(j) for j in range(self.cols)], self.rows)

    def apply(self, v: Sequence[Fraction]) -> Vector:
        if len(v) != self.cols:
            raise AmbientMismatch(f"vector of length {len(v)} for {self.shape} matrix")
        nz = [(j, x) for j, x in enumerate(v) if x]
        return tuple(sum((r[j] * x for j, x in nz), Fraction(0)) for r in self.entries)

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise AmbientMismatch("inner dimensions differ")
        ocols = [other.column(j) for j in range(other.cols)]
        out = []
        for r in self.entries:
            nz = [(k, x) for k, x in enumerate(r) if x]
            out.append([sum((x * c[k] for k, x in nz), Fraction(0)) for c in ocols])
        return RatMatrix(out, other.cols)

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        if self.shape != other.shape:
            raise AmbientMismatch("shapes differ")
        return RatMatrix(
            [[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)], self.cols
        )

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.entries)

    def __eq__(self, other):
        return isinstance(other, RatMatrix) and self.shape == other.shape and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"RatMatrix({self.rows}x{self.cols})"

    def permuted(self, perm: Sequence[int]) -> "RatMatrix":
        """P M P^-1 for the basis permutation sending index i to perm[i]."""
        n = self.rows
        inv = [0] * n
        for i, p in enumerate(perm):
            inv[p] = i
        return RatMatrix([[self.entries[inv[i]][inv[j]] for j in range(n)] for i in range(n)], n)

    def nonzero_count(self) -> int:
        return sum(1 for r in self.entries for x in r if x)


# -- echelon kernels -----------------------------------------------------------


def _integer_rows(vectors: Iterable[Sequence[Fraction]]) -> list[list[int]]:
    out = []
    for v in vectors:
        den = 1
        for x in v:
            if x:
                d = x.denominator
                if d != 1:
                    den = den * d // math.gcd(den, d)
        out.append([int(x * den) for x in v])
    return out


def _bareiss(rows: list[list[int]], ncols: int) -> tuple[list[list[int]], list[int]]:
    """Fraction-free forward elimination; returns echelon rows (nonzero only) and pivots."""
    a = [r[:] for r in rows if any(r)]
    m = len(a)
    pivots: list[int] = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r >= m:
            break
        p = next((i for i in range(r, m) if a[i][c]), None)
        if p is None:
            continue
        if p != r:
            a[r], a[p] = a[p], a[r]
        pivot_row = a[r]
        pv = pivot_row[c]
        for i in range(r + 1, m):
            row = a[i]
            f = row[c]
            if f:
                for k in range(c + 1, ncols):
                    row[k] = (pv * row[k] - f * pivot_row[k]) // prev
                row[c] = 0
            elif pv != prev:
                for k in range(c + 1, ncols):
                    if row[k]:
                        row[k] = pv * row[k] // prev
        prev = pv
        pivots.append(c)
        r += 1
    ech = a[:r]
    # strip content; the remaining rows are never used for further Bareiss steps
    out = []
    for row in ech:
        g = 0
        for x in row:
            if x:
                g = math.gcd(g, x)
        out.append([x // g for x in row] if g > 1 else row)
    return out, pivots


def rref(vectors: Sequence[Sequence[Fraction]], ncols: int) -> tuple[list[Vector], list[int]]:
    """Reduced row echelon form of the span of ``vectors`` (zero rows dropped)."""
    ech, pivots = _bareiss(_integer_rows(vectors), ncols)
    rows = []
    for row, c in zip(ech, pivots):
        pv = row[c]
        rows.append([Fraction(x, pv) for x in row])
    # back substitution
    for i in range(len(rows) - 1, -1, -1):
        c = pivots[i]
        ri = rows[i]
        nz = [(k, x) for k, x in enumerate(ri) if x]
        for j in range(i):
            rj = rows[j]
            f = rj[c]
            if f:
                for k, x in nz:
                    rj[k] -= f * x
    return [tuple(r) for r in rows], pivots


# -- subspaces -----------------------------------------------------------------


@dataclass(frozen=True)
class Subspace:
    """Subspace of Q^ambient_dim stored by its canonical reduced echelon basis."""

    ambient_dim: int
    basis: tuple[Vector, ...]
    pivots: tuple[int, ...]

    @classmethod
    def span(cls, vectors: Iterable[Sequence], ambient_dim: int) -> "Subspace":
        vecs = [tuple(Fraction(x) for x in v) for v in vectors]
        for v in vecs:
            if len(v) != ambient_dim:
                raise AmbientMismatch(f"vector of length {len(v)} in ambient {ambient_dim}")
        rows, piv = rref(vecs, ambient_dim)
        return cls(ambient_dim, tuple(rows), tuple(piv))

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, (), ())

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls.span(standard_basis(ambient_dim), ambient_dim)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coordinates(self, v: Sequence[Fraction]) -> list[Fraction] | None:
        """Coordinates of ``v`` in the stored basis, or None when ``v`` is not in the subspace."""
        coeffs = [v[c] for c in self.pivots]
        r = list(v)
        for a, b in zip(coeffs, self.basis):
            if a:
                for k, x in enumerate(b):
                    if x:
                        r[k] -= a * x
        return coeffs if not any(r) else None

    def contains(self, v: Sequence[Fraction]) -> bool:
        if len(v) != self.ambient_dim:
            raise AmbientMismatch("length mismatch")
        return self.coordinates(v) is not None

    def contains_subspace(self, other: "Subspace") -> bool:
        return all(self.contains(v) for v in other.basis)

    def __add__(self, other: "Subspace") -> "Subspace":
        _same_ambient(self, other)
        return Subspace.span(self.basis + other.basis, self.ambient_dim)

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


def standard_basis(n: int) -> list[Vector]:
    one, zero = Fraction(1), Fraction(0)
    return [tuple(one if i == j else zero for j in range(n)) for i in range(n)]


def _same_ambient(V: Subspace, W: Subspace):
    if V.ambient_dim != W.ambient_dim:
        raise AmbientMismatch(f"ambient dimensions {V.ambient_dim} and {W.ambient_dim} differ")


def rank_kernel_image(M: RatMatrix) -> tuple[int, Subspace, Subspace]:
    rows, piv = rref(M.entries, M.cols)
    rank = len(rows)
    pivset = set(piv)
    kernel = []
    for free in range(M.cols):
        if free in pivset:
            continue
        v = [Fraction(0)] * M.cols
        v[free] = Fraction(1)
        for r, c in zip(rows, piv):
            v[c] = -r[free]
        kernel.append(v)
    K = Subspace.span(kernel, M.cols)
    I = Subspace.span([M.column(j) for j in range(M.cols)], M.rows)
    assert I.dim == rank and K.dim == M.cols - rank
    return rank, K, I


def rank(M: RatMatrix) -> int:
    return len(_bareiss(_integer_rows(M.entries), M.cols)[1])


def lattice_dims(V: Subspace, W: Subspace) -> tuple[int, int, Subspace]:
    """(dim(V+W), dim(V∩W), V∩W) by the Zassenhaus construction."""
    _same_ambient(V, W)
    n = V.ambient_dim
    zero = (Fraction(0),) * n
    block = [v + v for v in V.basis] + [w + zero for w in W.basis]
    rows, piv = rref(block, 2 * n)
    dim_sum = sum(1 for c in piv if c < n)
    inter = [r[n:] for r, c in zip(rows, piv) if c >= n]
    I = Subspace.span(inter, n)
    assert I.dim == V.dim + W.dim - dim_sum
    return dim_sum, I.dim, I


class _Echelon:
    """Incremental echelon basis used for greedy extension."""

    def __init__(self, n: int):
        self.n = n
        self.rows: list[list[Fraction]] = []
        self.pivots: list[int] = []

    def reduce(self, v: Sequence[Fraction]) -> list[Fraction]:
        r = list(v)
        for row, c in zip(self.rows, self.pivots):
            f = r[c]
            if f:
                for k, x in enumerate(row):
                    if x:
                        r[k] -= f * x
        return r

    def add(self, v: Sequence[Fraction]) -> bool:
        r = self.reduce(v)
        c = next((k for k, x in enumerate(r) if x), None)
        if c is None:
            return False
        inv = 1 / r[c]
        r = [x * inv for x in r]
        self.rows.append(r)
        self.pivots.append(c)
        return True


def complement_basis(inner: Subspace, outer: Subspace) -> Subspace:
    """Deterministic complement of ``inner`` inside ``outer``.

    ``inner``'s basis is extended by ``outer``'s stored basis vectors in order,
    keeping each one that raises the rank.
    """
    _same_ambient(inner, outer)
    if not outer.contains_subspace(inner):
        raise NotContained("inner subspace is not contained in outer")
    ech = _Echelon(inner.ambient_dim)
    for v in inner.basis:
        ech.add(v)
    kept = [v for v in outer.basis if ech.add(v)]
    return Subspace.span(kept, inner.ambient_dim)


def kronecker_sum(M1: RatMatrix, M2: RatMatrix) -> RatMatrix:
    """M1 ⊗ I + I ⊗ M2 with the pairing (i, j) -> i * d2 + j."""
    d1, d2 = M1.rows, M2.rows
    if M1.cols != d1 or M2.cols != d2:
        raise ValueError("kronecker_sum needs square matrices")
    zero = Fraction(0)
    out = []
    for i in range(d1):
        r1 = M1.entries[i]
        for j in range(d2):
            row = [zero] * (d1 * d2)
            for k, x in enumerate(r1):
                if x:
                    row[k * d2 + j] += x
            base = i * d2
            for l, y in enumerate(M2.entries[j]):
                if y:
                    row[base + l] += y
            out.append(row)
    return RatMatrix(out, d1 * d2)


def kron_vector(a: Sequence[Fraction], b: Sequence[Fraction]) -> Vector:
    return tuple(x * y for x in a for y in b)


def image_of_restriction(M: RatMatrix, D: Subspace) -> Subspace:
    if D.ambient_dim != M.cols:
        raise AmbientMismatch(f"subspace ambient {D.ambient_dim} vs matrix domain {M.cols}")
    return Subspace.span([M.apply(v) for v in D.basis], M.rows)


# -- modular rank --------------------------------------------------------------


def random_primes(k: int, bits: int = 31, seed: int | None = None) -> list[int]:
    """``k`` distinct random primes of exactly ``bits`` bits (products of two stay below 2**62)."""
    from sympy import isprime

    if bits > 31:
        raise ValueError("modular elimination runs in int64; use at most 31-bit primes")
    rng = random.Random(seed)
    out: list[int] = []
    while len(out) < k:
        c = rng.randrange(2 ** (bits - 1), 2**bits) | 1
        if c not in out and isprime(c):
            out.append(c)
    return out


def _reduce_mod(M: RatMatrix, p: int) -> np.ndarray:
    A = np.zeros((M.rows, M.cols), dtype=np.int64)
    for i, r in enumerate(M.entries):
        for j, x in enumerate(r):
            if x:
                d = x.denominator % p
                if d == 0:
                    raise BadPrime(f"prime {p} divides a denominator of entry ({i},{j})")
                A[i, j] = x.numerator % p * pow(d, -1, p) % p
    return A


def rank_mod_p(A: np.ndarray, p: int) -> int:
    A = A.copy() % p
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv], c:] = A[[piv, r], c:]
        inv = pow(int(A[r, c]), -1, p)
        A[r, c:] = A[r, c:] * inv % p
        below = r + 1 + np.flatnonzero(A[r + 1 :, c])
        if below.size:
            f = A[below, c][:, None]
            A[np.ix_(below, np.arange(c, cols))] = (A[below, c:] - f * A[r, c:]) % p
        r += 1
    return r


def modular_rank(M: RatMatrix, primes: Sequence[int]) -> tuple[int, list[int]]:
    """Rank over F_p for each prime; the maximum is a certified lower bound on the rational rank."""
    if len(set(primes)) != len(primes):
        raise ValueError("primes must be distinct")
    per = []
    for p in primes:
        if p >= 2**31:
            raise BadPrime(f"{p} is too large for int64 elimination")
        per.append(rank_mod_p(_reduce_mod(M, p), p))
    return (max(per) if per else 0), per


# -- nilpotent Jordan types ------------------------------------------------------


def nilpotent_jordan_type(M: RatMatrix) -> list[int]:
    """Jordan block sizes (descending) of a nilpotent matrix, from exact ranks of its powers."""
    n = M.rows
    ranks = [n]
    P = M
    while True:
        r = rank(P)
        ranks.append(r)
        if r == 0:
            break
        if len(ranks) > n + 1:
            raise ValueError("matrix is not nilpotent")
        P = P @ M
    # number of blocks of size >= k is ranks[k-1] - ranks[k]
    at_least = [ranks[k - 1] - ranks[k] for k in range(1, len(ranks))]
    sizes = []
    for k in range(len(at_least), 0, -1):
        exactly = at_least[k - 1] - (at_least[k] if k < len(at_least) else 0)
        sizes += [k] * exactly
    return sizes


def kronecker_sum_corank(type1: Sequence[int], type2: Sequence[int]) -> int:
    """dim coker(M1⊗1 + 1⊗M2) for nilpotent M1, M2 of the given Jordan types (char 0).

    J_a⊗1 + 1⊗J_b splits into min(a, b) Jordan blocks, so the corank is the
    sum of min(a, b) over all pairs of blocks.
    """
    return sum(min(a, b) for a in type1 for b in type2)
