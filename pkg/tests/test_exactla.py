from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from stjurina.exactla import (
    AmbientMismatch,
    BadPrime,
    NotContained,
    RatMatrix,
    Subspace,
    complement_basis,
    image_of_restriction,
    kron_vector,
    kronecker_sum,
    kronecker_sum_corank,
    lattice_dims,
    modular_rank,
    nilpotent_jordan_type,
    random_primes,
    rank,
    rank_kernel_image,
    rref,
    standard_basis,
)

from strategies import matrices, nilpotent_matrices, small_fracs

PRIMES = random_primes(3, seed=11)


def sympy_rank(M):
    return sympy.Matrix(M.rows, M.cols, [sympy.Rational(x.numerator, x.denominator) for r in M.entries for x in r]).rank()


def matpow(M, k):
    P = RatMatrix.identity(M.rows)
    for _ in range(k):
        P = P @ M
    return P


# -- rank, kernel, image --------------------------------------------------------


def test_zero_and_identity():
    r, K, I = rank_kernel_image(RatMatrix.zeros(3, 3))
    assert (r, K.dim, I.dim) == (0, 3, 0)
    assert K == Subspace.full(3)
    r, K, I = rank_kernel_image(RatMatrix.identity(4))
    assert (r, K.dim, I.dim) == (4, 0, 4)


@given(matrices())
def test_rank_matches_sympy(M):
    r, K, I = rank_kernel_image(M)
    assert r == sympy_rank(M) == rank(M)
    assert r + K.dim == M.cols
    assert I.dim == r
    for v in K.basis:
        assert not any(M.apply(v))
    for j in range(M.cols):
        assert I.contains(M.column(j))


@given(matrices())
def test_rref_canonical(M):
    rows, piv = rref(M.entries, M.cols)
    for r, c in zip(rows, piv):
        assert r[c] == 1
        assert all(other[c] == 0 for other in rows if other is not r)
    assert list(piv) == sorted(piv)
    # a shuffled, rescaled generating set gives the same stored basis
    shuffled = [tuple(3 * x for x in r) for r in reversed(M.entries)]
    assert Subspace.span(shuffled, M.cols) == Subspace.span(M.entries, M.cols)


# -- lattice operations -------------------------------------------------------------


def test_lattice_examples():
    e1, e2 = standard_basis(2)
    s, i, _ = lattice_dims(Subspace.span([e1], 2), Subspace.span([e2], 2))
    assert (s, i) == (2, 0)
    V = Subspace.span([(1, 2, 3), (0, 1, 1)], 3)
    assert lattice_dims(V, V)[:2] == (2, 2)
    with pytest.raises(AmbientMismatch):
        lattice_dims(V, Subspace.zero(2))


@given(matrices(max_rows=4, max_cols=5), matrices(max_rows=4, max_cols=5))
def test_lattice_dims_identity(A, B):
    if A.cols != B.cols:
        return
    V, W = Subspace.span(A.entries, A.cols), Subspace.span(B.entries, B.cols)
    s, i, I = lattice_dims(V, W)
    assert s == (V + W).dim
    assert i == V.dim + W.dim - s
    assert V.contains_subspace(I) and W.contains_subspace(I)


def test_complement_examples():
    assert complement_basis(Subspace.zero(3), Subspace.full(3)).basis == tuple(standard_basis(3))
    V = Subspace.span([(1, 1, 0)], 3)
    assert complement_basis(V, V).dim == 0
    with pytest.raises(NotContained):
        complement_basis(Subspace.full(3), V)


@given(matrices(max_rows=5, max_cols=5), st.integers(0, 4))
def test_complement_property(M, k):
    outer = Subspace.span(M.entries, M.cols)
    inner = Subspace.span(outer.basis[:k], M.cols)
    C = complement_basis(inner, outer)
    assert C.dim + inner.dim == outer.dim
    assert lattice_dims(C, inner)[1] == 0
    assert (C + inner) == outer


# -- Kronecker sums -------------------------------------------------------------------


def test_kronecker_small_cases():
    Z = RatMatrix([[0]], 1)
    assert kronecker_sum(Z, Z).is_zero()
    M2 = RatMatrix([[1, 2], [3, 4]], 2)
    assert kronecker_sum(Z, M2) == M2


def test_kronecker_nilpotent_jordan():
    N = RatMatrix([[0, 1], [0, 0]], 2)
    F = kronecker_sum(N, N)
    # oracle: numpy brute force
    n = np.array([[0, 1], [0, 0]])
    ref = np.kron(n, np.eye(2, dtype=int)) + np.kron(np.eye(2, dtype=int), n)
    assert [[int(x) for x in r] for r in F.entries] == ref.tolist()
    assert [rank(matpow(F, k)) for k in (1, 2, 3)] == [2, 1, 0]


@given(matrices(max_rows=3, square=True), matrices(max_rows=3, square=True))
def test_kronecker_matches_numpy_and_commutes(M1, M2):
    F = kronecker_sum(M1, M2)
    to_np = lambda M: np.array([[x for x in r] for r in M.entries], dtype=object)
    d1, d2 = M1.rows, M2.rows
    ref = np.kron(to_np(M1), np.eye(d2, dtype=int)) + np.kron(np.eye(d1, dtype=int), to_np(M2))
    assert [list(r) for r in F.entries] == ref.tolist()
    # swapping the factors is conjugation by the pairing permutation
    Fs = kronecker_sum(M2, M1)
    # Fs index (j, i) -> F index (i, j)
    perm = [i * d2 + j for j in range(d2) for i in range(d1)]
    assert Fs.permuted(perm) == F


@given(nilpotent_matrices(max_dim=4), nilpotent_matrices(max_dim=4))
def test_kronecker_sum_of_nilpotents(M1, M2):
    F = kronecker_sum(M1, M2)
    d = M1.rows + M2.rows
    assert matpow(F, d).is_zero()
    # the Jordan-type route gives the same corank as direct elimination
    corank = F.rows - rank(F)
    assert kronecker_sum_corank(nilpotent_jordan_type(M1), nilpotent_jordan_type(M2)) == corank


def test_jordan_type():
    J = RatMatrix([[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0], [0, 0, 0, 0]], 4)
    assert nilpotent_jordan_type(J) == [3, 1]
    assert nilpotent_jordan_type(RatMatrix.zeros(2, 2)) == [1, 1]
    with pytest.raises(ValueError):
        nilpotent_jordan_type(RatMatrix.identity(2))


def test_kron_vector():
    assert kron_vector((1, 2), (3, 4, 5)) == (3, 4, 5, 6, 8, 10)


def test_image_of_restriction():
    N = RatMatrix([[0, 1], [0, 0]], 2)
    assert image_of_restriction(N, Subspace.zero(2)).dim == 0
    D = Subspace.span([(1, 1)], 2)
    assert image_of_restriction(RatMatrix.identity(2), D) == D
    e1, e2 = standard_basis(2)
    assert image_of_restriction(N, Subspace.span([e2], 2)) == Subspace.span([e1], 2)


# -- modular rank ------------------------------------------------------------------------


def test_modular_examples():
    assert modular_rank(RatMatrix.identity(3), PRIMES)[0] == 3
    assert modular_rank(RatMatrix.zeros(3, 4), PRIMES)[0] == 0


def test_bad_prime():
    M = RatMatrix([[Fraction(1, 7)]], 1)
    with pytest.raises(BadPrime):
        modular_rank(M, [7])


def test_small_prime_drops_rank():
    M = RatMatrix([[5, 0], [0, 1]], 2)
    r, per = modular_rank(M, [5, 7])
    assert per == [1, 2] and r == 2


def test_random_primes():
    ps = random_primes(5, seed=3)
    assert len(set(ps)) == 5
    assert all(sympy.isprime(p) and p.bit_length() == 31 for p in ps)
    assert ps == random_primes(5, seed=3)
    with pytest.raises(ValueError):
        random_primes(1, bits=62)


@given(matrices())
def test_modular_never_exceeds_exact(M):
    r, per = modular_rank(M, PRIMES + [5, 7])
    exact = rank(M)
    assert all(p <= exact for p in per)
    assert r == exact  # three large random primes recover the rank of small matrices
