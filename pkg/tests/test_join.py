from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from stjurina.exactla import RatMatrix, kronecker_sum, rank
from stjurina.invariants import (
    AssertionFailure,
    Germ,
    bs_exponent,
    decompose,
    invariant_report,
    milnor_algebra,
)
from stjurina.join import (
    AdaptedCoordinates,
    ProfileMismatch,
    TooLarge,
    b_minus_u_over_seeds,
    check_charqh,
    check_maximaltau,
    check_quotient_bounds,
    classify_gap,
    classify_small_gap,
    compute_U,
    compute_b_u,
    make_join,
    nilpotency_on_tensor,
    small_gap_cases,
    tau_join,
    tau_join_fullring,
    tau_join_jordan,
    tensor_algebra,
    theorem_rhs,
    verify_directsum,
    verify_theorem,
)

from strategies import nilpotent_matrices

G = Germ.parse("y^4 - x^5 + x^3*y^2", "x,y", "G")
H = make_join(G, G).sum


def g(text, vars="x,y"):
    return Germ.parse(text, vars)


X2 = g("x^2", "x")
X3 = g("x^3", "x")
A2 = g("x^2 + y^3")


# -- construction ----------------------------------------------------------------------


def test_make_join():
    j = make_join(X2, X2)
    assert j.sum.vars.names == ("x", "u")
    assert str(j.sum) == "x^2 + u^2"
    assert H.arity == 4
    assert milnor_algebra(H).dim == 144
    assert milnor_algebra(make_join(G, X2).sum).dim == 12
    assert tensor_algebra(make_join(G, X2)).dim == 12


# -- tau of the join ------------------------------------------------------------------------


def test_tau_join_examples():
    assert tau_join(make_join(X2, X2))[0] == 1
    assert tau_join(make_join(G, G))[:2] == (122, "exact")


def test_tau_join_triple_modular():
    tau, mode, per = tau_join(make_join(H, G), mode="modular", primes=3, seed=5)
    assert (tau, mode) == (1363, "modular")
    assert per == [1728 - 1363] * 3


def test_modular_needs_three_primes():
    with pytest.raises(ValueError):
        tau_join(make_join(G, G), mode="modular", primes=2)


def test_fullring_examples():
    assert tau_join_fullring(make_join(X2, g("y^3", "y"))) == (2, 2)
    assert tau_join_fullring(make_join(A2, g("z^2", "z")))[1] == 2
    assert tau_join_fullring(make_join(G, g("z^2", "z"))) == (12, 11)
    with pytest.raises(TooLarge):
        tau_join_fullring(make_join(H, X2))


def test_jordan_route_matches_dense():
    for a, b in [(G, G), (G, A2), (g("x^3 + y^7 + x*y^5"), G)]:
        T = tensor_algebra(make_join(a, b))
        assert tau_join_jordan(T) == T.dim - rank(T.F)


@pytest.mark.parametrize("a, b", [(G, A2), (G, X3), (g("x^2*y + y^4"), G)])
def test_tau_symmetric(a, b):
    assert tau_join(make_join(a, b))[0] == tau_join(make_join(b, a))[0]


# -- U, b, u --------------------------------------------------------------------------------


def _decs(a, b):
    T = tensor_algebra(make_join(a, b))
    return T, decompose(T.alg1), decompose(T.alg2)


def test_U_examples():
    T, d1, d2 = _decs(A2, g("x^3 + y^4"))
    assert compute_U(d1, d2).dim == 0
    T, d1, d2 = _decs(G, G)
    assert compute_U(d1, d2, T.alg1.mult_f, T.alg2.mult_f).dim == 21
    T, d1, d2 = _decs(G, X2)
    assert compute_U(d1, d2, T.alg1.mult_f, T.alg2.mult_f).dim == 1


def test_b_u_examples():
    T, d1, d2 = _decs(G, G)
    assert compute_b_u(T.alg1.mult_f, T.alg2.mult_f, d1, d2) == (0, 0)
    T, d1, d2 = _decs(H, H)
    assert (d1.B.dim, d2.B.dim) == (1, 1)
    b, u = compute_b_u(T.alg1.mult_f, T.alg2.mult_f, d1, d2)
    assert u <= b <= 1
    # frozen from a direct computation; the theorem residual below pins b - u
    assert (b, u) == (1, 1)


def test_directsum_examples():
    T, d1, d2 = _decs(G, G)
    ds = verify_directsum(T, d1, d2)
    assert ds["ok"] and ds["dim_im_F"] == 22 == ds["bookkeeping"]
    T, d1, d2 = _decs(G, A2)
    ds = verify_directsum(T, d1, d2)
    assert ds["ok"]
    assert ds["summand_dims"][:3] == [0, 0, 0]
    T, d1, d2 = _decs(A2, g("x^3 + y^4"))
    assert verify_directsum(T, d1, d2)["dim_im_F"] == 0


@given(nilpotent_matrices(max_dim=5), nilpotent_matrices(max_dim=5))
def test_identity_on_random_nilpotent_pairs(M1, M2):
    # the bookkeeping is pure linear algebra: it holds for any two nilpotent operators
    d1, d2 = decompose(M1), decompose(M2)
    U = compute_U(d1, d2, M1, M2)
    b, u = compute_b_u(M1, M2, d1, d2, U=U)
    assert (b, u) == compute_b_u(M1, M2, d1, d2)
    assert u <= b <= d1.B.dim * d2.B.dim
    F = kronecker_sum(M1, M2)
    tau = F.rows - rank(F)
    m1, t1, n1 = d1.mu, d1.tau, d1.nu1
    m2, t2, n2 = d2.mu, d2.tau, d2.nu1
    rhs = t1 * t2 + (m1 - t1) * (m2 - t2) - n2 * (m1 - t1 - n1) - n1 * (m2 - t2 - n2) - b + u
    assert tau == rhs
    assert t1 * t2 <= tau <= t1 * t2 + (m1 - t1) * (m2 - t2)


@given(nilpotent_matrices(max_dim=5), nilpotent_matrices(max_dim=5))
def test_b_minus_u_seed_invariance(M1, M2):
    d1, d2 = decompose(M1), decompose(M2)
    U = compute_U(d1, d2, M1, M2)
    coords = (AdaptedCoordinates(d1), AdaptedCoordinates(d2))
    base = compute_b_u(M1, M2, d1, d2)
    for seed in range(20):
        b, u = compute_b_u(M1, M2, d1, d2, seed=seed, coords=coords)
        assert b - u == base[0] - base[1]
        assert (b, u) == compute_b_u(M1, M2, d1, d2, seed=seed, U=U)


def test_b_minus_u_over_seeds_HH():
    pairs = b_minus_u_over_seeds(make_join(H, H), range(20))
    assert len(pairs) == 20
    assert {b - u for b, u in pairs} == {0}


# -- the theorem ---------------------------------------------------------------------------


def test_verify_theorem_GG():
    r = verify_theorem(make_join(G, G), oracle=True)
    assert r.tau_join_tensor == 122 and r.theorem_residual == 0
    assert (r.r1.nu1, r.r2.nu1, r.b, r.u) == (1, 1, 0, 0)
    assert r.tau_join_fullring == 122 and r.mu_join_fullring == 144
    assert r.directsum_ok and r.bounds_ok
    assert theorem_rhs(r.r1, r.r2, 0, 0) == 121 + 1


def test_verify_theorem_qh_pair():
    r = verify_theorem(make_join(A2, g("x^2*y + y^4")))
    assert r.tau_join_tensor == r.mu_join == 10
    assert (r.dim_U, r.b, r.u) == (0, 0, 0)


def test_verify_theorem_HG():
    r = verify_theorem(make_join(H, G), mode="modular")
    assert r.tau_join_tensor == r.tau_join_jordan == r.cor25 == 1363
    assert r.rank_mode == "modular"
    assert r.to_dict()["rank_mode"] == "modular, lower-bound-certified rank"
    assert r.theorem_residual == 0


def test_verify_theorem_HH_jordan():
    r = verify_theorem(make_join(H, H))
    assert r.rank_mode == "jordan"
    assert r.tau_join_tensor == 15326
    assert (r.b, r.u, r.theorem_residual) == (1, 1, 0)
    assert r.ebs_join == 5


@pytest.mark.parametrize("a, b", [(G, A2), (G, X2), (A2, g("z^2 + w^3", "z,w")), (g("x^2*y+y^4"), X3)])
def test_ebs_join_matches_full_ring(a, b):
    j = make_join(a, b)
    T = tensor_algebra(j)
    assert nilpotency_on_tensor(T) == bs_exponent(j.sum)
    # and matches powers of the dense Kronecker sum
    v, k = T.unit_vector(), 0
    while any(v):
        v, k = T.F.apply(v), k + 1
    assert k == nilpotency_on_tensor(T)


# -- corollaries --------------------------------------------------------------------------------


def test_charqh():
    r = verify_theorem(make_join(A2, g("z^2 + w^5", "z,w")))
    assert r.tau_join_tensor == 8 == r.mu_join
    assert r.verdicts["charqh"].startswith("both-qh")
    r = verify_theorem(make_join(G, g("z^2", "z")))
    assert (r.tau_join_tensor, r.mu_join) == (11, 12)
    assert r.verdicts["charqh"].startswith("one-qh")
    r = verify_theorem(make_join(G, G))
    assert r.verdicts["charqh"].startswith("neither-qh")


def test_charqh_alarm():
    j = make_join(A2, X2)
    r = verify_theorem(j)
    r.tau_join_tensor = 1
    with pytest.raises(AssertionFailure):
        check_charqh(j, r)


def test_maximaltau():
    assert verify_theorem(make_join(G, G)).verdicts["maximaltau"] == "holds"
    r = verify_theorem(make_join(A2, g("z^2", "z")))
    assert r.verdicts["maximaltau"] == "not-applicable (holds)"
    r.tau_join_tensor += 1
    r.r1.ebs = 2
    with pytest.raises(AssertionFailure):
        check_maximaltau(r)


def test_small_gap_examples():
    r = verify_theorem(make_join(X2, G))
    assert r.mu_join - r.tau_join_tensor == 1
    assert classify_small_gap(r) == "case (1)"
    r = verify_theorem(make_join(X3, G))
    assert r.mu_join - r.tau_join_tensor == 2
    assert classify_small_gap(r) == "case (2d)"
    r = verify_theorem(make_join(A2, g("z^2 + w^5", "z,w")))
    assert classify_small_gap(r) == "NoSmallGap"


# invariant tuples (mu1, tau1, mu2, tau2) hitting each case; (2c) cannot come from germs,
# since mu = 2 forces A_2 which has tau = 2
SYNTHETIC = {
    "1": [(1, 1, 12, 11), (14, 13, 1, 1)],
    "2a": [(1, 1, 20, 18), (1, 1, 18, 16)],
    "2b": [(20, 18, 1, 1), (18, 16, 1, 1)],
    "2c": [(2, 1, 2, 1)],
    "2d": [(2, 2, 12, 11), (2, 2, 14, 13)],
    "2e": [(12, 11, 2, 2), (14, 13, 2, 2)],
}


@pytest.mark.parametrize("case", list(SYNTHETIC))
def test_small_gap_case_table(case):
    gap = 1 if case == "1" else 2
    for inv in SYNTHETIC[case]:
        assert case in small_gap_cases(*inv)
        assert classify_gap(*inv, gap).startswith("case")
        with pytest.raises(AssertionFailure):
            classify_gap(*inv, gap + 1)


def test_small_gap_unmatched_gap_alarm():
    with pytest.raises(AssertionFailure):
        classify_gap(12, 11, 12, 11, 1)


def test_quotient_bounds():
    j = make_join(G, g("z^2 + w^3", "z,w"))
    r = verify_theorem(j)
    assert check_quotient_bounds(j, "curve×qh", r) == "12/11 < 4/3"
    j = make_join(g("x^2 + y^2 + z^2", "x,y,z"), g("w^2", "w"))
    r = verify_theorem(j)
    assert check_quotient_bounds(j, "surface×qh", r) == "1 < 3/2"
    j = make_join(g("x^3 + y^3 + z^3", "x,y,z"), g("u^2 + v^3", "u,v"))
    r = verify_theorem(j)
    assert (r.mu_join, r.tau_join_tensor) == (16, 16)
    assert check_quotient_bounds(j, "surface×curve", r) == "1 < 2"
    with pytest.raises(ProfileMismatch):
        check_quotient_bounds(make_join(G, G), "surface×qh", verify_theorem(make_join(G, G)))
