"""Joins f1(x) + f2(y): the tensor Milnor algebra, U, b, u and the checks built on them."""

from __future__ import annotations

import random
from math import comb
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import numpy as np

from . import exactla
from .exactla import (
    EXACT_RANK_LIMIT,
    RatMatrix,
    Subspace,
    image_of_restriction,
    kron_vector,
    kronecker_sum,
    lattice_dims,
)
from .groebner import DEFAULT_DEGREE_CAP, local_quotient
from .invariants import (
    AssertionFailure,
    Germ,
    InternalMismatch,
    InvariantReport,
    MilnorAlgebra,
    SubspaceDecomposition,
    decompose,
    detect_quasihomogeneous,
    invariant_report,
    milnor_algebra,
    nilpotency_on,
)
from .polyring import jacobian_ideal, rename_into_disjoint

Mode = Literal["exact", "modular"]

FULLRING_MAX_ARITY = 4
DEFAULT_PRIMES = 3
MODULAR_DENSE_LIMIT = 4096


class DimensionMismatch(RuntimeError):
    pass


class TooLarge(RuntimeError):
    pass


class ProfileMismatch(ValueError):
    pass


@dataclass(frozen=True)
class JoinGerm:
    g1: Germ
    g2: Germ
    sum: Germ

    @property
    def arity(self) -> int:
        return self.sum.arity


def make_join(g1: Germ, g2: Germ) -> JoinGerm:
    p, q, _ = rename_into_disjoint(g1.poly, g2.poly)
    name = f"{g1.name}+{g2.name}" if g1.name and g2.name else None
    return JoinGerm(g1, g2, Germ(p + q, name))


# -- tensor algebra -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TensorAlgebra:
    alg1: MilnorAlgebra
    alg2: MilnorAlgebra

    @property
    def dim(self) -> int:
        return self.alg1.dim * self.alg2.dim

    def pair_index(self, i: int, j: int) -> int:
        return i * self.alg2.dim + j

    @property
    def F(self) -> RatMatrix:
        F = self.__dict__.get("_F")
        if F is None:
            F = kronecker_sum(self.alg1.mult_f, self.alg2.mult_f)
            object.__setattr__(self, "_F", F)
        return F

    def apply_F(self, v) -> tuple[Fraction, ...]:
        """F v computed blockwise as M1 V + V M2^T (V = v reshaped row-major)."""
        d1, d2 = self.alg1.dim, self.alg2.dim
        M1, M2 = self.alg1.mult_f.entries, self.alg2.mult_f.entries
        V = [v[i * d2 : (i + 1) * d2] for i in range(d1)]
        out = [[Fraction(0)] * d2 for _ in range(d1)]
        for i in range(d1):
            row = out[i]
            for k, x in enumerate(M1[i]):
                if x:
                    Vk = V[k]
                    for j in range(d2):
                        if Vk[j]:
                            row[j] += x * Vk[j]
            Vi = V[i]
            for j in range(d2):
                s = row[j]
                for l, y in enumerate(M2[j]):
                    if y and Vi[l]:
                        s += y * Vi[l]
                row[j] = s
        return tuple(x for r in out for x in r)

    def unit_vector(self) -> tuple[Fraction, ...]:
        return kron_vector(self.alg1.unit_vector(), self.alg2.unit_vector())


def tensor_algebra(j: JoinGerm, degree_cap: int = DEFAULT_DEGREE_CAP) -> TensorAlgebra:
    return TensorAlgebra(milnor_algebra(j.g1, degree_cap), milnor_algebra(j.g2, degree_cap))


def _mod_kronecker(M1: RatMatrix, M2: RatMatrix, p: int) -> np.ndarray:
    A1 = exactla._reduce_mod(M1, p)
    A2 = exactla._reduce_mod(M2, p)
    d1, d2 = A1.shape[0], A2.shape[0]
    return (np.kron(A1, np.eye(d2, dtype=np.int64)) + np.kron(np.eye(d1, dtype=np.int64), A2)) % p


def kronecker_modular_rank(M1: RatMatrix, M2: RatMatrix, primes) -> tuple[int, list[int]]:
    """modular_rank of kronecker_sum(M1, M2) without materialising the rational matrix."""
    per = [exactla.rank_mod_p(_mod_kronecker(M1, M2, p), p) for p in primes]
    return max(per), per


def tau_join(
    j: JoinGerm,
    mode: Mode = "exact",
    primes: int | list[int] = DEFAULT_PRIMES,
    seed: int | None = 0,
    degree_cap: int = DEFAULT_DEGREE_CAP,
) -> tuple[int, str, list[int] | None]:
    """(tau, rank mode actually used, per-prime ranks) from mu1*mu2 - rank(F).

    Exact mode falls back to modular rank above ``EXACT_RANK_LIMIT``.
    """
    T = tensor_algebra(j, degree_cap)
    if mode == "exact" and T.dim <= EXACT_RANK_LIMIT:
        return T.dim - exactla.rank(T.F), "exact", None
    if isinstance(primes, int):
        if primes < 3:
            raise ValueError("modular rank needs at least 3 primes")
        primes = exactla.random_primes(primes, seed=seed)
    r, per = kronecker_modular_rank(T.alg1.mult_f, T.alg2.mult_f, primes)
    return T.dim - r, "modular", per


def tau_join_fullring(
    j: JoinGerm, max_arity: int = FULLRING_MAX_ARITY, degree_cap: int = DEFAULT_DEGREE_CAP
) -> tuple[int, int]:
    """(mu, tau) of f1+f2 straight from the Groebner engine on the combined ring."""
    if j.arity > max_arity:
        raise TooLarge(f"full-ring oracle limited to {max_arity} variables, join has {j.arity}")
    f = j.sum.poly
    J = jacobian_ideal(f)
    mu = local_quotient(J, degree_cap).dimension
    tau = local_quotient(J + [f], degree_cap).dimension
    return mu, tau


def tau_join_jordan(T: TensorAlgebra) -> int:
    """Exact tau of the join from the Jordan types of mult_f1 and mult_f2."""
    t1 = exactla.nilpotent_jordan_type(T.alg1.mult_f)
    t2 = exactla.nilpotent_jordan_type(T.alg2.mult_f)
    return exactla.kronecker_sum_corank(t1, t2)


# -- U, b, u ------------------------------------------------------------------


def _kron_span(X: Subspace, Y: Subspace) -> list[tuple[Fraction, ...]]:
    return [kron_vector(x, y) for x in X.basis for y in Y.basis]


def compute_U(
    d1: SubspaceDecomposition, d2: SubspaceDecomposition, M1: RatMatrix | None = None, M2: RatMatrix | None = None
) -> Subspace:
    """U' = Ker1⊗Im2 + Im1⊗Ker2, checked against its dimension formula.

    With the factor matrices supplied, also builds U from the images
    f1(B1)⊗Ker2, f1(A1)⊗Ker2, Ker1⊗f2(B2), Ker1⊗f2(A2) and checks U = U'.
    """
    n = d1.mu * d2.mu
    Uprime = Subspace.span(_kron_span(d1.ker, d2.im) + _kron_span(d1.im, d2.ker), n)
    expected = (d1.mu - d1.tau) * d2.tau + (d2.mu - d2.tau) * d1.tau - d1.nu1 * d2.nu1
    if Uprime.dim != expected:
        raise DimensionMismatch(f"dim U' = {Uprime.dim}, formula gives {expected}")
    if M1 is not None and M2 is not None:
        f1B = image_of_restriction(M1, d1.B)
        f1A = image_of_restriction(M1, d1.A)
        f2B = image_of_restriction(M2, d2.B)
        f2A = image_of_restriction(M2, d2.A)
        vecs = (
            _kron_span(f1B, d2.ker)
            + _kron_span(f1A, d2.ker)
            + _kron_span(d1.ker, f2B)
            + _kron_span(d1.ker, f2A)
        )
        U = Subspace.span(vecs, n)
        if U != Uprime:
            raise DimensionMismatch(f"U (dim {U.dim}) differs from U' (dim {Uprime.dim})")
    return Uprime


def rechoose_complement(d: SubspaceDecomposition, rng: random.Random) -> SubspaceDecomposition:
    """Same decomposition with B replaced by another complement of Ker∩Im in Im."""
    if d.B.dim == 0 or d.nu1 == 0:
        return d
    new = []
    for b in d.B.basis:
        v = list(b)
        for k in d.ker_cap_im.basis:
            c = rng.randint(-3, 3)
            if c:
                v = [x + c * y for x, y in zip(v, k)]
        new.append(v)
    B = Subspace.span(new, d.mu)
    return SubspaceDecomposition(d.ker, d.im, d.ker_cap_im, B, d.A, d.kprime)


class AdaptedCoordinates:
    """Coordinates on M_f in the basis Ker∩Im, K', B, A of a fixed decomposition.

    U' = Ker1⊗Im2 + Im1⊗Ker2 does not depend on any complement, and in the
    product of two adapted bases it is a coordinate subspace.
    """

    def __init__(self, d: SubspaceDecomposition):
        labelled = d.adapted_basis()
        self.labels = [lab for lab, _ in labelled]
        self.inverse = _inverse(RatMatrix.from_columns([v for _, v in labelled]))

    def __call__(self, v) -> tuple[Fraction, ...]:
        return self.inverse.apply(v)

    def in_ker(self):
        return [lab in ("KI", "K") for lab in self.labels]

    def in_im(self):
        return [lab in ("KI", "B") for lab in self.labels]


def u_prime_mask(c1: AdaptedCoordinates, c2: AdaptedCoordinates) -> list[bool]:
    k1, i1, k2, i2 = c1.in_ker(), c1.in_im(), c2.in_ker(), c2.in_im()
    return [(k1[a] and i2[b]) or (i1[a] and k2[b]) for a in range(len(k1)) for b in range(len(k2))]


def compute_b_u(
    M1: RatMatrix,
    M2: RatMatrix,
    d1: SubspaceDecomposition,
    d2: SubspaceDecomposition,
    seed: int | None = None,
    U: Subspace | None = None,
    coords: tuple[AdaptedCoordinates, AdaptedCoordinates] | None = None,
) -> tuple[int, int]:
    """b = dim F(B1⊗B2) and u = dim(U ∩ F(B1⊗B2)) for F = M1⊗1 + 1⊗M2.

    ``seed`` re-chooses B1 and B2 at random first.  With ``U`` given the
    intersection is formed explicitly; otherwise u is read off in adapted
    coordinates, using F(x⊗y) = M1x⊗y + x⊗M2y so nothing of size mu1*mu2
    beyond the image vectors is ever built.
    """
    if seed is not None:
        rng = random.Random(seed)
        d1 = rechoose_complement(d1, rng)
        d2 = rechoose_complement(d2, rng)
    if d1.B.dim == 0 or d2.B.dim == 0:
        return 0, 0
    n = d1.mu * d2.mu
    if U is not None:
        images = [
            tuple(a + b for a, b in zip(kron_vector(M1.apply(x), y), kron_vector(x, M2.apply(y))))
            for x in d1.B.basis
            for y in d2.B.basis
        ]
        W = Subspace.span(images, n)
        return W.dim, lattice_dims(U, W)[1]
    c1, c2 = coords or (AdaptedCoordinates(d1), AdaptedCoordinates(d2))
    mask = u_prime_mask(c1, c2)
    images = []
    for x in d1.B.basis:
        cx, cMx = c1(x), c1(M1.apply(x))
        for y in d2.B.basis:
            cy, cMy = c2(y), c2(M2.apply(y))
            images.append(tuple(a + b for a, b in zip(kron_vector(cMx, cy), kron_vector(cx, cMy))))
    W = Subspace.span(images, n)
    outside = [[c for c, inside in zip(w, mask) if not inside] for w in W.basis]
    r_out = len(exactla.rref(outside, len(outside[0]))[0]) if outside and outside[0] else 0
    return W.dim, W.dim - r_out


def _inverse(M: RatMatrix) -> RatMatrix:
    n = M.rows
    aug = [list(M.entries[i]) + [Fraction(int(i == k)) for k in range(n)] for i in range(n)]
    rows, piv = exactla.rref(aug, 2 * n)
    if piv[: n] != list(range(n)) or len(rows) != n:
        raise ValueError("matrix is singular")
    return RatMatrix([r[n:] for r in rows], n)


# -- the theorem ------------------------------------------------------------------


def theorem_rhs(r1: InvariantReport, r2: InvariantReport, b: int, u: int) -> int:
    m1, t1, n1 = r1.mu, r1.tau, r1.nu1
    m2, t2, n2 = r2.mu, r2.tau, r2.nu1
    return (
        t1 * t2
        + (m1 - t1) * (m2 - t2)
        - n2 * (m1 - t1 - n1)
        - n1 * (m2 - t2 - n2)
        - b
        + u
    )


def bounds_hold(r1: InvariantReport, r2: InvariantReport, tau: int) -> bool:
    lo = r1.tau * r2.tau
    hi = lo + (r1.mu - r1.tau) * (r2.mu - r2.tau)
    return lo <= tau <= hi


def verify_directsum(
    T: TensorAlgebra, d1: SubspaceDecomposition, d2: SubspaceDecomposition, U: Subspace | None = None
) -> dict:
    """Im(F) = F(A1⊗A2) ⊕ F(A1⊗B2) ⊕ F(B1⊗A2) ⊕ (U + F(B1⊗B2)), checked dimension by dimension."""
    n = T.dim
    if U is None:
        U = compute_U(d1, d2)
    F = T.F
    _, _, imF = exactla.rank_kernel_image(F)

    def image(X: Subspace, Y: Subspace) -> Subspace:
        return Subspace.span([T.apply_F(v) for v in _kron_span(X, Y)], n)

    S1 = image(d1.A, d2.A)
    S2 = image(d1.A, d2.B)
    S3 = image(d1.B, d2.A)
    W = image(d1.B, d2.B)
    S4 = U + W
    b = W.dim
    u = lattice_dims(U, W)[1]
    pieces = [S1, S2, S3, S4]
    total = Subspace.span([v for S in pieces for v in S.basis], n)
    pairwise = all(
        lattice_dims(pieces[a], pieces[c])[1] == 0 for a in range(4) for c in range(a + 1, 4)
    )
    m1, t1, n1 = d1.mu, d1.tau, d1.nu1
    m2, t2, n2 = d2.mu, d2.tau, d2.nu1
    bookkeeping = n1 * n2 + n1 * (m2 - t2 - n2) + n2 * (m1 - t1 - n1) + U.dim + b - u
    dims_ok = (
        S1.dim == d1.A.dim * d2.A.dim
        and S2.dim == d1.A.dim * d2.B.dim
        and S3.dim == d1.B.dim * d2.A.dim
    )
    ok = pairwise and dims_ok and total == imF and imF.dim == bookkeeping
    return {
        "ok": ok,
        "dim_im_F": imF.dim,
        "bookkeeping": bookkeeping,
        "summand_dims": [S1.dim, S2.dim, S3.dim, S4.dim],
        "pairwise_trivial": pairwise,
        "sum_is_image": total == imF,
        "b": b,
        "u": u,
    }


_RANK_MODE_LABELS = {
    "exact": "exact",
    "modular": "modular, lower-bound-certified rank",
    "jordan": "exact, Jordan types of the factors",
}


@dataclass
class JoinReport:
    r1: InvariantReport
    r2: InvariantReport
    mu_join: int
    tau_join_tensor: int
    rank_mode: str
    per_prime_ranks: list[int] | None = None
    tau_join_jordan: int | None = None
    tau_join_fullring: int | None = None
    mu_join_fullring: int | None = None
    dim_U: int | None = None
    dim_U_source: str = "subspace"
    b: int = 0
    u: int = 0
    theorem_rhs: int = 0
    theorem_residual: int = 0
    bounds_ok: bool = False
    directsum_ok: bool | None = None
    directsum: dict | None = None
    ebs_join: int | None = None
    cor25: int | None = None
    verdicts: dict = field(default_factory=dict)
    name: str | None = None
    germ: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "germ": self.germ,
            "factor1": self.r1.to_dict(),
            "factor2": self.r2.to_dict(),
            "mu_join": self.mu_join,
            "tau_join": self.tau_join_tensor,
            "tau_join_tensor": self.tau_join_tensor,
            "rank_mode": _RANK_MODE_LABELS[self.rank_mode],
            "per_prime_ranks": self.per_prime_ranks,
            "tau_join_jordan": self.tau_join_jordan,
            "tau_join_fullring": self.tau_join_fullring,
            "mu_join_fullring": self.mu_join_fullring,
            "dim_U": self.dim_U,
            "dim_U_source": self.dim_U_source,
            "b": self.b,
            "u": self.u,
            "theorem_rhs": self.theorem_rhs,
            "theorem_residual": self.theorem_residual,
            "bounds_ok": self.bounds_ok,
            "directsum_ok": self.directsum_ok,
            "ebs_join": self.ebs_join,
            "cor25": self.cor25,
            "verdicts": self.verdicts,
        }


def verify_theorem(
    j: JoinGerm,
    mode: Mode = "exact",
    primes: int | list[int] = DEFAULT_PRIMES,
    seed: int | None = 0,
    oracle: bool = False,
    degree_cap: int = DEFAULT_DEGREE_CAP,
) -> JoinReport:
    """Compute tau of the join, U, b, u, and every check that depends on them.

    Above ``EXACT_RANK_LIMIT`` the dense exact rank is replaced by the Jordan
    type route, which is still exact; modular rank runs as well up to
    ``MODULAR_DENSE_LIMIT`` (or whenever asked for) and must agree with it.
    """
    r1 = invariant_report(j.g1, degree_cap)
    r2 = invariant_report(j.g2, degree_cap)
    T = tensor_algebra(j, degree_cap)
    d1 = decompose(T.alg1)
    d2 = decompose(T.alg2)
    small = mode == "exact" and T.dim <= EXACT_RANK_LIMIT
    tau_exact: int | None = None
    per = None
    if small:
        tau = T.dim - exactla.rank(T.F)
        used = "exact"
        tau_exact = tau
    else:
        tau_exact = tau_join_jordan(T)
        if mode == "modular" or T.dim <= MODULAR_DENSE_LIMIT:
            tau, used, per = tau_join(j, "modular", primes, seed, degree_cap)
            if tau != tau_exact:
                raise InternalMismatch(f"modular tau {tau} disagrees with Jordan-type tau {tau_exact}")
        else:
            tau, used = tau_exact, "jordan"
    report = JoinReport(r1, r2, T.dim, tau, used, per, name=j.sum.name, germ=str(j.sum.poly))
    report.tau_join_jordan = None if small else tau_exact
    M1, M2 = T.alg1.mult_f, T.alg2.mult_f
    if small:
        U = compute_U(d1, d2, M1, M2)
        report.dim_U = U.dim
        report.b, report.u = compute_b_u(M1, M2, d1, d2, U=U)
        if (report.b, report.u) != compute_b_u(M1, M2, d1, d2):
            raise InternalMismatch("b, u differ between explicit and adapted-coordinate routes")
        ds = verify_directsum(T, d1, d2, U)
        report.directsum = ds
        report.directsum_ok = ds["ok"]
        if not ds["ok"]:
            raise AssertionFailure("direct sum decomposition of Im(F) fails", ds)
    else:
        report.dim_U = (r1.mu - r1.tau) * r2.tau + (r2.mu - r2.tau) * r1.tau - r1.nu1 * r2.nu1
        report.dim_U_source = "formula"
        report.b, report.u = compute_b_u(M1, M2, d1, d2)
    bmax = d1.B.dim * d2.B.dim
    if not report.u <= report.b <= bmax:
        raise AssertionFailure("u <= b <= dim(B1⊗B2) fails", {"b": report.b, "u": report.u, "bmax": bmax})
    report.theorem_rhs = theorem_rhs(r1, r2, report.b, report.u)
    report.theorem_residual = tau_exact - report.theorem_rhs
    report.bounds_ok = bounds_hold(r1, r2, tau)
    report.ebs_join = nilpotency_on_tensor(T, limit=j.arity)
    if r1.ebs == 2 or r2.ebs == 2:
        report.cor25 = r1.tau * r2.tau + r1.nu1 * r2.nu1
    if oracle and j.arity <= FULLRING_MAX_ARITY:
        report.mu_join_fullring, report.tau_join_fullring = tau_join_fullring(j, degree_cap=degree_cap)
        if report.mu_join_fullring != T.dim:
            raise InternalMismatch(f"mu of the join {report.mu_join_fullring} != mu1*mu2 = {T.dim}")
    report.verdicts = {
        "charqh": _safe(check_charqh, j, report),
        "maximaltau": _safe(check_maximaltau, report),
        "small_gap": _safe(classify_small_gap, report),
        "quotient_bounds": _safe(quotient_bound_verdicts, j, report),
    }
    if report.theorem_residual != 0:
        raise AssertionFailure("Theorem residual is nonzero", report.to_dict())
    if not report.bounds_ok:
        raise AssertionFailure("tau1*tau2 <= tau <= tau1*tau2 + (mu1-tau1)(mu2-tau2) fails", report.to_dict())
    if report.tau_join_fullring is not None and report.tau_join_fullring != tau_exact:
        raise AssertionFailure("full-ring tau differs from tensor tau", report.to_dict())
    failed = _failed_verdicts(report.verdicts)
    if failed:
        raise AssertionFailure("; ".join(failed), report.to_dict())
    return report


def _failed_verdicts(verdicts: dict) -> list[str]:
    out = []
    for v in verdicts.values():
        if isinstance(v, dict):
            out += _failed_verdicts(v)
        elif isinstance(v, str) and v.startswith("FAILED"):
            out.append(v)
    return out


def b_minus_u_over_seeds(
    j: JoinGerm, seeds=range(20), degree_cap: int = DEFAULT_DEGREE_CAP
) -> list[tuple[int, int]]:
    """(b, u) for each seeded re-choice of B1, B2; b - u should not move."""
    T = tensor_algebra(j, degree_cap)
    d1, d2 = decompose(T.alg1), decompose(T.alg2)
    # U' is complement-free, so the original adapted coordinates serve every seed
    coords = (AdaptedCoordinates(d1), AdaptedCoordinates(d2))
    M1, M2 = T.alg1.mult_f, T.alg2.mult_f
    return [compute_b_u(M1, M2, d1, d2, seed=s, coords=coords) for s in seeds]


def _safe(fn, *args) -> str:
    try:
        return fn(*args)
    except AssertionFailure as e:
        return f"FAILED: {e}"


def nilpotency_on_tensor(T: TensorAlgebra, limit: int | None = None) -> int:
    """Least k with F^k (1⊗1) = 0, i.e. e^BS of the join.

    The two halves of F commute, so F^k(1⊗1) = sum_i C(k,i) f1^i ⊗ f2^(k-i);
    the vector is assembled exactly from the factors' Krylov sequences.
    """
    def krylov(alg: MilnorAlgebra) -> list[tuple[Fraction, ...]]:
        seq = [alg.unit_vector()]
        while any(seq[-1]):
            seq.append(alg.mult_f.apply(seq[-1]))
        return seq[:-1]

    v1, v2 = krylov(T.alg1), krylov(T.alg2)
    k = 1
    while True:
        w = [Fraction(0)] * T.dim
        for i in range(max(0, k - len(v2) + 1), min(k, len(v1) - 1) + 1):
            c = comb(k, i)
            for idx, x in enumerate(kron_vector(v1[i], v2[k - i])):
                if x:
                    w[idx] += c * x
        if not any(w):
            return k
        if limit is not None and k >= limit:
            raise AssertionFailure(f"F^{limit}(1⊗1) != 0: Briançon–Skoda bound violated")
        k += 1


# -- corollaries -------------------------------------------------------------------


def check_charqh(j: JoinGerm, report: JoinReport) -> str:
    w1 = detect_quasihomogeneous(j.g1)
    w2 = detect_quasihomogeneous(j.g2)
    r1, r2 = report.r1, report.r2
    tau, mu = report.tau_join_tensor, report.mu_join
    values = {"tau": tau, "mu": mu, "qh1": w1 is not None, "qh2": w2 is not None}
    if (tau == mu) != (report.ebs_join == 1):
        raise AssertionFailure("tau = mu must coincide with e^BS(join) = 1", values)
    if w1 is not None and w2 is not None:
        if tau != mu:
            raise AssertionFailure("both factors quasi-homogeneous but tau != mu1*mu2", values)
        return "both-qh: tau = mu"
    if (w1 is not None and r2.mu != r2.tau) or (w2 is not None and r1.mu != r1.tau):
        if not tau < mu:
            raise AssertionFailure("one factor quasi-homogeneous, other not, but tau >= mu1*mu2", values)
        return "one-qh: tau < mu"
    if r1.mu != r1.tau and r2.mu != r2.tau:
        if not tau < mu:
            raise AssertionFailure("neither factor has mu = tau, yet tau = mu1*mu2", values)
        return "neither-qh: tau < mu"
    return "not-applicable"


def check_maximaltau(report: JoinReport) -> str:
    r1, r2 = report.r1, report.r2
    closed = r1.tau * r2.tau + r1.nu1 * r2.nu1
    if r1.ebs == 2 or r2.ebs == 2:
        if report.tau_join_tensor != closed:
            raise AssertionFailure(
                "tau != tau1*tau2 + nu1*nu2 with an e^BS = 2 factor",
                {"tau": report.tau_join_tensor, "closed_form": closed},
            )
        return "holds"
    return "not-applicable (holds)" if report.tau_join_tensor == closed else "not-applicable"


def small_gap_cases(mu1: int, tau1: int, mu2: int, tau2: int) -> list[str]:
    """Cases of the mu - tau <= 2 classification matched by the factor invariants."""
    cases = []
    if (mu1 == tau1 == 1 and mu2 - 1 == tau2) or (mu2 == tau2 == 1 and mu1 - 1 == tau1):
        cases.append("1")
    if mu1 == tau1 == 1 and mu2 - 2 == tau2:
        cases.append("2a")
    if mu2 == tau2 == 1 and mu1 - 2 == tau1:
        cases.append("2b")
    if mu1 == mu2 == 2 and tau1 == tau2 == 1:
        cases.append("2c")
    if mu1 == tau1 == 2 and mu2 - 1 == tau2:
        cases.append("2d")
    if mu2 == tau2 == 2 and mu1 - 1 == tau1:
        cases.append("2e")
    return cases


def classify_gap(mu1: int, tau1: int, mu2: int, tau2: int, gap: int) -> str:
    """Agreement between the computed gap mu - tau of the join and the case list."""
    cases = small_gap_cases(mu1, tau1, mu2, tau2)
    expected = {"1": 1, "2a": 2, "2b": 2, "2c": 2, "2d": 2, "2e": 2}
    values = {"mu1": mu1, "tau1": tau1, "mu2": mu2, "tau2": tau2, "gap": gap, "cases": cases}
    for c in cases:
        if expected[c] != gap:
            raise AssertionFailure(f"factors match case ({c}) but the gap is {gap}", values)
    if gap in (1, 2):
        if not cases:
            raise AssertionFailure(f"gap {gap} but the factors match no case", values)
        return "case " + ",".join(f"({c})" for c in cases)
    return "NoSmallGap"


def classify_small_gap(report: JoinReport) -> str:
    return classify_gap(
        report.r1.mu, report.r1.tau, report.r2.mu, report.r2.tau, report.mu_join - report.tau_join_tensor
    )


PROFILE_BOUNDS = {
    "curve×qh": Fraction(4, 3),
    "surface×qh": Fraction(3, 2),
    "surface×curve": Fraction(2),
}


def matching_profiles(j: JoinGerm) -> list[str]:
    a1, a2 = j.g1.arity, j.g2.arity
    qh1 = detect_quasihomogeneous(j.g1) is not None
    qh2 = detect_quasihomogeneous(j.g2) is not None
    out = []
    if (a1 == 2 and qh2) or (a2 == 2 and qh1):
        out.append("curve×qh")
    if (a1 == 3 and qh2) or (a2 == 3 and qh1):
        out.append("surface×qh")
    if {a1, a2} == {2, 3}:
        out.append("surface×curve")
    return out


def check_quotient_bounds(j: JoinGerm, profile: str, report: JoinReport) -> str:
    profile = profile.replace("x", "×") if "×" not in profile else profile
    if profile not in PROFILE_BOUNDS:
        raise ProfileMismatch(f"unknown profile {profile!r}")
    if profile not in matching_profiles(j):
        raise ProfileMismatch(f"factors do not match profile {profile}")
    q = Fraction(report.mu_join, report.tau_join_tensor)
    bound = PROFILE_BOUNDS[profile]
    if not q < bound:
        raise AssertionFailure(f"mu/tau = {q} is not < {bound}", {"profile": profile})
    return f"{q} < {bound}"


def quotient_bound_verdicts(j: JoinGerm, report: JoinReport) -> dict:
    return {p: check_quotient_bounds(j, p, report) for p in matching_profiles(j)}
