"""Invariants of a single germ: mu, tau, nu_1, Ker/B/A decomposition, e^BS, weights and spectrum."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from . import exactla
from .exactla import RatMatrix, Subspace, complement_basis, lattice_dims, rank_kernel_image
from .groebner import DEFAULT_DEGREE_CAP, QuotientPresentation, class_vector, local_quotient
from .polyring import (
    Monomial,
    Polynomial,
    VariableSet,
    jacobian_ideal,
    parse_polynomial,
)


class GermError(ValueError):
    pass


class SmoothGerm(GermError):
    """The polynomial is not in m^2: no singularity at the origin."""


class InternalMismatch(RuntimeError):
    """Two independent computations of the same number disagree."""


class BSViolation(RuntimeError):
    """f^k is still nonzero in the Milnor algebra for k = number of variables."""


class NotQuasiHomogeneous(ValueError):
    pass


class AssertionFailure(AssertionError):
    """A checked identity or inequality failed; ``values`` holds everything involved."""

    def __init__(self, message: str, values: dict | None = None):
        super().__init__(message)
        self.values = dict(values or {})


@dataclass(frozen=True)
class Germ:
    poly: Polynomial
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        for m in self.poly.support():
            if sum(m) < 2:
                raise SmoothGerm(
                    f"{self.poly} has a term of degree {sum(m)}; a germ must lie in m^2"
                )

    @classmethod
    def parse(cls, text: str, vars: VariableSet | str | Sequence[str], name: str | None = None) -> "Germ":
        if isinstance(vars, str):
            vars = VariableSet.parse(vars)
        elif not isinstance(vars, VariableSet):
            vars = VariableSet(tuple(vars))
        return cls(parse_polynomial(text, vars), name)

    @property
    def vars(self) -> VariableSet:
        return self.poly.vars

    @property
    def arity(self) -> int:
        return self.poly.vars.arity

    def __str__(self):
        return str(self.poly)


# -- the Milnor algebra --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MilnorAlgebra:
    """M_f with a monomial basis and the matrix of multiplication by f.

    Built either from a Groebner presentation of J_f, or (for germs in
    separated variables) as the tensor product of the blocks' algebras.
    """

    germ: Germ
    basis: tuple[Monomial, ...]
    mult_f: RatMatrix
    quotient: QuotientPresentation | None = None
    factors: tuple["MilnorAlgebra", ...] = ()

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def unit_index(self) -> int:
        return self.basis.index((0,) * self.germ.arity)

    def unit_vector(self) -> tuple[Fraction, ...]:
        v = [Fraction(0)] * self.dim
        v[self.unit_index] = Fraction(1)
        return tuple(v)

    def mult_matrix(self, p: Polynomial) -> RatMatrix:
        """Matrix of multiplication by ``p``; needs a Groebner presentation."""
        if self.quotient is None:
            raise ValueError("algebra was assembled from factors; no presentation to reduce in")
        cols = [
            class_vector(p.mul_monomial(b), self.quotient) for b in self.basis
        ]
        return RatMatrix.from_columns(cols, self.dim)


def variable_blocks(f: Polynomial) -> list[list[int]]:
    """Connected components of variables that share a term of ``f``; unused variables are singletons."""
    n = f.vars.arity
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for m in f.support():
        used = [i for i, e in enumerate(m) if e]
        for i in used[1:]:
            parent[find(i)] = find(used[0])
    blocks: dict[int, list[int]] = {}
    for i in range(n):
        blocks.setdefault(find(i), []).append(i)
    return sorted(blocks.values())


def _restrict(f: Polynomial, block: list[int]) -> Polynomial:
    vars = VariableSet(tuple(f.vars.names[i] for i in block))
    d = {}
    for m, c in f.as_dict().items():
        if all(m[i] == 0 for i in range(len(m)) if i not in block):
            d[tuple(m[i] for i in block)] = c
    return Polynomial(d, vars)


@lru_cache(maxsize=256)
def _presentation(poly: Polynomial, tjurina: bool, degree_cap: int) -> QuotientPresentation:
    gens = jacobian_ideal(poly)
    if tjurina:
        gens = gens + [poly]
    return local_quotient(gens, degree_cap)


@lru_cache(maxsize=256)
def milnor_algebra(g: Germ, degree_cap: int = DEFAULT_DEGREE_CAP, split: bool = True) -> MilnorAlgebra:
    """Milnor algebra of ``g``; germs in separated variables are assembled blockwise when ``split``."""
    f = g.poly
    blocks = variable_blocks(f) if split else [list(range(g.arity))]
    if len(blocks) > 1:
        algs = [milnor_algebra(Germ(_restrict(f, b)), degree_cap, True) for b in blocks]
        return _tensor_blocks(g, blocks, algs)
    q = _presentation(f, False, degree_cap)
    cols = [class_vector(f.mul_monomial(b), q) for b in q.basis_monomials]
    return MilnorAlgebra(g, q.basis_monomials, RatMatrix.from_columns(cols, q.dimension), q)


def _tensor_blocks(g: Germ, blocks: list[list[int]], algs: list[MilnorAlgebra]) -> MilnorAlgebra:
    n = g.arity
    basis: list[list[int]] = [[0] * n]
    M = RatMatrix.zeros(1, 1)
    for block, alg in zip(blocks, algs):
        new_basis = []
        for m in basis:
            for b in alg.basis:
                e = list(m)
                for i, k in zip(block, b):
                    e[i] += k
                new_basis.append(e)
        basis = new_basis
        M = exactla.kronecker_sum(M, alg.mult_f)
    return MilnorAlgebra(g, tuple(tuple(m) for m in basis), M, None, tuple(algs))


def clear_caches() -> None:
    """Forget memoised quotients and algebras (for timing runs)."""
    _presentation.cache_clear()
    milnor_algebra.cache_clear()
    _rank_ker_im.cache_clear()


def mult_by_f_matrix(g: Germ, degree_cap: int = DEFAULT_DEGREE_CAP) -> MilnorAlgebra:
    return milnor_algebra(g, degree_cap)


def milnor_number(g: Germ, degree_cap: int = DEFAULT_DEGREE_CAP) -> int:
    return milnor_algebra(g, degree_cap).dim


def tjurina_quotient(g: Germ, degree_cap: int = DEFAULT_DEGREE_CAP) -> QuotientPresentation:
    return _presentation(g.poly, True, degree_cap)


@lru_cache(maxsize=256)
def _rank_ker_im(alg: MilnorAlgebra):
    return rank_kernel_image(alg.mult_f)


def tjurina_number(g: Germ, degree_cap: int = DEFAULT_DEGREE_CAP) -> int:
    """tau from the quotient by (f) + J_f, cross-checked against mu - rank(mult_f)."""
    alg = milnor_algebra(g, degree_cap)
    r, _, _ = _rank_ker_im(alg)
    tau = tjurina_quotient(g, degree_cap).dimension
    if tau != alg.dim - r:
        raise InternalMismatch(
            f"tau by quotient = {tau} but mu - rank(f) = {alg.dim} - {r} for {g.poly}"
        )
    return tau


# -- decomposition --------------------------------------------------------------


@dataclass(frozen=True)
class SubspaceDecomposition:
    """M_f = Ker ⊕ B ⊕ A with Im = (Ker∩Im) ⊕ B; ``kprime`` completes Ker∩Im inside Ker."""

    ker: Subspace
    im: Subspace
    ker_cap_im: Subspace
    B: Subspace
    A: Subspace
    kprime: Subspace

    @property
    def nu1(self) -> int:
        return self.ker_cap_im.dim

    @property
    def mu(self) -> int:
        return self.ker.ambient_dim

    @property
    def tau(self) -> int:
        return self.ker.dim

    def adapted_basis(self) -> list[tuple[str, tuple[Fraction, ...]]]:
        """Basis of M_f labelled by piece: 'KI' (Ker∩Im), 'K' (rest of Ker), 'B', 'A'."""
        out = [("KI", v) for v in self.ker_cap_im.basis]
        out += [("K", v) for v in self.kprime.basis]
        out += [("B", v) for v in self.B.basis]
        out += [("A", v) for v in self.A.basis]
        return out


def decompose(algebra: MilnorAlgebra | RatMatrix) -> SubspaceDecomposition:
    M = algebra.mult_f if isinstance(algebra, MilnorAlgebra) else algebra
    if isinstance(algebra, MilnorAlgebra):
        _, ker, im = _rank_ker_im(algebra)
    else:
        _, ker, im = rank_kernel_image(M)
    n = M.cols
    _, _, kci = lattice_dims(ker, im)
    B = complement_basis(kci, im)
    A = complement_basis(ker + im, Subspace.full(n))
    kprime = complement_basis(kci, ker)
    d = SubspaceDecomposition(ker, im, kci, B, A, kprime)
    mu, tau, nu1 = n, ker.dim, kci.dim
    if im.dim != mu - tau or B.dim != mu - tau - nu1 or A.dim != nu1:
        raise InternalMismatch(
            f"decomposition dimensions inconsistent: mu={mu} tau={tau} nu1={nu1} "
            f"im={im.dim} B={B.dim} A={A.dim}"
        )
    return d


def nu1(g: Germ, degree_cap: int = DEFAULT_DEGREE_CAP) -> int:
    return decompose(milnor_algebra(g, degree_cap)).nu1


# -- Briançon–Skoda exponent -----------------------------------------------------


def nilpotency_on(M: RatMatrix, v: Sequence[Fraction], limit: int | None = None) -> int:
    """Least k >= 1 with M^k v = 0; raises BSViolation past ``limit``."""
    k = 1
    w = M.apply(v)
    while any(w):
        k += 1
        if limit is not None and k > limit:
            raise BSViolation(f"M^{limit} v is still nonzero")
        if k > M.rows + 1:
            raise BSViolation("operator is not nilpotent on the vector")
        w = M.apply(w)
    return k


def bs_exponent(g: Germ, degree_cap: int = DEFAULT_DEGREE_CAP) -> int:
    """Least k with f^k in J_f, read off from powers of mult_f on the class of 1."""
    alg = milnor_algebra(g, degree_cap)
    return nilpotency_on(alg.mult_f, alg.unit_vector(), limit=g.arity)


# -- quasi-homogeneity and spectrum ------------------------------------------------


def detect_quasihomogeneous(g: Germ) -> tuple[Fraction, ...] | None:
    """Positive weights w with <w, a> = 1 on the support of f (in the given coordinates), or None."""
    support = g.poly.support()
    n = g.arity
    if not support:
        return None
    rows, piv = exactla.rref([tuple(Fraction(e) for e in a) + (Fraction(1),) for a in support], n + 1)
    if n in piv:
        return None  # inconsistent
    free = [j for j in range(n) if j not in piv]
    if not free:
        w = [Fraction(0)] * n
        for r, c in zip(rows, piv):
            w[c] = r[n]
        return tuple(w) if all(x > 0 for x in w) else None
    return _positive_point(rows, piv, free, n)


def _positive_point(rows, piv, free, n):
    # underdetermined: maximise the smallest weight, then solve exactly for the pivots
    import numpy as np
    from scipy.optimize import linprog

    A = np.array([[float(x) for x in r[:n]] for r in rows])
    b = np.array([float(r[n]) for r in rows])
    # variables (w_0..w_{n-1}, t); maximise t subject to A w = b, w_i >= t
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=np.hstack([A, np.zeros((len(rows), 1))]),
                  b_eq=b, bounds=[(0, None)] * n + [(None, 1)])
    if not res.success or res.x[-1] <= 1e-12:
        return None
    w = [Fraction(0)] * n
    for j in free:
        w[j] = Fraction(res.x[j]).limit_denominator(1000)
    for r, c in zip(rows, piv):
        w[c] = r[n] - sum(r[j] * w[j] for j in free)
    return tuple(w) if all(x > 0 for x in w) else None


def qh_spectrum(g: Germ, w: Sequence[Fraction] | None = None, degree_cap: int = DEFAULT_DEGREE_CAP) -> list[Fraction]:
    """Spectral numbers sum_i (a_i + 1) w_i over the monomial basis of M_f (Saito's normalisation)."""
    if w is None:
        w = detect_quasihomogeneous(g)
    if w is None:
        raise NotQuasiHomogeneous(f"{g.poly} is not quasi-homogeneous in the given coordinates")
    w = tuple(Fraction(x) for x in w)
    if any(sum(x * e for x, e in zip(w, a)) != 1 for a in g.poly.support()):
        raise NotQuasiHomogeneous(f"weights {w} do not make {g.poly} quasi-homogeneous")
    alg = milnor_algebra(g, degree_cap)
    spec = sorted(sum((Fraction(a + 1) * wi for a, wi in zip(m, w)), Fraction(0)) for m in alg.basis)
    for s in spec:
        if not 0 < s < g.arity:
            raise AssertionFailure(f"spectral number {s} outside (0, {g.arity})", {"spectrum": spec})
    return spec


# -- reports --------------------------------------------------------------------


@dataclass
class InvariantReport:
    mu: int
    tau: int
    nu1: int
    ebs: int
    arity: int
    mu_minus_tau: int
    quotient_mu_tau: Fraction
    qh_weights: tuple[Fraction, ...] | None = None
    qh_spectrum: list[Fraction] | None = None
    alpha_min: Fraction | None = None
    dim_B: int = 0
    dim_A: int = 0
    bs_verdict: str = ""
    name: str | None = None
    germ: str = ""
    vars: str = ""

    def to_dict(self) -> dict:
        def q(x):
            return None if x is None else str(x)

        return {
            "name": self.name,
            "germ": self.germ,
            "vars": self.vars,
            "arity": self.arity,
            "mu": self.mu,
            "tau": self.tau,
            "nu1": self.nu1,
            "ebs": self.ebs,
            "mu_minus_tau": self.mu_minus_tau,
            "quotient_mu_tau": q(self.quotient_mu_tau),
            "dim_B": self.dim_B,
            "dim_A": self.dim_A,
            "qh_weights": None if self.qh_weights is None else [q(x) for x in self.qh_weights],
            "qh_spectrum": None if self.qh_spectrum is None else [q(x) for x in self.qh_spectrum],
            "alpha_min": q(self.alpha_min),
            "bs_verdict": self.bs_verdict,
        }


def varchenko_bound(arity: int, alpha_min: Fraction) -> int:
    return math.floor(arity - 2 * alpha_min) + 1


def check_mu_tau_vs_bs(g: Germ, degree_cap: int = DEFAULT_DEGREE_CAP) -> str:
    """'ok' when mu/tau < e^BS (e^BS >= 2), 'equality-case' when e^BS = 1 and mu = tau."""
    mu = milnor_number(g, degree_cap)
    tau = tjurina_number(g, degree_cap)
    ebs = bs_exponent(g, degree_cap)
    return _bs_verdict(g, mu, tau, ebs, degree_cap)


def _bs_verdict(g: Germ, mu: int, tau: int, ebs: int, degree_cap: int) -> str:
    values = {"germ": str(g.poly), "mu": mu, "tau": tau, "ebs": ebs}
    if ebs == 1:
        if mu != tau:
            raise AssertionFailure("e^BS = 1 but mu != tau", values)
        verdict = "equality-case"
    else:
        if not Fraction(mu, tau) < ebs:
            raise AssertionFailure("mu/tau < e^BS fails", values)
        verdict = "ok"
    w = detect_quasihomogeneous(g)
    if w is not None:
        amin = qh_spectrum(g, w, degree_cap)[0]
        bound = varchenko_bound(g.arity, amin)
        if ebs > bound:
            raise AssertionFailure("e^BS exceeds floor(n+1-2 alpha_min)+1", {**values, "alpha_min": str(amin)})
    return verdict


def invariant_report(g: Germ, degree_cap: int = DEFAULT_DEGREE_CAP) -> InvariantReport:
    alg = milnor_algebra(g, degree_cap)
    mu = alg.dim
    tau = tjurina_number(g, degree_cap)
    d = decompose(alg)
    if d.tau != tau:
        raise InternalMismatch(f"dim Ker(f) = {d.tau} but tau = {tau}")
    ebs = bs_exponent(g, degree_cap)
    w = detect_quasihomogeneous(g)
    spec = qh_spectrum(g, w, degree_cap) if w is not None else None
    if w is not None and mu != tau:
        raise AssertionFailure("quasi-homogeneous germ with mu != tau", {"mu": mu, "tau": tau})
    return InvariantReport(
        mu=mu,
        tau=tau,
        nu1=d.nu1,
        ebs=ebs,
        arity=g.arity,
        mu_minus_tau=mu - tau,
        quotient_mu_tau=Fraction(mu, tau),
        qh_weights=w,
        qh_spectrum=spec,
        alpha_min=spec[0] if spec else None,
        dim_B=d.B.dim,
        dim_A=d.A.dim,
        bs_verdict=_bs_verdict(g, mu, tau, ebs, degree_cap),
        name=g.name,
        germ=str(g.poly),
        vars=str(g.vars),
    )
