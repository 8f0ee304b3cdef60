"""Buchberger's algorithm and finite presentations of local quotients C{x}/I.

Local dimensions are obtained with a global (degrevlex) order on ``I + m^N``:
once ``dim Q[x]/(I + m^N) == dim Q[x]/(I + m^(N+1))`` we have ``m^N`` inside
``I + m^(N+1)``, hence inside ``I C{x}`` by Nakayama, and the truncated
quotient *is* the local quotient.  Normal forms modulo ``I + m^N`` are then
honest coordinates (not up to a unit), which the matrix code relies on.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .polyring import (
    DEGREVLEX,
    Monomial,
    MonomialOrder,
    Polynomial,
    PolynomialError,
    VariableSet,
    divides,
    monomial_lcm,
    monomials_of_degree,
)

log = logging.getLogger(__name__)

DEFAULT_DEGREE_CAP = 128

_key = MonomialOrder.key


class NonIsolated(ArithmeticError):
    """The quotient dimension did not stabilize below the degree cap."""

    def __init__(self, message: str, last_dimensions: Sequence[tuple[int, int]] = ()):
        super().__init__(message)
        self.last_dimensions = list(last_dimensions)


class EmptyInput(ValueError):
    pass


# -- internal polynomial kernels (dict monomial -> Fraction, monic) ---------------


class _Elem:
    __slots__ = ("lm", "tail", "deg", "poly")

    def __init__(self, poly: dict):
        lm = max(poly, key=_key)
        c = poly[lm]
        if c != 1:
            inv = 1 / c
            poly = {m: v * inv for m, v in poly.items()}
        self.lm = lm
        self.deg = sum(lm)
        self.poly = poly
        self.tail = [(m, v) for m, v in poly.items() if m != lm]


class _Reducer:
    """Reduces dict polynomials modulo a growing list of monic elements (and m^N)."""

    def __init__(self, truncation: int | None):
        self.elems: list[_Elem] = []
        self.truncation = truncation
        self._div_cache: dict[Monomial, tuple[int, int]] = {}

    def add(self, e: _Elem) -> int:
        self.elems.append(e)
        return len(self.elems) - 1

    def divisor(self, m: Monomial) -> int:
        cached = self._div_cache.get(m)
        start = 0
        if cached is not None:
            idx, checked = cached
            if idx >= 0:
                return idx
            start = checked
        elems = self.elems
        for k in range(start, len(elems)):
            lm = elems[k].lm
            if all(a <= b for a, b in zip(lm, m)):
                self._div_cache[m] = (k, k + 1)
                return k
        self._div_cache[m] = (-1, len(elems))
        return -1

    def reduce(self, p: dict, skip: int = -1) -> dict:
        """Full reduction; ``p`` is consumed.  ``skip`` excludes one element (for inter-reduction)."""
        N = self.truncation
        if N is not None:
            p = {m: c for m, c in p.items() if sum(m) < N}
        heap = [(_key(m), m) for m in p]
        heap = [((-k[0], tuple(-x for x in k[1])), m) for k, m in heap]
        heapq.heapify(heap)
        rem: dict[Monomial, Fraction] = {}
        elems = self.elems
        while heap:
            _, m = heapq.heappop(heap)
            c = p.pop(m, None)
            if c is None:
                continue
            k = self.divisor(m) if skip < 0 else self._divisor_skipping(m, skip)
            if k < 0:
                rem[m] = c
                continue
            e = elems[k]
            q = tuple(a - b for a, b in zip(m, e.lm))
            for tm, tc in e.tail:
                nm = tuple(a + b for a, b in zip(tm, q))
                if N is not None and sum(nm) >= N:
                    continue
                old = p.get(nm)
                if old is None:
                    p[nm] = -c * tc
                    k2 = _key(nm)
                    heapq.heappush(heap, ((-k2[0], tuple(-x for x in k2[1])), nm))
                else:
                    new = old - c * tc
                    if new:
                        p[nm] = new
                    else:
                        del p[nm]
        return rem

    def _divisor_skipping(self, m: Monomial, skip: int) -> int:
        for k, e in enumerate(self.elems):
            if k != skip and e is not None and all(a <= b for a, b in zip(e.lm, m)):
                return k
        return -1


# -- public types --------------------------------------------------------------


@dataclass(frozen=True)
class GroebnerBasis:
    """Reduced Groebner basis; every generator is monic in its leading term."""

    generators: tuple[Polynomial, ...]
    order: MonomialOrder
    vars: VariableSet
    truncation: int | None = None  # when set, the basis contains all monomials of this degree

    @property
    def leading_monomials(self) -> tuple[Monomial, ...]:
        return tuple(g.leading_monomial(self.order) for g in self.generators)

    def __len__(self):
        return len(self.generators)

    def _reducer(self) -> _Reducer:
        r = _Reducer(self.truncation)
        for g in self.generators:
            if self.truncation is not None and g.degree() >= self.truncation and len(g) == 1:
                continue  # the m^N monomials are handled by truncation
            r.add(_Elem(g.as_dict()))
        return r

    def contains(self, p: Polynomial) -> bool:
        return normal_form(p, self).is_zero()


def _s_poly(a: _Elem, b: _Elem) -> dict:
    L = monomial_lcm(a.lm, b.lm)
    qa = tuple(x - y for x, y in zip(L, a.lm))
    qb = tuple(x - y for x, y in zip(L, b.lm))
    d: dict[Monomial, Fraction] = {}
    for m, c in a.tail:
        nm = tuple(x + y for x, y in zip(m, qa))
        d[nm] = d.get(nm, 0) + c
    for m, c in b.tail:
        nm = tuple(x + y for x, y in zip(m, qb))
        d[nm] = d.get(nm, 0) - c
    return {m: c for m, c in d.items() if c}


def _pair_key(L: Monomial):
    k = _key(L)
    return (k[0], tuple(-x for x in k[1]))  # ascending: small lcm first


def buchberger(
    generators: Sequence[Polynomial],
    order: MonomialOrder = DEGREVLEX,
    truncation: int | None = None,
) -> GroebnerBasis:
    """Reduced Groebner basis of the ideal generated by ``generators``.

    With ``truncation=N`` the result is a Groebner basis of ``(generators) + m^N``:
    terms of degree ``>= N`` are discarded throughout and the degree-``N``
    monomials not already covered are appended to the output.
    """
    gens = [g for g in generators if not g.is_zero()]
    if not generators:
        raise EmptyInput("no generators")
    vars = generators[0].vars
    for g in generators:
        if g.vars != vars:
            raise PolynomialError("generators live over different variable sets")
    N = truncation
    red = _Reducer(N)
    # pending pairs: (lcm sort key, seq, i, j) with j == -1 meaning the m^N pair (i, m)
    heap: list = []
    pending: set = set()
    seq = 0

    def push(item_key, i, j, m=None):
        nonlocal seq
        heapq.heappush(heap, (item_key, seq, i, j, m))
        pending.add((i, j) if m is None else (i, m))
        seq += 1

    def insert(poly: dict):
        e = _Elem(poly)
        idx = red.add(e)
        for j in range(idx):
            ej = red.elems[j]
            if ej is None:
                continue
            L = monomial_lcm(e.lm, ej.lm)
            if N is not None and sum(L) >= N:
                continue
            push(_pair_key(L), j, idx)
        if N is not None and e.deg < N:
            lm = e.lm
            for t in monomials_of_degree(vars.arity, N - e.deg):
                m = tuple(a + b for a, b in zip(lm, t))
                push(_pair_key(m), idx, -1, m)

    for g in sorted(gens, key=lambda g: _key(g.leading_monomial()), reverse=False):
        r = red.reduce(g.as_dict())
        if r:
            insert(r)

    reductions = 0
    while heap:
        _, _, i, j, m = heapq.heappop(heap)
        ei = red.elems[i]
        if j >= 0:
            pending.discard((i, j))
            ej = red.elems[j]
            if all(a == 0 or b == 0 for a, b in zip(ei.lm, ej.lm)):
                continue  # coprime leading monomials
            L = monomial_lcm(ei.lm, ej.lm)
            if _chain(red, i, j, L, pending):
                continue
            s = _s_poly(ei, ej)
        else:
            pending.discard((i, m))
            if _chain_truncated(red, i, m, pending):
                continue
            q = tuple(a - b for a, b in zip(m, ei.lm))
            s = {}
            for tm, tc in ei.tail:
                nm = tuple(a + b for a, b in zip(tm, q))
                if sum(nm) < N:
                    s[nm] = tc
        reductions += 1
        r = red.reduce(s)
        if r:
            insert(r)
    log.debug("buchberger: %d reductions, %d elements", reductions, len(red.elems))
    return _finalize(red, vars, order, N)


def _chain(red: _Reducer, i: int, j: int, L: Monomial, pending: set) -> bool:
    for k, ek in enumerate(red.elems):
        if k == i or k == j:
            continue
        if not all(a <= b for a, b in zip(ek.lm, L)):
            continue
        if (min(i, k), max(i, k)) in pending or (min(j, k), max(j, k)) in pending:
            continue
        return True
    return False


def _chain_truncated(red: _Reducer, i: int, m: Monomial, pending: set) -> bool:
    # pair of element i with the monomial generator m (lm_i divides m)
    for k, ek in enumerate(red.elems):
        if k == i:
            continue
        if not all(a <= b for a, b in zip(ek.lm, m)):
            continue
        if (min(i, k), max(i, k)) in pending or (k, m) in pending:
            continue
        return True
    return False


def _finalize(red: _Reducer, vars: VariableSet, order: MonomialOrder, N: int | None) -> GroebnerBasis:
    elems = [e for e in red.elems if e is not None]
    # minimal basis: drop elements whose leading monomial is divisible by another's
    elems.sort(key=lambda e: _key(e.lm))
    minimal: list[_Elem] = []
    for e in elems:
        if not any(all(a <= b for a, b in zip(f.lm, e.lm)) for f in minimal):
            minimal.append(e)
    # tail reduction against the minimal basis
    fin = _Reducer(N)
    for e in minimal:
        fin.add(e)
    out = []
    for k, e in enumerate(minimal):
        tail = fin.reduce(dict(e.tail), skip=k)
        d = {e.lm: Fraction(1)}
        d.update(tail)
        out.append(Polynomial._raw(d, vars))
    if N is not None:
        lms = [e.lm for e in minimal]
        for m in monomials_of_degree(vars.arity, N):
            if not any(all(a <= b for a, b in zip(lm, m)) for lm in lms):
                out.append(Polynomial._raw({m: Fraction(1)}, vars))
    out.sort(key=lambda g: _key(g.leading_monomial()))
    return GroebnerBasis(tuple(out), order, vars, N)


def normal_form(p: Polynomial, gb: GroebnerBasis) -> Polynomial:
    if p.vars != gb.vars:
        raise PolynomialError("polynomial and basis live over different variable sets")
    return Polynomial._raw(gb._reducer().reduce(p.as_dict()), gb.vars)


# -- local quotients -----------------------------------------------------------


def standard_monomials(gb: GroebnerBasis, bound: int) -> list[Monomial]:
    """Monomials of total degree < ``bound`` divisible by no leading monomial, ascending."""
    lms = gb.leading_monomials
    out = []
    for d in range(bound):
        for m in monomials_of_degree(gb.vars.arity, d):
            if not any(divides(lm, m) for lm in lms):
                out.append(m)
    out.sort(key=_key)
    return out


@dataclass(frozen=True)
class QuotientPresentation:
    """Finite presentation of C{x}/I via the standard monomials of ``I + m^N``."""

    basis_monomials: tuple[Monomial, ...]
    gb: GroebnerBasis
    truncation_N: int
    index: dict = field(compare=False, repr=False)

    @property
    def dimension(self) -> int:
        return len(self.basis_monomials)

    @property
    def vars(self) -> VariableSet:
        return self.gb.vars

    def reducer(self) -> _Reducer:
        # cached per instance; the reducer only grows its divisibility cache
        r = self.__dict__.get("_red")
        if r is None:
            r = self.gb._reducer()
            object.__setattr__(self, "_red", r)
        return r

    def class_vector(self, p: Polynomial) -> list[Fraction]:
        return class_vector(p, self)


def _truncated_quotient(gens: Sequence[Polynomial], N: int) -> tuple[GroebnerBasis, list[Monomial]]:
    gb = buchberger(gens, DEGREVLEX, truncation=N)
    return gb, standard_monomials(gb, N)


def initial_truncation(generators: Sequence[Polynomial]) -> int:
    return 2 + 2 * max(g.degree() for g in generators)


def local_quotient(
    generators: Sequence[Polynomial], degree_cap: int = DEFAULT_DEGREE_CAP
) -> QuotientPresentation:
    """Presentation of C{x}/(generators) for an ideal whose zero locus is isolated at 0."""
    gens = [g for g in generators if not g.is_zero()]
    if not generators:
        raise EmptyInput("no generators")
    vars = generators[0].vars
    if not gens:
        if vars.arity == 0:
            gb = GroebnerBasis((), DEGREVLEX, vars, None)
            return QuotientPresentation(((),), gb, 1, {(): 0})
        raise NonIsolated("zero ideal has infinite-dimensional quotient")
    for g in gens:
        if g.coefficient((0,) * vars.arity):
            # a unit: the local quotient is zero
            gb = buchberger([Polynomial.constant(1, vars)], DEGREVLEX)
            return QuotientPresentation((), gb, 1, {})
    N = max(initial_truncation(gens), 2)
    history = []
    if N > degree_cap:
        raise NonIsolated(f"initial truncation {N} exceeds the degree cap {degree_cap}")
    gb, basis = _truncated_quotient(gens, N)
    while True:
        if N + 1 > degree_cap:
            raise NonIsolated(
                f"quotient dimension did not stabilize below degree {degree_cap}", history
            )
        gb1, basis1 = _truncated_quotient(gens, N + 1)
        history.append((N, len(basis)))
        log.debug("local_quotient: N=%d dim=%d; N+1 dim=%d", N, len(basis), len(basis1))
        if len(basis1) == len(basis):
            break
        N = math.ceil(1.5 * N)
        if N > degree_cap:
            raise NonIsolated(
                f"quotient dimension did not stabilize below degree {degree_cap}", history
            )
        gb, basis = _truncated_quotient(gens, N)
    return QuotientPresentation(tuple(basis), gb, N, {m: i for i, m in enumerate(basis)})


def class_vector(p: Polynomial, q: QuotientPresentation) -> list[Fraction]:
    """Exact coordinates of the class of ``p`` on ``q.basis_monomials``."""
    if p.vars != q.vars:
        raise PolynomialError("polynomial and quotient live over different variable sets")
    r = q.reducer().reduce(p.as_dict())
    v = [Fraction(0)] * q.dimension
    for m, c in r.items():
        v[q.index[m]] = c
    return v
