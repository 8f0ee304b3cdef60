"""Sparse multivariate polynomials over Q, the degrevlex order and the germ text parser."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

Monomial = tuple[int, ...]

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class PolynomialError(ValueError):
    pass


class ParseError(PolynomialError):
    """Raised for malformed germ text; ``position`` is a 0-based offset into the input."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


def total_degree(m: Monomial) -> int:
    return sum(m)


def divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


def monomial_lcm(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x if x > y else y for x, y in zip(a, b))


def monomial_quotient(b: Monomial, a: Monomial) -> Monomial:
    return tuple(y - x for x, y in zip(a, b))


def monomial_product(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def monomials_of_degree(nvars: int, degree: int) -> Iterator[Monomial]:
    """All exponent vectors of length ``nvars`` summing to ``degree``."""
    if nvars == 0:
        if degree == 0:
            yield ()
        return
    if nvars == 1:
        yield (degree,)
        return
    for first in range(degree, -1, -1):
        for rest in monomials_of_degree(nvars - 1, degree - first):
            yield (first,) + rest


@dataclass(frozen=True)
class VariableSet:
    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        for name in names:
            if not _IDENT.match(name):
                raise PolynomialError(f"invalid variable name {name!r}")
        if len(set(names)) != len(names):
            raise PolynomialError(f"duplicate variable names in {names}")

    @classmethod
    def parse(cls, text: str) -> "VariableSet":
        return cls(tuple(s.strip() for s in text.split(",") if s.strip()))

    @property
    def arity(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise PolynomialError(f"unknown variable {name!r}") from None

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __add__(self, other: "VariableSet") -> "VariableSet":
        return VariableSet(self.names + other.names)

    def __str__(self) -> str:
        return ",".join(self.names)


class MonomialOrder:
    """Degree reverse lexicographic order on the declared variable order.

    ``weights`` only feeds :meth:`weighted_degree`; comparisons always use degrevlex.
    """

    kind = "degrevlex"

    def __init__(self, weights: Sequence[Fraction | int] | None = None):
        if weights is not None:
            weights = tuple(Fraction(w) for w in weights)
            if any(w <= 0 for w in weights):
                raise PolynomialError("weights must be positive")
        self.weights = weights

    @staticmethod
    def key(m: Monomial) -> tuple:
        # larger key = larger monomial
        return (sum(m), tuple(-e for e in reversed(m)))

    def compare(self, a: Monomial, b: Monomial) -> int:
        ka, kb = self.key(a), self.key(b)
        return (ka > kb) - (ka < kb)

    def weighted_degree(self, m: Monomial) -> Fraction:
        if self.weights is None:
            raise PolynomialError("order carries no weight vector")
        return weighted_degree(m, self.weights)

    def __eq__(self, other):
        return isinstance(other, MonomialOrder) and other.weights == self.weights

    def __hash__(self):
        return hash((self.kind, self.weights))

    def __repr__(self):
        return f"MonomialOrder(degrevlex, weights={self.weights})"


DEGREVLEX = MonomialOrder()


def weighted_degree(m: Monomial, w: Sequence[Fraction | int]) -> Fraction:
    if len(m) != len(w):
        raise PolynomialError(f"weight vector has length {len(w)}, monomial has {len(m)}")
    return sum((Fraction(wi) * e for wi, e in zip(w, m)), Fraction(0))


class Polynomial:
    """Immutable sparse polynomial with :class:`~fractions.Fraction` coefficients."""

    __slots__ = ("_terms", "vars", "_hash")

    def __init__(self, terms: Mapping[Monomial, Fraction | int] | Iterable, vars: VariableSet):
        items = terms.items() if isinstance(terms, Mapping) else terms
        n = vars.arity
        d: dict[Monomial, Fraction] = {}
        for m, c in items:
            m = tuple(m)
            if len(m) != n:
                raise PolynomialError(f"monomial {m} does not match arity {n}")
            if any(e < 0 for e in m):
                raise PolynomialError(f"negative exponent in {m}")
            c = d.get(m, 0) + Fraction(c)
            if c:
                d[m] = c
            else:
                d.pop(m, None)
        self._terms = d
        self.vars = vars
        self._hash = None

    @classmethod
    def _raw(cls, d: dict[Monomial, Fraction], vars: VariableSet) -> "Polynomial":
        # d must already be normalized (no zeros); ownership passes to the result
        p = object.__new__(cls)
        p._terms = d
        p.vars = vars
        p._hash = None
        return p

    @classmethod
    def zero(cls, vars: VariableSet) -> "Polynomial":
        return cls._raw({}, vars)

    @classmethod
    def constant(cls, c, vars: VariableSet) -> "Polynomial":
        c = Fraction(c)
        return cls._raw({(0,) * vars.arity: c} if c else {}, vars)

    @classmethod
    def monomial(cls, m: Monomial, vars: VariableSet, coef=1) -> "Polynomial":
        return cls({tuple(m): coef}, vars)

    @classmethod
    def variable(cls, name: str | int, vars: VariableSet) -> "Polynomial":
        i = vars.index(name) if isinstance(name, str) else name
        if not 0 <= i < vars.arity:
            raise PolynomialError(f"variable index {i} out of range")
        m = [0] * vars.arity
        m[i] = 1
        return cls._raw({tuple(m): Fraction(1)}, vars)

    # -- inspection -------------------------------------------------------

    def as_dict(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def terms(self, order: MonomialOrder = DEGREVLEX) -> list[tuple[Monomial, Fraction]]:
        """Terms in descending order."""
        return sorted(self._terms.items(), key=lambda t: order.key(t[0]), reverse=True)

    def support(self) -> list[Monomial]:
        return [m for m, _ in self.terms()]

    def coefficient(self, m: Monomial) -> Fraction:
        return self._terms.get(tuple(m), Fraction(0))

    def leading_term(self, order: MonomialOrder = DEGREVLEX) -> tuple[Monomial, Fraction]:
        if not self._terms:
            raise PolynomialError("zero polynomial has no leading term")
        m = max(self._terms, key=order.key)
        return m, self._terms[m]

    def leading_monomial(self, order: MonomialOrder = DEGREVLEX) -> Monomial:
        return self.leading_term(order)[0]

    def degree(self) -> int:
        return max((sum(m) for m in self._terms), default=-1)

    def order_at_origin(self) -> int:
        """Lowest total degree of a term (the multiplicity); -1 for zero."""
        return min((sum(m) for m in self._terms), default=-1)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def used_variables(self) -> set[int]:
        return {i for m in self._terms for i, e in enumerate(m) if e}

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "Polynomial"):
        if other.vars != self.vars:
            raise PolynomialError(f"variable sets differ: {self.vars} vs {other.vars}")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(other, self.vars)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        d = dict(self._terms)
        for m, c in other._terms.items():
            s = d.get(m, 0) + c
            if s:
                d[m] = s
            else:
                d.pop(m, None)
        return Polynomial._raw(d, self.vars)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw({m: -c for m, c in self._terms.items()}, self.vars)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "Polynomial":
        c = Fraction(c)
        if not c:
            return Polynomial.zero(self.vars)
        return Polynomial._raw({m: c * v for m, v in self._terms.items()}, self.vars)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        d: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                d[m] = d.get(m, 0) + c1 * c2
        return Polynomial._raw({m: c for m, c in d.items() if c}, self.vars)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise PolynomialError("exponent must be a nonnegative integer")
        result = Polynomial.constant(1, self.vars)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def mul_monomial(self, t: Monomial, c=1) -> "Polynomial":
        c = Fraction(c)
        return Polynomial._raw(
            {tuple(a + b for a, b in zip(m, t)): c * v for m, v in self._terms.items()}, self.vars
        )

    def truncate(self, degree: int) -> "Polynomial":
        """Drop every term of total degree >= ``degree``."""
        return Polynomial._raw({m: c for m, c in self._terms.items() if sum(m) < degree}, self.vars)

    def derivative(self, i: int) -> "Polynomial":
        return partial_derivative(self, i)

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.vars == other.vars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == Polynomial.constant(other, self.vars)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.vars, frozenset(self._terms.items())))
        return self._hash

    # -- variables --------------------------------------------------------

    def embed(self, vars: VariableSet, positions: Sequence[int]) -> "Polynomial":
        """Re-express over ``vars``, sending variable ``i`` to ``positions[i]``."""
        n = vars.arity
        d = {}
        for m, c in self._terms.items():
            e = [0] * n
            for i, k in enumerate(m):
                e[positions[i]] += k
            d[tuple(e)] = c
        return Polynomial(d, vars)

    def __str__(self):
        return to_text(self)

    def __repr__(self):
        return f"Polynomial({to_text(self)!r}, vars={self.vars})"


def partial_derivative(p: Polynomial, i: int) -> Polynomial:
    if not 0 <= i < p.vars.arity:
        raise PolynomialError(f"variable index {i} out of range for arity {p.vars.arity}")
    d = {}
    for m, c in p._terms.items():
        e = m[i]
        if e:
            d[m[:i] + (e - 1,) + m[i + 1 :]] = c * e
    return Polynomial._raw(d, p.vars)


def jacobian_ideal(f: Polynomial) -> list[Polynomial]:
    return [partial_derivative(f, i) for i in range(f.vars.arity)]


_FRESH = "uvwstpqrabcdeghijklmnoz"


def rename_into_disjoint(p: Polynomial, q: Polynomial) -> tuple[Polynomial, Polynomial, VariableSet]:
    """Place ``p`` and ``q`` in disjoint variable blocks; clashing names of ``q`` get fresh ones."""
    taken = set(p.vars.names) | set(q.vars.names)
    fresh = (c for c in _FRESH if c not in taken)
    counter = 0
    new_names = []
    for name in q.vars.names:
        if name in p.vars.names:
            candidate = next(fresh, None)
            while candidate is None or candidate in taken:
                candidate = f"y{counter}"
                counter += 1
            taken.add(candidate)
            new_names.append(candidate)
        else:
            new_names.append(name)
    combined = VariableSet(p.vars.names + tuple(new_names))
    n1 = p.vars.arity
    p2 = p.embed(combined, range(n1))
    q2 = q.embed(combined, range(n1, combined.arity))
    return p2, q2, combined


# -- text -----------------------------------------------------------------

def _format_coef(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _format_monomial(m: Monomial, vars: VariableSet) -> str:
    parts = []
    for name, e in zip(vars.names, m):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def to_text(p: Polynomial, order: MonomialOrder = DEGREVLEX) -> str:
    """Canonical text: terms in descending order, parseable by :func:`parse_polynomial`."""
    if p.is_zero():
        return "0"
    out = []
    for k, (m, c) in enumerate(p.terms(order)):
        sign = "-" if c < 0 else "+"
        a = abs(c)
        mono = _format_monomial(m, p.vars)
        if not mono:
            body = _format_coef(a)
        elif a == 1:
            body = mono
        else:
            body = f"{_format_coef(a)}*{mono}"
        if k == 0:
            out.append(body if sign == "+" else f"-{body}")
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<var>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*/^]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = mt.lastgroup
        start = mt.start(kind)
        tokens.append((kind, mt.group(kind), start))
        pos = mt.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, vars: VariableSet):
        self.text = text
        self.vars = vars
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], self.text)

    def expr(self) -> dict[Monomial, Fraction]:
        acc: dict[Monomial, Fraction] = {}
        sign = 1
        if self.peek()[:2] == ("op", "-"):
            self.take()
            sign = -1
        elif self.peek()[:2] == ("op", "+"):
            self.take()
        while True:
            m, c = self.term()
            acc[m] = acc.get(m, 0) + sign * c
            tok = self.peek()
            if tok[0] == "end":
                break
            if tok[0] == "op" and tok[1] in "+-":
                self.take()
                sign = 1 if tok[1] == "+" else -1
                continue
            self.fail(f"expected '+', '-' or end of input, found {tok[1]!r}")
        return acc

    def term(self) -> tuple[Monomial, Fraction]:
        coef = Fraction(1)
        exps = [0] * self.vars.arity
        tok = self.peek()
        if tok[0] == "num":
            coef = self.coef()
            if self.peek()[:2] == ("op", "*"):
                self.take()
                self.factor(exps)
            elif self.peek()[0] == "var":
                self.factor(exps)
            else:
                return tuple(exps), coef
        elif tok[0] == "var":
            self.factor(exps)
        else:
            self.fail("expected a coefficient or a variable")
        while self.peek()[:2] == ("op", "*"):
            self.take()
            self.factor(exps)
        return tuple(exps), coef

    def coef(self) -> Fraction:
        num = int(self.take()[1])
        if self.peek()[:2] == ("op", "/"):
            self.take()
            tok = self.peek()
            if tok[0] != "num":
                self.fail("expected an unsigned integer denominator")
            self.take()
            den = int(tok[1])
            if den == 0:
                self.fail("zero denominator", tok)
            return Fraction(num, den)
        return Fraction(num)

    def factor(self, exps: list[int]):
        tok = self.peek()
        if tok[0] != "var":
            self.fail("expected a variable")
        self.take()
        if tok[1] not in self.vars.names:
            self.fail(f"unknown variable {tok[1]!r}", tok)
        k = 1
        if self.peek()[:2] == ("op", "^"):
            self.take()
            e = self.peek()
            if e[0] != "num":
                self.fail("expected an unsigned integer exponent")
            self.take()
            k = int(e[1])
        exps[self.vars.index(tok[1])] += k


def parse_polynomial(text: str, vars: VariableSet) -> Polynomial:
    """Parse germ text such as ``"y^4 - x^5 + x^3*y^2"`` over ``vars``."""
    if not text.strip():
        raise ParseError("empty input", 0, text)
    terms = _Parser(text, vars).expr()
    return Polynomial(terms, vars)
