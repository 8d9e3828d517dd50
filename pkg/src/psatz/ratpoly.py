"""Exact rational arithmetic and sparse multivariate polynomials.

Coefficients are :class:`fractions.Fraction`, which is always kept in lowest
terms with a positive denominator.  Polynomials are immutable maps from
:class:`Monomial` to nonzero coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Union

Rational = Fraction
Scalar = Union[int, Fraction]


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise TypeError(f"expected an exact rational, got {type(x).__name__}")
    return Fraction(x)


class Monomial:
    """Power product of variables; absent variables have exponent zero."""

    __slots__ = ("_powers", "_hash")

    def __init__(self, powers: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        items = powers.items() if isinstance(powers, Mapping) else powers
        acc: dict[str, int] = {}
        for var, exp in items:
            if exp < 0:
                raise ValueError(f"negative exponent for {var}")
            if exp:
                acc[var] = acc.get(var, 0) + int(exp)
        self._powers = tuple(sorted(acc.items()))
        self._hash = hash(self._powers)

    @classmethod
    def one(cls) -> "Monomial":
        return _ONE

    @classmethod
    def var(cls, name: str, exp: int = 1) -> "Monomial":
        return cls({name: exp})

    @property
    def powers(self) -> tuple[tuple[str, int], ...]:
        return self._powers

    @property
    def degree(self) -> int:
        return sum(e for _, e in self._powers)

    def exponent(self, var: str) -> int:
        for v, e in self._powers:
            if v == var:
                return e
        return 0

    def variables(self) -> frozenset[str]:
        return frozenset(v for v, _ in self._powers)

    def __mul__(self, other: "Monomial") -> "Monomial":
        if not isinstance(other, Monomial):
            return NotImplemented
        return Monomial(self._powers + other._powers)

    def __eq__(self, other) -> bool:
        return isinstance(other, Monomial) and self._powers == other._powers

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"Monomial({dict(self._powers)!r})"

    def __str__(self) -> str:
        if not self._powers:
            return "1"
        return "*".join(v if e == 1 else f"{v}^{e}" for v, e in self._powers)

    def format(self, order: Sequence[str] | None = None) -> str:
        if not self._powers or order is None:
            return str(self)
        rank = {v: i for i, v in enumerate(order)}
        ps = sorted(self._powers, key=lambda ve: (rank.get(ve[0], len(rank)), ve[0]))
        return "*".join(v if e == 1 else f"{v}^{e}" for v, e in ps)


_ONE = Monomial()


def grlex_key(mono: Monomial, variables: Sequence[str]):
    """Sort key: total degree first, then earlier variables weigh more.

    Ascending order over (a, b) runs 1, a, b, a^2, a*b, b^2, ...
    """
    extra = sorted(mono.variables() - set(variables))
    order = list(variables) + extra
    return (mono.degree, tuple(-mono.exponent(v) for v in order))


def monomials_up_to(variables: Sequence[str], degree: int) -> list[Monomial]:
    """All monomials of total degree <= ``degree`` in graded-lex order."""
    out = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(variables, d):
            out.append(Monomial([(v, 1) for v in combo]))
    return sorted(out, key=lambda m: grlex_key(m, variables))


class Polynomial:
    """Sparse multivariate polynomial with rational coefficients."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        clean: dict[Monomial, Fraction] = {}
        for mono, c in (terms or {}).items():
            c = as_rational(c)
            if c:
                clean[mono] = clean.get(mono, Fraction(0)) + c
        self._terms = MappingProxyType({m: c for m, c in clean.items() if c})
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[Monomial, Fraction]) -> "Polynomial":
        p = cls.__new__(cls)
        p._terms = MappingProxyType({m: c for m, c in terms.items() if c})
        p._hash = None
        return p

    @classmethod
    def constant(cls, c: Scalar) -> "Polynomial":
        return cls({_ONE: c})

    @classmethod
    def var(cls, name: str) -> "Polynomial":
        return cls({Monomial.var(name): 1})

    @classmethod
    def monomial(cls, mono: Monomial, c: Scalar = 1) -> "Polynomial":
        return cls({mono: c})

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return self._terms

    def coefficient(self, mono: Monomial) -> Fraction:
        return self._terms.get(mono, Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(m.degree == 0 for m in self._terms)

    @property
    def degree(self) -> int:
        """Total degree; the zero polynomial has degree -1."""
        return max((m.degree for m in self._terms), default=-1)

    def variables(self) -> frozenset[str]:
        out: set[str] = set()
        for m in self._terms:
            out |= m.variables()
        return frozenset(out)

    # -- arithmetic ---------------------------------------------------------

    @staticmethod
    def _coerce(x) -> "Polynomial":
        if isinstance(x, Polynomial):
            return x
        return Polynomial.constant(as_rational(x))

    def __add__(self, other) -> "Polynomial":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        acc = dict(self._terms)
        for m, c in other._terms.items():
            acc[m] = acc.get(m, Fraction(0)) + c
        return Polynomial._raw(acc)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            c = Fraction(other)
            return Polynomial._raw({m: c * v for m, v in self._terms.items()})
        if not isinstance(other, Polynomial):
            return NotImplemented
        acc: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = m1 * m2
                acc[m] = acc.get(m, Fraction(0)) + c1 * c2
        return Polynomial._raw(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be nonnegative integers")
        result, base = Polynomial.constant(1), self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return dict(self._terms) == dict(other._terms)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- evaluation and substitution ----------------------------------------

    def eval(self, point: Mapping[str, Scalar]) -> Fraction:
        """Exact value at ``point``; every variable of the polynomial must be assigned."""
        missing = self.variables() - set(point)
        if missing:
            raise KeyError(f"no value for variable(s) {', '.join(sorted(missing))}")
        vals = {v: as_rational(point[v]) for v in self.variables()}
        total = Fraction(0)
        for m, c in self._terms.items():
            term = c
            for v, e in m.powers:
                term *= vals[v] ** e
            total += term
        return total

    def substitute(self, var: str, replacement: "Polynomial | Scalar") -> "Polynomial":
        """Replace ``var`` by ``replacement`` and expand."""
        replacement = self._coerce(replacement)
        powers: dict[int, Polynomial] = {0: Polynomial.constant(1)}
        acc = Polynomial()
        for m, c in self._terms.items():
            e = m.exponent(var)
            if e == 0:
                acc = acc + Polynomial._raw({m: c})
                continue
            if e not in powers:
                powers[e] = replacement ** e
            rest = Monomial((v, k) for v, k in m.powers if v != var)
            acc = acc + powers[e] * Polynomial._raw({rest: c})
        return acc

    def diff(self, var: str) -> "Polynomial":
        acc: dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            e = m.exponent(var)
            if e:
                lowered = Monomial((v, k - 1 if v == var else k) for v, k in m.powers)
                acc[lowered] = acc.get(lowered, Fraction(0)) + c * e
        return Polynomial._raw(acc)

    # -- printing -----------------------------------------------------------

    def sorted_terms(self, order: Sequence[str] | None = None) -> list[tuple[Monomial, Fraction]]:
        order = list(order) if order is not None else sorted(self.variables())
        return sorted(self._terms.items(), key=lambda mc: grlex_key(mc[0], order))

    def format(self, order: Sequence[str] | None = None) -> str:
        """Parseable infix text, lowest degree first, e.g. ``-2 + y^2``."""
        if not self._terms:
            return "0"
        order = list(order) if order is not None else sorted(self.variables())
        parts = []
        for i, (m, c) in enumerate(self.sorted_terms(order)):
            neg = c < 0
            mag = -c if neg else c
            if m.degree == 0:
                body = str(mag)
            elif mag == 1:
                body = m.format(order)
            else:
                body = f"{mag}*{m.format(order)}"
            if i == 0:
                parts.append(f"-{body}" if neg else body)
            else:
                parts.append(f"- {body}" if neg else f"+ {body}")
        return " ".join(parts)

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f"Polynomial({self.format()!r})"


def poly_arith(a: Polynomial, b: Polynomial, op: str) -> Polynomial:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def substitute(p: Polynomial, var: str, replacement: Polynomial) -> Polynomial:
    return p.substitute(var, replacement)


def evaluate(p: Polynomial, point: Mapping[str, Scalar]) -> Fraction:
    return p.eval(point)


@dataclass(frozen=True)
class Problem:
    """Conjunction of ``P >= 0`` for each inequality and ``Z = 0`` for each equality."""

    variables: tuple[str, ...]
    inequalities: tuple[Polynomial, ...] = ()
    equalities: tuple[Polynomial, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "inequalities", tuple(self.inequalities))
        object.__setattr__(self, "equalities", tuple(self.equalities))
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable declaration")
        declared = set(self.variables)
        for p in self.inequalities + self.equalities:
            undeclared = p.variables() - declared
            if undeclared:
                raise ValueError(f"undeclared variable(s): {', '.join(sorted(undeclared))}")

    def format(self) -> str:
        lines = ["vars " + " ".join(self.variables)]
        lines += [f"{p.format(self.variables)} >= 0" for p in self.inequalities]
        lines += [f"{z.format(self.variables)} = 0" for z in self.equalities]
        return "\n".join(lines) + "\n"


class ProductSetTooLarge(ValueError):
    pass


def mask_members(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def product_closure(polys: Sequence[Polynomial], max_products: int = 4096) -> list[tuple[int, Polynomial]]:
    """Every product of a subset of ``polys``, each factor used at most once.

    Masks are integers whose bit ``i`` selects ``polys[i]``; the list is in
    increasing mask order and starts with the empty product 1.
    """
    n = len(polys)
    if 2 ** n > max_products:
        raise ProductSetTooLarge(
            f"product set too large: 2^{n} = {2 ** n} products exceeds the cap of {max_products}"
        )
    products = [Polynomial.constant(1)]
    for mask in range(1, 2 ** n):
        top = mask.bit_length() - 1
        products.append(products[mask ^ (1 << top)] * polys[top])
    return list(enumerate(products))


def fresh_names(taken: Iterable[str], count: int, stem: str = "mu") -> list[str]:
    taken = set(taken)
    out = []
    for i in range(1, count + 1):
        name = f"{stem}{i}"
        while name in taken:
            name += "_"
        taken.add(name)
        out.append(name)
    return out


def equalities_to_slack_form(prob: Problem) -> Problem:
    """Turn each ``P_i >= 0`` into ``P_i - mu_i^2 = 0`` with a fresh variable ``mu_i``.

    Original equalities keep their positions ahead of the converted ones.
    """
    slack = fresh_names(prob.variables, len(prob.inequalities))
    converted = [p - Polynomial.var(s) ** 2 for p, s in zip(prob.inequalities, slack)]
    return Problem(prob.variables + tuple(slack), (), prob.equalities + tuple(converted))
