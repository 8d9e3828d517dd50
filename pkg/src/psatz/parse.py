"""Text front end: polynomials, problem files and affine slicing relations.

Problem files hold one constraint per line::

    # comments run to end of line
    vars a b y
    -2 + y^2 >= 0
    1 - y^4 >= 0
    a*b - 1/3 = 0
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .ratpoly import Monomial, Polynomial, Problem


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col
        self.detail = message


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?|\.\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(text: str, line: int, col0: int) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[pos + bad]!r}", line, col0 + pos + bad)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), col0 + m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", col0 + len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, variables: Sequence[str] | None, line: int, col0: int):
        self.toks = _tokenize(text, line, col0)
        self.i = 0
        self.line = line
        self.variables = None if variables is None else set(variables)

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, message: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise ParseError(message, self.line, tok.col)

    def parse(self) -> Polynomial:
        if self.peek().kind == "end":
            self.fail("expected a polynomial")
        p = self.expr()
        if self.peek().kind != "end":
            tok = self.peek()
            what = "implicit multiplication is not supported; use '*'" if tok.kind in ("num", "ident") or tok.text == "(" else f"unexpected {tok.text!r}"
            self.fail(what)
        return p

    def expr(self) -> Polynomial:
        p = self.term()
        while self.peek().text in ("+", "-") and self.peek().kind == "op":
            op = self.take().text
            q = self.term()
            p = p + q if op == "+" else p - q
        return p

    def term(self) -> Polynomial:
        p = self.unary()
        while self.peek().text in ("*", "/") and self.peek().kind == "op":
            op = self.take()
            q = self.unary()
            if op.text == "*":
                p = p * q
            else:
                if not q.is_constant():
                    self.fail("division is only allowed by a constant", op)
                c = q.eval({})
                if c == 0:
                    self.fail("division by zero", op)
                p = p * (1 / c)
        return p

    def unary(self) -> Polynomial:
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("-", "+"):
            self.take()
            p = self.unary()
            return -p if tok.text == "-" else p
        return self.power()

    def power(self) -> Polynomial:
        base = self.atom()
        if self.peek().text == "^" and self.peek().kind == "op":
            self.take()
            tok = self.take()
            if tok.kind != "num" or "." in tok.text:
                self.fail("exponent must be a nonnegative integer", tok)
            base = base ** int(tok.text)
        return base

    def atom(self) -> Polynomial:
        tok = self.take()
        if tok.kind == "num":
            return Polynomial.constant(Fraction(tok.text))
        if tok.kind == "ident":
            if self.variables is not None and tok.text not in self.variables:
                self.fail(f"undeclared variable {tok.text!r}", tok)
            return Polynomial.var(tok.text)
        if tok.text == "(":
            p = self.expr()
            close = self.take()
            if close.text != ")":
                self.fail("expected ')'", close)
            return p
        if tok.kind == "end":
            self.fail("unexpected end of expression", tok)
        self.fail(f"unexpected {tok.text!r}", tok)


def parse_polynomial(text: str, variables: Sequence[str] | None = None, *, line: int = 1, col: int = 1) -> Polynomial:
    """Parse infix text such as ``9*a^2 + 6*a*b - 1/3``."""
    return _Parser(text, variables, line, col).parse()


_STRICT = re.compile(r"(?<![<>=!])[<>](?!=)")


def _split_relation(text: str, line: int, col0: int) -> tuple[str, str, str, int]:
    m = _STRICT.search(text)
    if m:
        raise ParseError("strict inequalities are not supported; use '>=' or '<='", line, col0 + m.start())
    if "!=" in text:
        raise ParseError("disequalities are not supported", line, col0 + text.index("!="))
    for op in (">=", "<=", "=="):
        if op in text:
            k = text.index(op)
            return text[:k], op, text[k + 2:], k + 2
    if "=" in text:
        k = text.index("=")
        return text[:k], "=", text[k + 1:], k + 1
    raise ParseError("expected '>=', '<=' or '='", line, col0 + len(text))


def parse_problem(text: str) -> Problem:
    variables: list[str] | None = None
    ineqs: list[Polynomial] = []
    eqs: list[Polynomial] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        col0 = len(body) - len(body.lstrip()) + 1
        stripped = body.strip()
        if variables is None:
            words = stripped.split()
            if words[0] != "vars":
                raise ParseError("expected a leading 'vars' declaration", lineno, col0)
            variables = words[1:]
            for w in variables:
                if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", w):
                    raise ParseError(f"invalid variable name {w!r}", lineno, col0 + stripped.index(w))
            if len(set(variables)) != len(variables):
                raise ParseError("duplicate variable declaration", lineno, col0)
            continue
        if stripped.split()[0] == "vars":
            raise ParseError("repeated 'vars' declaration", lineno, col0)
        lhs, op, rhs, rhs_off = _split_relation(body, lineno, 1)
        left = parse_polynomial(lhs, variables, line=lineno, col=1)
        right = parse_polynomial(rhs, variables, line=lineno, col=1 + rhs_off)
        if op == ">=":
            ineqs.append(left - right)
        elif op == "<=":
            ineqs.append(right - left)
        else:
            eqs.append(left - right)
    if variables is None:
        raise ParseError("empty problem: missing 'vars' declaration", 1, 1)
    return Problem(tuple(variables), tuple(ineqs), tuple(eqs))


def param_names(m: int) -> list[str]:
    """Pencil parameters are spelled a1..am."""
    return [f"a{i}" for i in range(1, m + 1)]


def parse_affine_relation(text: str, m: int) -> tuple[list[Fraction], Fraction]:
    """Parse ``-9*a1 + a2 = -10`` into coefficients over a1..am and a right-hand side."""
    lhs, op, rhs, off = _split_relation(text, 1, 1)
    if op != "=" and op != "==":
        raise ParseError("slicing relations must be equations", 1, off)
    names = param_names(m)
    diff = parse_polynomial(lhs, names) - parse_polynomial(rhs, names, col=1 + off)
    if diff.degree > 1:
        raise ParseError("slicing relation must be affine in the parameters", 1, 1)
    coeffs = [diff.coefficient(Monomial.var(n)) for n in names]
    const = diff.coefficient(Monomial.one())
    return coeffs, -const


def parse_point(text: str, m: int) -> list[Fraction]:
    """Parse ``5,-7`` or ``a1=5, a2=-7`` into a parameter vector."""
    parts = [p.strip() for p in re.split(r"[,\s]+", text.strip()) if p.strip()]
    if parts and all("=" in p for p in parts):
        vals = {}
        for p in parts:
            k, v = p.split("=", 1)
            vals[k.strip()] = v.strip()
        names = param_names(m)
        if set(vals) != set(names):
            raise ParseError(f"point must assign exactly {', '.join(names) or 'no parameters'}")
        parts = [vals[n] for n in names]
    if len(parts) != m:
        raise ParseError(f"point has {len(parts)} coordinates, pencil has {m} parameters")
    try:
        return [Fraction(p) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad coordinate: {exc}") from None
