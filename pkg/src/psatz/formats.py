"""Text serialization for matrices, pencils and certificates.

Matrices are written row-major, one row per line, every entry as ``num/den``
(the denominator is always present).  All writers are deterministic and every
reader accepts exactly what the matching writer produces, so
``read(write(x)) == x`` and ``write(read(text)) == text`` for emitted text.

Pencil dump::

    pencil size 8 params 3
    block {1} offset 0 size 3 monomials 1 a b
    block {} offset 3 size 1 monomials 1
    lambda 1 b^2 1/1 0/1 2/1 0/1
    origin 0/1 1/1 0/1 0/1
    matrix F0
    <rows>
    matrix F1
    <rows>

``origin`` lines (one per originally assembled parameter) are omitted when
they would spell the identity map.

Certificate::

    certificate blocks 2 multipliers 1
    block {1} monomials 1 y
    2/3 0/1
    0/1 1/3
    block {2} monomials 1
    1/3
    multiplier 1 0
"""
from __future__ import annotations

from fractions import Fraction

from .exactlinalg import RatMatrix
from .parse import ParseError, parse_polynomial
from .ratpoly import Monomial
from .reduction import Block, Pencil
from .verifier import Certificate, GramBlock


class FormatError(ParseError):
    pass


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_rational(tok: str, line: int = 1) -> Fraction:
    num, sep, den = tok.partition("/")
    try:
        if not sep:
            raise ValueError
        value = Fraction(int(num), int(den))
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"expected a num/den entry, got {tok!r}", line) from None
    if format_rational(value) != tok:
        raise FormatError(f"entry {tok!r} is not in lowest terms", line)
    return value


def format_matrix(M: RatMatrix) -> str:
    return "\n".join(" ".join(format_rational(x) for x in row) for row in M)


def mask_text(mask: int | None) -> str:
    if mask is None:
        return "-"
    members = [str(i + 1) for i in range(mask.bit_length()) if mask >> i & 1]
    return "{" + ",".join(members) + "}"


def parse_mask(tok: str, line: int) -> int | None:
    if tok == "-":
        return None
    if not (tok.startswith("{") and tok.endswith("}")):
        raise FormatError(f"expected a product mask like {{1,2}}, got {tok!r}", line)
    body = tok[1:-1]
    mask = 0
    if body:
        for part in body.split(","):
            if not part.isdigit() or int(part) < 1:
                raise FormatError(f"bad inequality index {part!r} in mask", line)
            mask |= 1 << (int(part) - 1)
    if mask_text(mask) != tok:
        raise FormatError(f"mask {tok!r} is not in canonical form", line)
    return mask


def _mono_text(m: Monomial) -> str:
    return str(m)


def _parse_mono(tok: str, line: int) -> Monomial:
    try:
        p = parse_polynomial(tok, line=line)
    except ParseError as exc:
        raise FormatError(f"bad monomial {tok!r}: {exc.detail}", line) from None
    if len(p.terms) != 1:
        raise FormatError(f"bad monomial {tok!r}", line)
    ((mono, c),) = p.terms.items()
    if c != 1 or _mono_text(mono) != tok:
        raise FormatError(f"bad monomial {tok!r}", line)
    return mono


class _Lines:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.i = 0

    def next(self, what: str) -> tuple[int, list[str]]:
        if self.i >= len(self.lines):
            raise FormatError(f"unexpected end of file, expected {what}", self.i + 1)
        self.i += 1
        return self.i, self.lines[self.i - 1].split()

    def peek_word(self) -> str | None:
        if self.i >= len(self.lines):
            return None
        words = self.lines[self.i].split()
        return words[0] if words else ""

    def expect_end(self):
        if self.i != len(self.lines):
            raise FormatError("trailing content", self.i + 1)


def _int(tok: str, line: int) -> int:
    if not tok.isdigit():
        raise FormatError(f"expected a nonnegative integer, got {tok!r}", line)
    return int(tok)


def _read_matrix(src: _Lines, n: int) -> RatMatrix:
    rows = []
    for _ in range(n):
        line, words = src.next("a matrix row")
        if len(words) != n:
            raise FormatError(f"matrix row has {len(words)} entries, expected {n}", line)
        rows.append([parse_rational(w, line) for w in words])
    return RatMatrix(rows) if n else RatMatrix.zeros(0)


def read_matrix(text: str) -> RatMatrix:
    lines = [l for l in text.splitlines() if l.strip()]
    src = _Lines("\n".join(lines))
    M = _read_matrix(src, len(lines))
    src.expect_end()
    return M


# -- pencils -----------------------------------------------------------------


def write_pencil(p: Pencil) -> str:
    out = [f"pencil size {p.size} params {p.m}"]
    for b in p.blocks:
        head = f"block {mask_text(b.mask)} offset {b.offset} size {b.size}"
        if b.mask is not None:
            head += " monomials " + " ".join(_mono_text(m) for m in b.monomials)
        out.append(head)
    for j, entries in enumerate(p.lambda_map, start=1):
        if not entries:
            out.append(f"lambda {j} none")
        for mono, coeffs in entries:
            out.append(f"lambda {j} {_mono_text(mono)} " + " ".join(format_rational(c) for c in coeffs))
    identity = tuple(tuple(Fraction(int(c == i + 1)) for c in range(p.m + 1)) for i in range(p.m))
    if p.origin != identity:
        for row in p.origin:
            out.append("origin " + " ".join(format_rational(c) for c in row))
    for k, M in enumerate((p.F0,) + p.basis):
        out.append(f"matrix F{k}")
        if M.rows:
            out.append(format_matrix(M))
    return "\n".join(out) + "\n"


def read_pencil(text: str) -> Pencil:
    src = _Lines(text)
    line, words = src.next("pencil header")
    if len(words) != 5 or words[0] != "pencil" or words[1] != "size" or words[3] != "params":
        raise FormatError("expected 'pencil size <n> params <m>'", line)
    n, m = _int(words[2], line), _int(words[4], line)
    blocks = []
    while src.peek_word() == "block":
        line, words = src.next("block")
        if len(words) < 6 or words[2] != "offset" or words[4] != "size":
            raise FormatError("expected 'block <mask> offset <o> size <s> [monomials ...]'", line)
        mask = parse_mask(words[1], line)
        off, size = _int(words[3], line), _int(words[5], line)
        if mask is None:
            if len(words) != 6:
                raise FormatError("a block without mask carries no monomials", line)
            monos = ()
        else:
            if len(words) < 7 or words[6] != "monomials":
                raise FormatError("expected 'monomials' after a masked block", line)
            monos = tuple(_parse_mono(w, line) for w in words[7:])
        blocks.append(Block(mask, monos, off, size))
    lam: dict[int, list] = {}
    while src.peek_word() == "lambda":
        line, words = src.next("lambda")
        if len(words) < 3:
            raise FormatError("expected 'lambda <j> <monomial> <coefficients>'", line)
        j = _int(words[1], line)
        if j not in (len(lam), len(lam) + 1) or j == 0:
            raise FormatError("lambda lines must be grouped by increasing equality index", line)
        entries = lam.setdefault(j, [])
        if words[2] == "none":
            if len(words) != 3:
                raise FormatError("'lambda <j> none' takes no coefficients", line)
            continue
        if len(words) != 3 + m + 1:
            raise FormatError(f"lambda line needs {m + 1} coefficients", line)
        entries.append((_parse_mono(words[2], line), tuple(parse_rational(w, line) for w in words[3:])))
    origin = []
    while src.peek_word() == "origin":
        line, words = src.next("origin")
        origin.append(tuple(parse_rational(w, line) for w in words[1:]))
    mats = []
    for k in range(m + 1):
        line, words = src.next(f"matrix F{k}")
        if words != ["matrix", f"F{k}"]:
            raise FormatError(f"expected 'matrix F{k}'", line)
        mats.append(_read_matrix(src, n))
    src.expect_end()
    try:
        return Pencil(mats[0], tuple(mats[1:]), tuple(blocks), tuple(tuple(v) for v in lam.values()), tuple(origin) or None)
    except ValueError as exc:
        raise FormatError(f"inconsistent pencil: {exc}", line) from None


# -- certificates -------------------------------------------------------------


def write_certificate(cert: Certificate) -> str:
    out = [f"certificate blocks {len(cert.gram_blocks)} multipliers {len(cert.equality_multipliers)}"]
    for b in cert.gram_blocks:
        out.append(f"block {mask_text(b.mask)} monomials " + " ".join(_mono_text(m) for m in b.monomials))
        out.append(format_matrix(b.gram))
    for j, lam in enumerate(cert.equality_multipliers, start=1):
        out.append(f"multiplier {j} {lam.format()}")
    return "\n".join(out) + "\n"


def read_certificate(text: str) -> Certificate:
    src = _Lines(text)
    line, words = src.next("certificate header")
    if len(words) != 5 or words[:2] != ["certificate", "blocks"] or words[3] != "multipliers":
        raise FormatError("expected 'certificate blocks <k> multipliers <e>'", line)
    nb, ne = _int(words[2], line), _int(words[4], line)
    blocks = []
    for _ in range(nb):
        line, words = src.next("block header")
        if len(words) < 4 or words[0] != "block" or words[2] != "monomials":
            raise FormatError("expected 'block <mask> monomials <m1> ... <mk>'", line)
        mask = parse_mask(words[1], line)
        if mask is None:
            raise FormatError("certificate blocks need a product mask", line)
        monos = tuple(_parse_mono(w, line) for w in words[3:])
        blocks.append(GramBlock(mask, monos, _read_matrix(src, len(monos))))
    mults = []
    for j in range(1, ne + 1):
        line, words = src.next(f"multiplier {j}")
        if len(words) < 3 or words[:2] != ["multiplier", str(j)]:
            raise FormatError(f"expected 'multiplier {j} <polynomial>'", line)
        body = src.lines[line - 1].split(maxsplit=2)[2]
        mults.append(parse_polynomial(body, line=line))
    src.expect_end()
    return Certificate(tuple(blocks), tuple(mults))
