"""Exact certificate checking.

A certificate for the system ``P_i >= 0, Z_j = 0`` lists, for a set of
products ``R`` of the inequalities, a monomial vector ``m_R`` and a Gram
matrix ``Q_R``, plus one polynomial multiplier ``lambda_j`` per equality.  It
is accepted iff every ``Q_R`` is positive semidefinite and

    sum_R (m_R^T Q_R m_R) * R + sum_j lambda_j * Z_j + 1 == 0

holds as a polynomial identity.  Only exact rational arithmetic is used here;
this module imports nothing but :mod:`psatz.ratpoly` and
:mod:`psatz.exactlinalg`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .exactlinalg import PsdVerdict, RatMatrix, gram_to_sos, is_psd_exact, quadratic_form
from .ratpoly import Monomial, Polynomial, Problem, mask_members


@dataclass(frozen=True)
class GramBlock:
    mask: int
    monomials: tuple[Monomial, ...]
    gram: RatMatrix


@dataclass(frozen=True)
class Certificate:
    gram_blocks: tuple[GramBlock, ...]
    equality_multipliers: tuple[Polynomial, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gram_blocks", tuple(self.gram_blocks))
        object.__setattr__(self, "equality_multipliers", tuple(self.equality_multipliers))


@dataclass(frozen=True)
class ResidualNonzero:
    residual: Polynomial

    def __str__(self) -> str:
        return f"ResidualNonzero: identity leaves residual {self.residual}"


@dataclass(frozen=True)
class BlockNotPsd:
    index: int
    psd: PsdVerdict

    def __str__(self) -> str:
        return f"BlockNotPsd: block {self.index} fails the sign test at coefficient {self.psd.failing_index}"


@dataclass(frozen=True)
class ShapeMismatch:
    description: str

    def __str__(self) -> str:
        return f"ShapeMismatch: {self.description}"


@dataclass(frozen=True)
class Verdict:
    valid: bool
    reason: ResidualNonzero | BlockNotPsd | ShapeMismatch | None = None
    sos_form: tuple[tuple[tuple[Fraction, Polynomial], ...], ...] | None = field(default=None)


def product_of(prob: Problem, mask: int) -> Polynomial:
    out = Polynomial.constant(1)
    for i in mask_members(mask):
        out = out * prob.inequalities[i]
    return out


def _shape_problem(prob: Problem, cert: Certificate) -> str | None:
    n = len(prob.inequalities)
    for k, blk in enumerate(cert.gram_blocks):
        if blk.mask < 0 or blk.mask >> n:
            return f"block {k} references an inequality outside 1..{n}"
        if not blk.gram.is_square() or blk.gram.rows != len(blk.monomials):
            return f"block {k}: Gram matrix is {blk.gram.rows}x{blk.gram.cols} for {len(blk.monomials)} monomials"
        if not blk.gram.is_symmetric():
            return f"block {k}: Gram matrix is not symmetric"
        if len(set(blk.monomials)) != len(blk.monomials):
            return f"block {k}: repeated monomial"
        stray = set().union(*(m.variables() for m in blk.monomials)) - set(prob.variables) if blk.monomials else set()
        if stray:
            return f"block {k}: undeclared variable(s) {', '.join(sorted(stray))}"
    if len(cert.equality_multipliers) != len(prob.equalities):
        return f"{len(cert.equality_multipliers)} equality multipliers for {len(prob.equalities)} equalities"
    for j, lam in enumerate(cert.equality_multipliers):
        stray = lam.variables() - set(prob.variables)
        if stray:
            return f"multiplier {j + 1}: undeclared variable(s) {', '.join(sorted(stray))}"
    return None


def certificate_identity(prob: Problem, cert: Certificate) -> Polynomial:
    """The left-hand side ``sum SoS_R * R + sum lambda_j Z_j`` (should equal -1)."""
    total = Polynomial()
    for blk in cert.gram_blocks:
        total = total + quadratic_form(blk.gram, blk.monomials) * product_of(prob, blk.mask)
    for lam, z in zip(cert.equality_multipliers, prob.equalities):
        total = total + lam * z
    return total


def verify(prob: Problem, cert: Certificate) -> Verdict:
    problem = _shape_problem(prob, cert)
    if problem:
        return Verdict(False, ShapeMismatch(problem))
    for k, blk in enumerate(cert.gram_blocks):
        psd = is_psd_exact(blk.gram)
        if not psd.is_psd:
            return Verdict(False, BlockNotPsd(k, psd))
    residual = certificate_identity(prob, cert) + 1
    if not residual.is_zero():
        return Verdict(False, ResidualNonzero(residual))
    sos = tuple(tuple(gram_to_sos(blk.gram, blk.monomials)) for blk in cert.gram_blocks)
    return Verdict(True, None, sos)


def verify_from_alpha(pencil, alpha: Sequence[Fraction], prob: Problem) -> Verdict:
    """Read the certificate off ``pencil`` at ``alpha`` and check it."""
    try:
        cert = pencil.certificate_at(alpha)
    except ValueError as exc:
        return Verdict(False, ShapeMismatch(str(exc)))
    return verify(prob, cert)


def _sos_text(terms: Sequence[tuple[Fraction, Polynomial]], order: Sequence[str]) -> str:
    if not terms:
        return "0"
    parts = []
    for d, l in terms:
        if l == 1:
            parts.append(str(d))
            continue
        mono = next(iter(l.terms)) if len(l.terms) == 1 else None
        if mono is not None and mono.degree == 1 and l.coefficient(mono) == 1:
            sq = f"{l.format(order)}^2"
        else:
            sq = f"({l.format(order)})^2"
        parts.append(sq if d == 1 else f"{d}*{sq}")
    return " + ".join(parts)


def format_witness(prob: Problem, cert: Certificate, verdict: Verdict) -> str:
    """Human-readable identity, e.g. ``(2/3 + 1/3*y^2)*(-2 + y^2) + (1/3)*(1 - y^4) = -1``."""
    if not verdict.valid or verdict.sos_form is None:
        raise ValueError("only valid certificates have a sum-of-squares form")
    order = prob.variables
    pieces = []
    for blk, terms in zip(cert.gram_blocks, verdict.sos_form):
        if not terms:
            continue
        sos = quadratic_form(blk.gram, blk.monomials)
        if blk.mask == 0:
            pieces.append(f"({sos.format(order)})")
        else:
            factors = "*".join(f"({prob.inequalities[i].format(order)})" for i in mask_members(blk.mask))
            pieces.append(f"({sos.format(order)})*{factors}")
    for lam, z in zip(cert.equality_multipliers, prob.equalities):
        if not lam.is_zero():
            pieces.append(f"({lam.format(order)})*({z.format(order)})")
    lines = [" + ".join(pieces) + " = -1" if pieces else "0 = -1"]
    for k, (blk, terms) in enumerate(zip(cert.gram_blocks, verdict.sos_form)):
        label = "1" if blk.mask == 0 else "*".join(f"P{i + 1}" for i in mask_members(blk.mask))
        lines.append(f"  SoS multiplier of {label}: {_sos_text(terms, order)}")
    return "\n".join(lines)
