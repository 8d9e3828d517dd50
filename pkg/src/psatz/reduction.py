"""Witness search as an affine family of block-diagonal Gram matrices.

Given a problem and a :class:`WitnessShape` (which products ``R`` carry an
SoS multiplier, and over which monomials), :func:`assemble` writes the
polynomial identity

    sum_R (m_R^T Q_R m_R) * R + sum_j lambda_j * Z_j = -1

as linear equations in the Gram entries and the coefficients of the
``lambda_j``, solves them exactly and returns the solution set as a
:class:`Pencil` ``-F0 + sum_i alpha_i F_i``.  Any parameter point yields Gram
blocks satisfying the identity; only positive semidefiniteness is left open.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .exactlinalg import (
    InconsistentSystem,
    RatMatrix,
    gauss_solve_affine,
    linear_combination,
    rank,
)
from .ratpoly import (
    Monomial,
    Polynomial,
    Problem,
    ProductSetTooLarge,
    as_rational,
    grlex_key,
    mask_members,
    monomials_up_to,
    product_closure,
)
from .verifier import Certificate, GramBlock, product_of

_ZERO = Fraction(0)


class ShapeError(ValueError):
    pass


class NoCertificateOfShape(InconsistentSystem):
    """The identity has no solution with this shape.

    This is a negative result for the shape only: larger degree caps or more
    products may still admit a certificate.
    """


class SliceError(ValueError):
    pass


@dataclass(frozen=True)
class WitnessShape:
    products: tuple[int, ...]
    basis_for: Mapping[int, tuple[Monomial, ...]]
    equality_multiplier_degree: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "products", tuple(self.products))
        object.__setattr__(self, "basis_for", {k: tuple(v) for k, v in self.basis_for.items()})
        object.__setattr__(self, "equality_multiplier_degree", tuple(self.equality_multiplier_degree))
        if len(set(self.products)) != len(self.products):
            raise ShapeError("a product appears twice in the shape")
        for mask in self.products:
            monos = self.basis_for.get(mask)
            if not monos:
                raise ShapeError(f"product {mask_label(mask)} has no monomials")
            if len(set(monos)) != len(monos):
                raise ShapeError(f"product {mask_label(mask)} lists a monomial twice")

    def validate(self, prob: Problem) -> None:
        n = len(prob.inequalities)
        for mask in self.products:
            if mask < 0 or mask >> n:
                raise ShapeError(f"product {mask_label(mask)} refers to a missing inequality")
            stray = set().union(*(m.variables() for m in self.basis_for[mask])) - set(prob.variables)
            if stray:
                raise ShapeError(f"undeclared variable(s) in monomials: {', '.join(sorted(stray))}")
        if len(self.equality_multiplier_degree) != len(prob.equalities):
            raise ShapeError("one multiplier degree is needed per equality")


def mask_label(mask: int) -> str:
    return "{" + ",".join(str(i + 1) for i in mask_members(mask)) + "}"


def default_shape(prob: Problem, degree_cap: int = 4, product_cap: int = 4096) -> WitnessShape:
    """Every product of degree <= cap, with ``M_R`` = monomials m such that
    ``2 deg m + deg R <= cap``; equality multipliers get degree ``cap - deg Z``."""
    if degree_cap < 0 or degree_cap % 2:
        raise ShapeError("degree cap must be even and nonnegative")
    try:
        closure = product_closure(prob.inequalities, product_cap)
    except ProductSetTooLarge as exc:
        raise ShapeError(f"{exc}; pass an explicit shape listing the products to use") from None
    products, basis = [], {}
    for mask, R in closure:
        if R.is_zero() or R.degree > degree_cap:
            continue
        products.append(mask)
        basis[mask] = tuple(monomials_up_to(prob.variables, (degree_cap - R.degree) // 2))
    lam = tuple(degree_cap - z.degree for z in prob.equalities)
    return WitnessShape(tuple(products), basis, lam)


@dataclass(frozen=True)
class Block:
    mask: int | None
    monomials: tuple[Monomial, ...]
    offset: int
    size: int


def _check_affine_rows(rows, m: int, what: str):
    for r in rows:
        if len(r) != m + 1:
            raise ValueError(f"{what} rows must have {m + 1} entries")


@dataclass(frozen=True)
class Pencil:
    """Symmetric matrices ``-F0 + sum_i alpha_i F_i`` with Gram-block provenance.

    ``lambda_map[j]`` lists ``(monomial, (c0, c1..cm))``: the coefficient of the
    monomial in ``lambda_j`` is ``c0 + sum_i c_i alpha_i``.  ``origin`` maps the
    current parameters back to the parameters of the pencil as assembled (the
    identity unless the pencil has been sliced or rebased).
    """

    F0: RatMatrix
    basis: tuple[RatMatrix, ...]
    blocks: tuple[Block, ...]
    lambda_map: tuple[tuple[tuple[Monomial, tuple[Fraction, ...]], ...], ...] = ()
    origin: tuple[tuple[Fraction, ...], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(self.basis))
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "lambda_map", tuple(tuple(x) for x in self.lambda_map))
        m = len(self.basis)
        if self.origin is None:
            ident = tuple(tuple(Fraction(int(j == i + 1)) for j in range(m + 1)) for i in range(m))
            object.__setattr__(self, "origin", ident)
        else:
            object.__setattr__(self, "origin", tuple(tuple(r) for r in self.origin))
        n = self.F0.rows
        for M in (self.F0,) + self.basis:
            if M.shape != (n, n):
                raise ValueError("pencil matrices must share one square shape")
            if not M.is_symmetric():
                raise ValueError("pencil matrices must be symmetric")
        covered = 0
        for blk in self.blocks:
            if blk.offset != covered or blk.size <= 0:
                raise ValueError("blocks must partition the matrix dimension in order")
            if blk.mask is not None and len(blk.monomials) != blk.size:
                raise ValueError("block size must match its monomial vector")
            covered += blk.size
        if covered != n:
            raise ValueError("blocks must partition the matrix dimension")
        inside = self._block_of_index()
        for M in (self.F0,) + self.basis:
            for i in range(n):
                for j in range(n):
                    if M[i, j] != 0 and inside[i] != inside[j]:
                        raise ValueError("pencil matrix has entries outside the block structure")
        for entries in self.lambda_map:
            _check_affine_rows([c for _, c in entries], m, "lambda map")
        _check_affine_rows(self.origin, m, "origin")

    def _block_of_index(self) -> list[int]:
        out = []
        for k, blk in enumerate(self.blocks):
            out += [k] * blk.size
        return out

    @property
    def m(self) -> int:
        return len(self.basis)

    @property
    def size(self) -> int:
        return self.F0.rows

    def _alpha(self, alpha: Sequence) -> list[Fraction]:
        if len(alpha) != self.m:
            raise ValueError(f"expected {self.m} parameters, got {len(alpha)}")
        return [as_rational(a) for a in alpha]

    def matrix_at(self, alpha: Sequence) -> RatMatrix:
        return linear_combination(-self.F0, self.basis, self._alpha(alpha))

    def block_matrices(self, alpha: Sequence) -> list[RatMatrix]:
        M = self.matrix_at(alpha)
        return [M.submatrix(range(b.offset, b.offset + b.size), range(b.offset, b.offset + b.size)) for b in self.blocks]

    def float_matrices(self):
        """``(F0, [F_i])`` as float arrays, for the numeric side."""
        return self.F0.to_float(), [F.to_float() for F in self.basis]

    def has_provenance(self) -> bool:
        return bool(self.blocks) and all(b.mask is not None for b in self.blocks)

    def certificate_at(self, alpha: Sequence) -> Certificate:
        return reconstruct_certificate(self, alpha)

    def lift(self, alpha: Sequence) -> list[Fraction]:
        """Parameters of the originally assembled pencil for this point."""
        a = self._alpha(alpha)
        return [r[0] + sum((c * x for c, x in zip(r[1:], a)), _ZERO) for r in self.origin]


def pencil_from_matrices(F0: RatMatrix, basis: Sequence[RatMatrix], blocks: Sequence[Block] | None = None) -> Pencil:
    """A pencil without Gram provenance, e.g. one typed in from a table."""
    if blocks is None:
        blocks = (Block(None, (), 0, F0.rows),) if F0.rows else ()
    return Pencil(F0, tuple(basis), tuple(blocks))


def _gram_unknowns(shape: WitnessShape) -> list[tuple[int, int, int]]:
    out = []
    for k, mask in enumerate(shape.products):
        s = len(shape.basis_for[mask])
        out += [(k, i, j) for i in range(s) for j in range(i, s)]
    return out


def assemble(prob: Problem, shape: WitnessShape) -> Pencil:
    shape.validate(prob)
    order = prob.variables
    gram = _gram_unknowns(shape)
    lam_basis = [tuple(monomials_up_to(order, d)) if d >= 0 else () for d in shape.equality_multiplier_degree]
    lam_index = []
    nunk = len(gram)
    for monos in lam_basis:
        lam_index.append(list(range(nunk, nunk + len(monos))))
        nunk += len(monos)

    # coefficient of each monomial of the identity, as a sparse row over unknowns
    rows: dict[Monomial, dict[int, Fraction]] = {Monomial.one(): {}}
    products = [product_of(prob, mask) for mask in shape.products]
    for u, (k, i, j) in enumerate(gram):
        monos = shape.basis_for[shape.products[k]]
        mult = 1 if i == j else 2
        mm = monos[i] * monos[j]
        for mr, c in products[k].terms.items():
            row = rows.setdefault(mm * mr, {})
            row[u] = row.get(u, _ZERO) + mult * c
    for z, monos, idx in zip(prob.equalities, lam_basis, lam_index):
        for mono, u in zip(monos, idx):
            for mz, c in z.terms.items():
                row = rows.setdefault(mono * mz, {})
                row[u] = row.get(u, _ZERO) + c
    keys = sorted(rows, key=lambda mono: grlex_key(mono, order))
    A = [[rows[key].get(u, _ZERO) for u in range(nunk)] for key in keys]
    b = [Fraction(-1) if key.degree == 0 else _ZERO for key in keys]
    try:
        sol = gauss_solve_affine(A, b, nunk)
    except InconsistentSystem:
        raise NoCertificateOfShape(
            "no certificate of this shape: the identity's linear system is inconsistent "
            "(a larger degree cap or more products may still succeed)"
        ) from None

    blocks, off = [], 0
    for mask in shape.products:
        s = len(shape.basis_for[mask])
        blocks.append(Block(mask, shape.basis_for[mask], off, s))
        off += s

    def to_matrix(vec) -> RatMatrix:
        grid = [[_ZERO] * off for _ in range(off)]
        for u, (k, i, j) in enumerate(gram):
            o = blocks[k].offset
            grid[o + i][o + j] = grid[o + j][o + i] = vec[u]
        return RatMatrix(grid)

    F0 = -to_matrix(sol.particular)
    basis = tuple(to_matrix(v) for v in sol.basis)
    lambda_map = tuple(
        tuple((mono, (sol.particular[u],) + tuple(v[u] for v in sol.basis)) for mono, u in zip(monos, idx))
        for monos, idx in zip(lam_basis, lam_index)
    )
    return Pencil(F0, basis, tuple(blocks), lambda_map)


def reconstruct_certificate(pencil: Pencil, alpha: Sequence) -> Certificate:
    """Gram blocks and multipliers at ``alpha``; PSD-ness is not checked here."""
    a = pencil._alpha(alpha)
    if not pencil.has_provenance():
        raise ValueError("pencil carries no Gram-block provenance")
    mats = pencil.block_matrices(a)
    blocks = tuple(GramBlock(b.mask, b.monomials, Q) for b, Q in zip(pencil.blocks, mats))
    mults = []
    for entries in pencil.lambda_map:
        mults.append(Polynomial({mono: c[0] + sum((ci * x for ci, x in zip(c[1:], a)), _ZERO) for mono, c in entries}))
    return Certificate(blocks, tuple(mults))


def _substitute_affine(rows, k: int, const: Fraction, coeffs: Sequence[Fraction]):
    """Rewrite affine rows ``r0 + sum r_i a_i`` after ``a_k = const + sum coeffs_i a_i`` (i != k)."""
    out = []
    for r in rows:
        rk = r[1 + k]
        new = [r[0] + rk * const]
        for i in range(len(r) - 1):
            if i != k:
                new.append(r[1 + i] + rk * coeffs[i])
        out.append(tuple(new))
    return tuple(out)


def slice(pencil: Pencil, coeffs: Sequence, rhs) -> Pencil:
    """Restrict to ``sum coeffs_i alpha_i = rhs``; the last parameter with a nonzero
    coefficient is solved for and removed, the others keep their order."""
    coeffs = [as_rational(c) for c in coeffs]
    rhs = as_rational(rhs)
    if len(coeffs) != pencil.m:
        raise SliceError(f"relation has {len(coeffs)} coefficients, pencil has {pencil.m} parameters")
    nz = [i for i, c in enumerate(coeffs) if c != 0]
    if not nz:
        raise SliceError("relation has no nonzero parameter coefficient" + (" and is inconsistent" if rhs else ""))
    k = nz[-1]
    ck = coeffs[k]
    const = rhs / ck
    sub = [-c / ck for c in coeffs]
    Fk = pencil.basis[k]
    F0 = pencil.F0 - Fk.scale(const)
    basis = tuple(F + Fk.scale(sub[i]) for i, F in enumerate(pencil.basis) if i != k)
    lam = tuple(
        tuple(zip([mono for mono, _ in entries], _substitute_affine([c for _, c in entries], k, const, sub)))
        for entries in pencil.lambda_map
    )
    origin = _substitute_affine(pencil.origin, k, const, sub)
    return Pencil(F0, basis, pencil.blocks, lam, origin)


def slice_relation_text(coeffs: Sequence[Fraction], rhs: Fraction) -> str:
    names = [f"a{i + 1}" for i in range(len(coeffs))]
    lhs = Polynomial({Monomial.var(n): c for n, c in zip(names, coeffs)})
    return f"{lhs.format(names)} = {rhs}"


def rebase(pencil: Pencil, F0: RatMatrix, basis: Sequence[RatMatrix]) -> Pencil:
    """Re-express ``pencil`` over the caller's matrices, which must describe exactly
    the same affine family of matrices."""
    basis = tuple(basis)
    m = pencil.m
    if F0.shape != pencil.F0.shape or any(F.shape != F0.shape for F in basis):
        raise ValueError("rebase matrices do not match the pencil's dimension")
    if len(basis) != m:
        raise ValueError(f"rebase needs {m} direction matrices, got {len(basis)}")
    n = F0.rows
    cols = [[F[i, j] for i in range(n) for j in range(i, n)] for F in pencil.basis]
    A = [list(r) for r in zip(*cols)] if cols else [[] for _ in range(n * (n + 1) // 2)]
    if m and rank(RatMatrix(A)) < m:
        raise ValueError("pencil has parameters that do not move the Gram blocks; cannot rebase")

    def coords(target: RatMatrix) -> list[Fraction]:
        b = [target[i, j] for i in range(n) for j in range(i, n)]
        try:
            sol = gauss_solve_affine(A, b, m)
        except InconsistentSystem:
            raise ValueError("rebase matrices describe a different affine family") from None
        return list(sol.particular)

    shift = coords(pencil.F0 - F0)
    dirs = [coords(F) for F in basis]
    if m and rank(RatMatrix(dirs)) < m:
        raise ValueError("rebase direction matrices are linearly dependent")

    def rebase_rows(rows):
        out = []
        for r in rows:
            c0 = r[0] + sum((ci * s for ci, s in zip(r[1:], shift)), _ZERO)
            out.append((c0,) + tuple(sum((ci * d[i] for i, ci in enumerate(r[1:])), _ZERO) for d in dirs))
        return tuple(out)

    lam = tuple(
        tuple(zip([mono for mono, _ in entries], rebase_rows([c for _, c in entries])))
        for entries in pencil.lambda_map
    )
    return Pencil(F0, basis, pencil.blocks, lam, rebase_rows(pencil.origin))


def shape_of(pencil: Pencil, n_equalities: int = 0, multiplier_degree: Sequence[int] | None = None) -> WitnessShape:
    if not pencil.has_provenance():
        raise ValueError("pencil carries no Gram-block provenance")
    degs = multiplier_degree
    if degs is None:
        degs = [max((mono.degree for mono, _ in entries), default=-1) for entries in pencil.lambda_map]
        degs += [-1] * (n_equalities - len(degs))
    return WitnessShape(
        tuple(b.mask for b in pencil.blocks), {b.mask: b.monomials for b in pencil.blocks}, tuple(degs)
    )
