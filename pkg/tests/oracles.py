"""Independent reference computations (sympy / numpy), used to derive frozen
test values and for live cross-checks.  Nothing here imports the package's
arithmetic beyond reading its data structures."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
import sympy as sp


def to_sympy(poly) -> sp.Expr:
    expr = sp.Integer(0)
    for mono, c in poly.terms.items():
        term = sp.Rational(c.numerator, c.denominator)
        for v, e in mono.powers:
            term *= sp.Symbol(v) ** e
        expr += term
    return sp.expand(expr)


def sym_matrix(M) -> sp.Matrix:
    return sp.Matrix([[sp.Rational(x.numerator, x.denominator) for x in row] for row in M])


def is_psd(M) -> bool:
    """Exact PSD test through sympy's symbolic eigenvalue machinery."""
    S = sym_matrix(M)
    if S.rows == 0:
        return True
    return bool(S.is_positive_semidefinite)


def charpoly_coeffs(M) -> list[Fraction]:
    """Coefficients p_0..p_n of det(M - X*Id), lowest degree first."""
    X = sp.Symbol("X")
    S = sym_matrix(M)
    p = sp.Poly((S - X * sp.eye(S.rows)).det(), X)
    coeffs = [p.coeff_monomial(X**i) for i in range(S.rows + 1)]
    return [Fraction(int(c.p), int(c.q)) for c in coeffs]


def det(M) -> Fraction:
    d = sym_matrix(M).det()
    return Fraction(int(d.p), int(d.q))


def pencil_det(pencil) -> sp.Expr:
    syms = sp.symbols(f"a1:{pencil.m + 1}") if pencil.m else ()
    F = -sym_matrix(pencil.F0)
    for s, Fi in zip(syms, pencil.basis):
        F += s * sym_matrix(Fi)
    return sp.expand(F.det()), syms


def min_eig(M) -> float:
    A = np.array([[float(x) for x in row] for row in M])
    return float(np.linalg.eigvalsh(A)[0]) if A.size else np.inf
