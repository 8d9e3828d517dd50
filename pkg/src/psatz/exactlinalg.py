"""Dense exact linear algebra over the rationals.

Everything here works on :class:`RatMatrix` (immutable, row-major tuples of
``Fraction``) and never touches floating point.  The positive-semidefinite
test reads the signs of characteristic-polynomial coefficients; the
``ldlt`` routine turns a PSD Gram matrix into an explicit weighted sum of
squares of linear forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .ratpoly import Monomial, Polynomial, as_rational

_ZERO = Fraction(0)
_ONE = Fraction(1)


class RatMatrix:
    __slots__ = ("rows", "cols", "_data")

    def __init__(self, data: Iterable[Iterable]):
        grid = tuple(tuple(as_rational(x) for x in row) for row in data)
        widths = {len(r) for r in grid}
        if len(widths) > 1:
            raise ValueError("ragged matrix")
        self._data = grid
        self.rows = len(grid)
        self.cols = widths.pop() if widths else 0

    @classmethod
    def _wrap(cls, grid: tuple[tuple[Fraction, ...], ...], cols: int | None = None) -> "RatMatrix":
        m = cls.__new__(cls)
        m._data = grid
        m.rows = len(grid)
        m.cols = len(grid[0]) if grid else (cols or 0)
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "RatMatrix":
        cols = rows if cols is None else cols
        return cls._wrap(tuple((_ZERO,) * cols for _ in range(rows)), cols)

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls._wrap(tuple(tuple(_ONE if i == j else _ZERO for j in range(n)) for i in range(n)), n)

    @classmethod
    def diag(cls, values: Sequence) -> "RatMatrix":
        n = len(values)
        vals = [as_rational(v) for v in values]
        return cls._wrap(tuple(tuple(vals[i] if i == j else _ZERO for j in range(n)) for i in range(n)), n)

    @classmethod
    def block_diag(cls, blocks: Sequence["RatMatrix"]) -> "RatMatrix":
        n = sum(b.rows for b in blocks)
        grid = [[_ZERO] * n for _ in range(n)]
        off = 0
        for b in blocks:
            for i in range(b.rows):
                for j in range(b.cols):
                    grid[off + i][off + j] = b[i, j]
            off += b.rows
        return cls._wrap(tuple(map(tuple, grid)), n)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij) -> Fraction:
        i, j = ij
        return self._data[i][j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._data[i]

    def tolist(self) -> list[list[Fraction]]:
        return [list(r) for r in self._data]

    def __iter__(self):
        return iter(self._data)

    def __eq__(self, other) -> bool:
        return isinstance(other, RatMatrix) and self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        return hash(self._data)

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self._data)
        return f"RatMatrix([{body}])"

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_symmetric(self) -> bool:
        return self.is_square() and all(
            self._data[i][j] == self._data[j][i] for i in range(self.rows) for j in range(i + 1, self.cols)
        )

    def is_zero(self) -> bool:
        return all(x == 0 for r in self._data for x in r)

    def transpose(self) -> "RatMatrix":
        return RatMatrix._wrap(tuple(zip(*self._data)) if self.rows else (), self.rows)

    @property
    def T(self) -> "RatMatrix":
        return self.transpose()

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return RatMatrix._wrap(
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self._data, other._data)), self.cols
        )

    def __neg__(self) -> "RatMatrix":
        return RatMatrix._wrap(tuple(tuple(-a for a in r) for r in self._data), self.cols)

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        return self + (-other)

    def scale(self, c) -> "RatMatrix":
        c = as_rational(c)
        return RatMatrix._wrap(tuple(tuple(c * a for a in r) for r in self._data), self.cols)

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        cols = other.transpose()._data
        return RatMatrix._wrap(
            tuple(tuple(sum((a * b for a, b in zip(r, c)), _ZERO) for c in cols) for r in self._data), other.cols
        )

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RatMatrix":
        return RatMatrix._wrap(tuple(tuple(self._data[i][j] for j in cols) for i in rows), len(cols))

    def trace(self) -> Fraction:
        return sum((self._data[i][i] for i in range(min(self.rows, self.cols))), _ZERO)

    def to_float(self):
        import numpy as np  # only for callers that already live in float land

        return np.array([[float(x) for x in r] for r in self._data], dtype=float).reshape(self.rows, self.cols)


def _require_symmetric(M: RatMatrix) -> None:
    if not M.is_symmetric():
        raise ValueError("matrix is not symmetric")


def linear_combination(const: RatMatrix, mats: Sequence[RatMatrix], coeffs: Sequence) -> RatMatrix:
    """``const + sum(coeffs[i] * mats[i])`` computed entrywise."""
    if len(mats) != len(coeffs):
        raise ValueError("coefficient count does not match matrix count")
    grid = [list(r) for r in const]
    for M, c in zip(mats, coeffs):
        c = as_rational(c)
        if c == 0:
            continue
        for i, r in enumerate(M):
            gi = grid[i]
            for j, x in enumerate(r):
                if x:
                    gi[j] += c * x
    return RatMatrix._wrap(tuple(map(tuple, grid)), const.cols)


# -- linear systems -----------------------------------------------------------


class InconsistentSystem(ValueError):
    """The linear system has no solution: no witness of this shape exists."""


@dataclass(frozen=True)
class AffineSolution:
    particular: tuple[Fraction, ...]
    basis: tuple[tuple[Fraction, ...], ...]
    pivots: tuple[int, ...] = ()

    @property
    def free(self) -> tuple[int, ...]:
        n = len(self.particular)
        piv = set(self.pivots)
        return tuple(j for j in range(n) if j not in piv)


def rref(rows: Sequence[Sequence[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form; pivots chosen left to right, first nonzero row wins."""
    A = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        pr = A[r]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], pr)]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    return A, pivots


def gauss_solve_affine(coeffs: Sequence[Sequence], rhs: Sequence, n_unknowns: int | None = None) -> AffineSolution:
    """Solve ``coeffs @ x = rhs`` exactly.

    Returns the solution set as ``particular + span(basis)``, with free
    unknowns set to zero in the particular solution and one basis vector per
    free unknown (in column order).  Raises :class:`InconsistentSystem` if
    there is no solution.
    """
    n = n_unknowns if n_unknowns is not None else (len(coeffs[0]) if coeffs else 0)
    if len(coeffs) != len(rhs):
        raise ValueError("row count does not match right-hand side")
    aug = []
    for row, b in zip(coeffs, rhs):
        if len(row) != n:
            raise ValueError("row length does not match unknown count")
        aug.append([as_rational(x) for x in row] + [as_rational(b)])
    R, pivots = rref(aug, n)
    if any(all(x == 0 for x in row[:n]) and row[n] != 0 for row in R):
        raise InconsistentSystem("linear system is inconsistent")
    particular = [_ZERO] * n
    for row, c in zip(R, pivots):
        particular[c] = row[n]
    basis = []
    pivset = set(pivots)
    for f in range(n):
        if f in pivset:
            continue
        v = [_ZERO] * n
        v[f] = _ONE
        for row, c in zip(R, pivots):
            v[c] = -row[f]
        basis.append(tuple(v))
    return AffineSolution(tuple(particular), tuple(basis), tuple(pivots))


def nullspace(M: RatMatrix) -> list[tuple[Fraction, ...]]:
    return list(gauss_solve_affine(M.tolist(), [0] * M.rows, M.cols).basis)


def rank(M: RatMatrix) -> int:
    return len(rref(M.tolist(), M.cols)[1])


def det(M: RatMatrix) -> Fraction:
    """Determinant by fraction Gaussian elimination with row swaps."""
    if not M.is_square():
        raise ValueError("determinant of a non-square matrix")
    A = M.tolist()
    n = len(A)
    sign = _ONE
    acc = _ONE
    for c in range(n):
        piv = next((i for i in range(c, n) if A[i][c] != 0), None)
        if piv is None:
            return _ZERO
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            sign = -sign
        p = A[c][c]
        acc *= p
        for i in range(c + 1, n):
            if A[i][c] != 0:
                f = A[i][c] / p
                A[i] = [x - f * y for x, y in zip(A[i], A[c])]
    return sign * acc


def adjugate(M: RatMatrix) -> RatMatrix:
    """Transpose of the cofactor matrix; defined for singular matrices too."""
    n = M.rows
    if not M.is_square():
        raise ValueError("adjugate of a non-square matrix")
    if n == 0:
        return M
    if n == 1:
        return RatMatrix([[1]])
    d = det(M)
    if d != 0:
        return inverse(M).scale(d)
    if rank(M) < n - 1:
        return RatMatrix.zeros(n)
    idx = list(range(n))
    grid = [[_ZERO] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = M.submatrix([r for r in idx if r != j], [c for c in idx if c != i])
            grid[i][j] = det(minor) * (1 if (i + j) % 2 == 0 else -1)
    return RatMatrix(grid)


def inverse(M: RatMatrix) -> RatMatrix:
    n = M.rows
    aug = [list(r) + [_ONE if i == j else _ZERO for j in range(n)] for i, r in enumerate(M)]
    R, piv = rref(aug, n)
    if piv != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return RatMatrix([row[n:] for row in R])


# -- characteristic polynomial and the sign criterion ------------------------


def _components(M: RatMatrix) -> list[list[int]]:
    """Index sets of the diagonal blocks hidden in ``M`` (up to a permutation)."""
    n = M.rows
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if M[i, j] != 0:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _int_char_poly(A: list[list[int]]) -> list[int]:
    """``det(X*Id - A) = sum c_i X^i`` for an integer matrix (Faddeev-LeVerrier).

    ``N_k = A N_{k-1} + c_{n-k+1} Id`` and ``c_{n-k} = -tr(A N_k)/k``; the
    division is exact because the coefficients of an integer matrix are integers.
    """
    n = len(A)
    c = [0] * (n + 1)
    c[n] = 1
    N = [[0] * n for _ in range(n)]
    cols = range(n)
    for k in range(1, n + 1):
        AN = [[sum(a * N[t][j] for t, a in enumerate(row) if a) for j in cols] for row in A]
        for i in cols:
            AN[i][i] += c[n - k + 1]
        N = AN
        tr = sum(A[i][t] * N[t][i] for i in cols for t in cols if A[i][t])
        q, r = divmod(-tr, k)
        if r:
            raise ArithmeticError("non-integral Faddeev-LeVerrier step")
        c[n - k] = q
    return c


def _poly_mul(p: list, q: list) -> list:
    out = [_ZERO] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return out


def char_poly(M: RatMatrix) -> list[Fraction]:
    """Coefficients ``p_0..p_n`` of ``det(M - X*Id) = sum p_i X^i``.

    Hidden diagonal blocks are split off first.  Each block ``B`` is scaled to
    the integer matrix ``L*B`` (``L`` the common denominator), whose
    characteristic coefficients ``c_i`` give those of ``B`` as ``c_i L^(i-n)``.
    """
    _require_symmetric(M)
    total = [_ONE]
    for idx in _components(M):
        n = len(idx)
        L = 1
        for i in idx:
            for j in idx:
                L = math.lcm(L, M[i, j].denominator)
        A = [[int(M[i, j] * L) for j in idx] for i in idx]
        c = _int_char_poly(A)
        s = 1 if n % 2 == 0 else -1
        total = _poly_mul(total, [Fraction(s * c[i], L ** (n - i)) for i in range(n + 1)])
    return total


@dataclass(frozen=True)
class PsdVerdict:
    is_psd: bool
    kernel_dim: int = 0
    failing_index: int | None = None
    signs: tuple[Fraction, ...] = ()

    @property
    def positive_definite(self) -> bool:
        return self.is_psd and self.kernel_dim == 0


def psd_sign_sequence(M: RatMatrix) -> list[Fraction]:
    """``(-1)^i p_i`` for ``0 <= i < n``; these equal the elementary symmetric
    functions of the eigenvalues, highest order first."""
    p = char_poly(M)
    return [p[i] if i % 2 == 0 else -p[i] for i in range(M.rows)]


def is_psd_exact(M: RatMatrix) -> PsdVerdict:
    """PSD iff every ``(-1)^i p_i`` is nonnegative; the leading zeros count the kernel."""
    seq = psd_sign_sequence(M)
    for i, s in enumerate(seq):
        if s < 0:
            return PsdVerdict(False, 0, i, tuple(seq))
    zeros = 0
    for s in seq:
        if s != 0:
            break
        zeros += 1
    return PsdVerdict(True, zeros, None, tuple(seq))


# -- LDL^T -------------------------------------------------------------------


class NotDecomposable(ValueError):
    """Zero pivot with a nonzero remaining row; the matrix cannot be PSD."""

    def __init__(self, index: int):
        super().__init__(f"zero pivot at index {index} with a nonzero row")
        self.index = index


@dataclass(frozen=True)
class LdltResult:
    U: RatMatrix
    D: tuple[Fraction, ...]

    def reconstruct(self) -> RatMatrix:
        return self.U.T @ RatMatrix.diag(self.D) @ self.U


def ldlt(Q: RatMatrix) -> LdltResult:
    """``Q = U^T D U`` with ``U`` unit upper triangular, without pivoting."""
    _require_symmetric(Q)
    n = Q.rows
    A = Q.tolist()
    U = [[_ZERO] * n for _ in range(n)]
    D = []
    for k in range(n):
        d = A[k][k]
        if d == 0:
            if any(A[k][j] != 0 for j in range(k + 1, n)):
                raise NotDecomposable(k)
            U[k][k] = _ONE
            D.append(_ZERO)
            continue
        l = [_ZERO] * k + [A[k][j] / d for j in range(k, n)]
        U[k] = l
        D.append(d)
        for i in range(k + 1, n):
            if l[i] == 0:
                continue
            f = d * l[i]
            Ai = A[i]
            for j in range(k + 1, n):
                Ai[j] -= f * l[j]
    return LdltResult(RatMatrix(U), tuple(D))


def quadratic_form(Q: RatMatrix, monomials: Sequence[Monomial]) -> Polynomial:
    """``m^T Q m`` expanded as a polynomial."""
    if len(monomials) != Q.rows or not Q.is_square():
        raise ValueError("monomial vector length does not match the Gram matrix")
    acc: dict[Monomial, Fraction] = {}
    n = Q.rows
    for i in range(n):
        for j in range(i, n):
            q = Q[i, j] if i == j else Q[i, j] + Q[j, i]
            if q:
                m = monomials[i] * monomials[j]
                acc[m] = acc.get(m, _ZERO) + q
    return Polynomial(acc)


def gram_to_sos(Q: RatMatrix, monomials: Sequence[Monomial]) -> list[tuple[Fraction, Polynomial]]:
    """Weighted squares ``[(d_i, l_i)]`` with ``sum d_i l_i^2 = m^T Q m``; zero weights dropped."""
    if len(monomials) != Q.rows:
        raise ValueError("monomial vector length does not match the Gram matrix")
    try:
        res = ldlt(Q)
    except NotDecomposable as exc:
        raise ValueError("Gram matrix is not positive semidefinite") from exc
    if any(d < 0 for d in res.D):
        raise ValueError("Gram matrix is not positive semidefinite")
    out = []
    for i, d in enumerate(res.D):
        if d == 0:
            continue
        form = Polynomial({monomials[j]: res.U[i, j] for j in range(i, Q.rows)})
        out.append((d, form))
    return out


def elementary_symmetric(values: Sequence) -> list[Fraction]:
    """``sigma_0..sigma_n`` of ``values`` via the product expansion."""
    sig = [_ONE]
    for x in values:
        x = as_rational(x)
        sig = [a + x * b for a, b in zip(sig + [_ZERO], [_ZERO] + sig)]
    return sig
