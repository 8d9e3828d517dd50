"""Floating-point feasibility search, rationalization and the degeneracy probe.

The solver never claims exactness: a ``Feasible`` outcome only hands back a
float point, which callers rationalize and pass to the exact verifier.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .exactlinalg import RatMatrix, adjugate, det, nullspace
from .parse import param_names
from .ratpoly import Monomial, Polynomial
from .reduction import Pencil, slice

STEP_FLOOR = 1e-12
PLATEAU_ITERS = 50


class SolveStatus(str, enum.Enum):
    FEASIBLE = "Feasible"
    STALLED = "Stalled"
    LIKELY_INFEASIBLE = "LikelyInfeasible"

    def __str__(self) -> str:
        return self.value


@dataclass
class SolveOutcome:
    status: SolveStatus
    alpha: np.ndarray | None
    mu_trace: list[float] = field(default_factory=list)
    min_eig_estimate: float = float("nan")
    margin: float = float("nan")
    kernel_dim: int = 0
    iterations: int = 0
    message: str = ""


def common_kernel(pencil: Pencil) -> list[tuple[Fraction, ...]]:
    """Exact basis of the vectors annihilated by ``F0`` and every ``F_i``."""
    n = pencil.size
    stacked = [list(r) for M in (pencil.F0,) + pencil.basis for r in M]
    if not stacked:
        return []
    return nullspace(RatMatrix(stacked)) if n else []


def _complement_basis(kernel: list[tuple[Fraction, ...]], n: int) -> np.ndarray:
    if not kernel:
        return np.eye(n)
    K = np.array([[float(x) for x in v] for v in kernel]).T
    Q, _ = np.linalg.qr(K, mode="complete")
    return Q[:, len(kernel):]


def _min_eig(M: np.ndarray) -> float:
    if M.shape[0] == 0:
        return math.inf
    return float(np.linalg.eigvalsh(M)[0])


def solve_feasibility(
    pencil: Pencil,
    tol: float = 1e-7,
    max_iter: int = 500,
    radius: float = 1e4,
) -> SolveOutcome:
    """Look for ``alpha`` with ``-F0 + sum alpha_i F_i`` positive semidefinite.

    Directions shared by the kernels of all pencil matrices are projected out
    first, since no parameter choice can move those eigenvalues.  On the rest
    the solver follows the log-det barrier path for

        maximize t  subject to  G(alpha) - t*Id > 0,  |alpha| < radius,

    i.e. it minimizes the shift ``mu = -t`` that makes ``G(alpha) + mu*Id``
    semidefinite.  ``Feasible`` means a point with margin ``t >= tol`` was
    reached; the duality-gap bound ``(k+1)/s`` of the barrier method decides
    between ``Stalled`` (best margin pinned near zero, an empty interior) and
    ``LikelyInfeasible`` (margin bounded away below zero).  Neither negative
    outcome is a proof of anything.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    F0f, Fsf = pencil.float_matrices()
    n, m = pencil.size, pencil.m
    kernel = common_kernel(pencil)
    W = _complement_basis(kernel, n)
    G0 = W.T @ (-F0f) @ W
    Gs = [W.T @ F @ W for F in Fsf]
    k = G0.shape[0]
    scale = max([1.0] + [float(np.abs(M).max()) for M in [G0] + Gs if M.size])
    infeasible_gap = max(1e-6 * scale, 100 * tol)

    def full_min_eig(alpha):
        return _min_eig(-F0f + sum((a * F for a, F in zip(alpha, Fsf)), np.zeros_like(F0f)))

    def G(alpha):
        return G0 + sum((a * M for a, M in zip(alpha, Gs)), np.zeros_like(G0))

    out = SolveOutcome(SolveStatus.STALLED, None, kernel_dim=len(kernel))
    if k == 0:
        alpha = np.zeros(m)
        out.status, out.alpha, out.margin = SolveStatus.FEASIBLE, alpha, math.inf
        out.min_eig_estimate = full_min_eig(alpha) if n else math.inf
        out.message = "every pencil matrix vanishes on the whole space"
        return out

    if m == 0:
        t = _min_eig(G0)
        out.alpha, out.margin, out.min_eig_estimate = np.zeros(0), t, full_min_eig([])
        out.mu_trace = [-t]
        if t >= tol:
            out.status, out.message = SolveStatus.FEASIBLE, "fixed matrix is positive definite on the reduced space"
        elif t < -infeasible_gap:
            out.status, out.message = SolveStatus.LIKELY_INFEASIBLE, "fixed matrix has a negative eigenvalue"
        else:
            out.message = "fixed matrix is singular to working precision"
        return out

    A = np.stack(Gs)  # (m, k, k)
    Id = np.eye(k)
    R2 = radius * radius

    def f_val(alpha, t, s):
        S = G(alpha) - t * Id
        try:
            L = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            return math.inf
        slack = R2 - alpha @ alpha
        if slack <= 0:
            return math.inf
        return -s * t - 2.0 * np.log(np.diag(L)).sum() - math.log(slack)

    def grad_hess(alpha, t, s):
        S = G(alpha) - t * Id
        Sinv = np.linalg.inv(S)
        B = np.concatenate([np.einsum("ij,mjk->mik", Sinv, A), -Sinv[None]], axis=0)
        g = -np.einsum("mii->m", B)
        H = np.einsum("aij,bji->ab", B, B)
        slack = R2 - alpha @ alpha
        g[:m] += 2 * alpha / slack
        H[:m, :m] += 2 * np.eye(m) / slack + 4 * np.outer(alpha, alpha) / slack**2
        g[m] -= s
        return g, H

    alpha = np.zeros(m)
    lam0 = _min_eig(G(alpha))
    t = lam0 - max(1.0, 0.1 * abs(lam0))
    s = 1.0 / max(1.0, abs(lam0))
    best, since_best = None, 0
    it = 0
    status, message = None, ""
    while status is None:
        # centering for the current barrier weight
        for _ in range(50):
            if it >= max_iter:
                status, message = SolveStatus.STALLED, f"iteration limit {max_iter} reached"
                break
            it += 1
            g, H = grad_hess(alpha, t, s)
            H = H + 1e-14 * (np.trace(H) / (m + 1)) * np.eye(m + 1)
            try:
                step = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(H, -g, rcond=None)[0]
            dec = float(-g @ step)
            f0 = f_val(alpha, t, s)
            h = 1.0
            while h > 1e-16:
                f1 = f_val(alpha + h * step[:m], t + h * step[m], s)
                if f1 <= f0 + 0.25 * h * g @ step:
                    break
                h *= 0.5
            moved = h * np.linalg.norm(step)
            if h > 1e-16:
                alpha = alpha + h * step[:m]
                t = t + h * step[m]
            margin = _min_eig(G(alpha))
            out.mu_trace.append(-margin)
            if best is None or margin > best + 1e-12 * max(1.0, abs(best)):
                best, since_best = margin, 0
            else:
                since_best += 1
            if margin >= max(tol, scale):
                status, message = SolveStatus.FEASIBLE, "strictly feasible point on the reduced pencil"
                break
            if moved < STEP_FLOOR * (1 + np.linalg.norm(alpha) + abs(t)):
                if margin < tol:
                    status, message = SolveStatus.STALLED, "terminated due to small steps"
                break
            if since_best >= PLATEAU_ITERS and margin < tol:
                status, message = SolveStatus.STALLED, f"margin plateaued for {PLATEAU_ITERS} iterations"
                break
            if dec / 2 < 1e-10:
                break
        if status is not None:
            break
        margin = _min_eig(G(alpha))
        gap = (k + 1) / s
        if margin >= tol and (gap <= 0.5 * margin or margin >= scale):
            status, message = SolveStatus.FEASIBLE, "strictly feasible point on the reduced pencil"
        elif margin + gap < tol:
            if margin + gap < -infeasible_gap:
                status, message = SolveStatus.LIKELY_INFEASIBLE, f"best margin bounded by {margin + gap:.3e} < 0"
            else:
                status, message = SolveStatus.STALLED, "best attainable margin is zero to working precision (empty interior)"
        s *= 8.0
    out.status, out.message, out.iterations = status, message, it
    out.alpha = alpha
    out.margin = _min_eig(G(alpha))
    out.min_eig_estimate = full_min_eig(alpha)
    return out


# -- rationalization ---------------------------------------------------------


def convergents(x: Fraction):
    """Continued-fraction convergents ``p/q`` of a nonnegative rational, in order."""
    p0, q0, p1, q1 = 0, 1, 1, 0
    num, den = x.numerator, x.denominator
    while den:
        a, r = divmod(num, den)
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        yield Fraction(p1, q1)
        num, den = den, r


def rationalize_one(x: float, max_den: int) -> Fraction:
    """Last convergent of ``x`` whose denominator does not exceed ``max_den``."""
    if max_den < 1:
        raise ValueError("max_den must be at least 1")
    if not math.isfinite(x):
        raise ValueError("cannot rationalize a non-finite value")
    exact = Fraction(abs(x))
    best = Fraction(math.floor(exact))
    for c in convergents(exact):
        if c.denominator > max_den:
            break
        best = c
    return -best if x < 0 else best


def rationalize(alpha: Sequence[float], max_den: int) -> list[Fraction]:
    return [rationalize_one(float(a), max_den) for a in alpha]


def denominator_ladder(max_den: int) -> list[int]:
    """1, 10, 100, ... capped at ``max_den`` (which is always last)."""
    out, d = [], 1
    while d < max_den:
        out.append(d)
        d *= 10
    out.append(max_den)
    return out


# -- degeneracy probe --------------------------------------------------------


@dataclass(frozen=True)
class ProbeReport:
    phi_value: Fraction
    gradient: tuple[Fraction, ...]
    singular: bool
    symbolic_det: Polynomial | None = None
    common_kernel_dim: int = 0


SYMBOLIC_MAX_PARAMS = 4
SYMBOLIC_MAX_SIZE = 8


def _poly_det(entries: list[list[Polynomial]]) -> Polynomial:
    n = len(entries)

    @lru_cache(maxsize=None)
    def minor(row: int, cols: int) -> Polynomial:
        if row == n:
            return Polynomial.constant(1)
        acc = Polynomial()
        sign = 1
        for j in range(n):
            if cols >> j & 1:
                continue
            e = entries[row][j]
            if not e.is_zero():
                term = e * minor(row + 1, cols | (1 << j))
                acc = acc + term if sign > 0 else acc - term
            sign = -sign
        return acc

    return minor(0, 0)


def symbolic_determinant(pencil: Pencil) -> Polynomial:
    """``det(-F0 + sum a_i F_i)`` as a polynomial in ``a1..am`` (block by block)."""
    names = param_names(pencil.m)
    gens = [Polynomial.var(v) for v in names]
    total = Polynomial.constant(1)
    for blk in pencil.blocks:
        idx = range(blk.offset, blk.offset + blk.size)
        entries = []
        for i in idx:
            row = []
            for j in idx:
                e = Polynomial.constant(-pencil.F0[i, j])
                for g, F in zip(gens, pencil.basis):
                    if F[i, j]:
                        e = e + g * F[i, j]
                row.append(e)
            entries.append(row)
        total = total * _poly_det(entries)
    return total


def degeneracy_probe(pencil: Pencil, point: Sequence[Fraction], symbolic: bool = True) -> ProbeReport:
    """Exact ``phi = det(-F0 + sum a_i F_i)`` and its gradient at a rational point.

    The gradient uses ``d phi / d a_i = trace(adj(F) F_i)``.  A point where both
    vanish is a singular point of the determinant hypersurface, which is where
    a solution set with empty interior touches it.
    """
    F = pencil.matrix_at(point)
    phi = det(F)
    adj = adjugate(F)
    grad = []
    n = pencil.size
    for Fi in pencil.basis:
        grad.append(sum((adj[r, c] * Fi[c, r] for r in range(n) for c in range(n) if Fi[c, r]), Fraction(0)))
    sym = None
    if symbolic and pencil.m <= SYMBOLIC_MAX_PARAMS and pencil.size <= SYMBOLIC_MAX_SIZE:
        sym = symbolic_determinant(pencil)
    singular = phi == 0 and all(g == 0 for g in grad)
    return ProbeReport(phi, tuple(grad), singular, sym, len(common_kernel(pencil)))


def slice_by_estimate(pencil: Pencil, alpha_tilde: Sequence[float], index: int, max_den: int = 10**6) -> Pencil:
    """Fix parameter ``index`` at the rationalized estimate.

    Each such slice lowers the dimension by one; doing it for too many
    parameters can leave a solution set with empty interior in the smaller
    space, which numerics cannot hit either.
    """
    if not 0 <= index < pencil.m:
        raise IndexError(f"parameter index {index} out of range for {pencil.m} parameters")
    value = rationalize_one(float(alpha_tilde[index]), max_den)
    coeffs = [Fraction(int(i == index)) for i in range(pencil.m)]
    return slice(pencil, coeffs, value)
