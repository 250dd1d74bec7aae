"""Rigorous enclosures for linear solves, nonlinear zeros and eigenvalue bounds.

Floating-point approximations (inverses, eigendecompositions) are only used
as preconditioners; every returned bound is certified by interval residual
arithmetic on top of them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .interval import (
    Interval,
    IntervalArray,
    identity_int,
    int_matmul,
    int_matvec,
    tensordot_int,
)


class InconclusiveError(RuntimeError):
    """A verification step could not be completed (not a refutation)."""


@dataclass
class Enclosure:
    """Solution box plus the strength of the certificate attached to it."""

    box: IntervalArray
    unique: bool  # True: proved exactly one solution in the box

    @property
    def certificate(self) -> str:
        return "proved-unique-in-box" if self.unique else "enclosure-only"


def _mid_inverse(a_mid: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.inv(a_mid)
    except np.linalg.LinAlgError as exc:
        raise InconclusiveError(f"approximate inverse failed: {exc}") from None


def verified_solve(a: IntervalArray, b: IntervalArray,
                   max_iter: int = 20) -> Enclosure:
    """Enclose the solution set {x : Ax = b, A in a, b in b}.

    Success proves that every point matrix in `a` is nonsingular.  `b` may be
    a vector or a matrix of right-hand sides.
    """
    n = a.shape[0]
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if b.shape[0] != n:
        raise ValueError("dimension mismatch")
    r = _mid_inverse(a.mid())
    ri = IntervalArray.from_point(r)
    xs = IntervalArray.from_point(r @ b.mid())
    # z encloses R(b - A xs); c encloses I - R A
    z = int_matmul(ri, b - int_matmul(a, xs)) if b.ndim == 2 else \
        int_matvec(ri, b - int_matvec(a, xs))
    c = identity_int(n) - int_matmul(ri, a)
    x = z
    for _ in range(max_iter):
        # epsilon-inflation before the inclusion test
        y = _inflate(x)
        xn = z + (int_matmul(c, y) if y.ndim == 2 else int_matvec(c, y))
        if y.interior_contains(xn):
            return Enclosure(box=xs + xn, unique=True)
        x = xn
    raise InconclusiveError("verified_solve: residual contraction failed")


def _inflate(x: IntervalArray, rel: float = 1e-12, absdelta: float = 1e-300) -> IntervalArray:
    pad = rel * x.mag() + absdelta
    return IntervalArray(x.lo - pad, x.hi + pad, validate=False)


def verified_inverse(a: IntervalArray) -> IntervalArray:
    """Enclosure of A^{-1} for every A in `a`."""
    n = a.shape[0]
    return verified_solve(a, identity_int(n)).box


class CachedSolver:
    """Repeated verified solves against one interval matrix.

    The approximate inverse and the interval iteration matrix I - R A are
    computed once; each solve then costs a couple of interval matvecs.
    """

    def __init__(self, a: IntervalArray):
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("matrix must be square")
        self.a = a
        self.r = _mid_inverse(a.mid())
        self.ri = IntervalArray.from_point(self.r)
        self.c = identity_int(a.shape[0]) - int_matmul(self.ri, a)

    def solve(self, b: IntervalArray, max_iter: int = 20) -> IntervalArray:
        xs = IntervalArray.from_point(self.r @ b.mid())
        mv = int_matmul if b.ndim == 2 else int_matvec
        z = mv(self.ri, b - mv(self.a, xs))
        x = z
        for _ in range(max_iter):
            y = _inflate(x)
            xn = z + mv(self.c, y)
            if y.interior_contains(xn):
                return xs + xn
            x = xn
        raise InconclusiveError("cached verified solve: contraction failed")


def krawczyk_solve(f: Callable[[IntervalArray], IntervalArray],
                   jac: Callable[[IntervalArray], IntervalArray],
                   x0: np.ndarray,
                   inflation: float = 1e-12,
                   abs_inflation: float = 1e-300,
                   retries: int = 10,
                   max_iter: int = 50) -> Enclosure:
    """Krawczyk existence/uniqueness test around the approximate zero x0.

    f maps interval vectors to interval vectors; jac returns an interval
    Jacobian over a box.  On success the returned box contains exactly one
    zero of f.
    """
    xs = np.asarray(x0, dtype=np.float64).copy()
    # refine the seed by float Newton so the residual step is tiny before
    # the interval test starts
    for _ in range(50):
        xpt = IntervalArray.from_point(xs)
        fm = f(xpt).mid()
        try:
            delta = np.linalg.solve(jac(xpt).mid(), fm)
        except np.linalg.LinAlgError:
            raise InconclusiveError("krawczyk_solve: singular midpoint Jacobian")
        xs = xs - delta
        if np.linalg.norm(delta) <= 1e-15 * max(1.0, float(np.linalg.norm(xs))):
            break
    xpt = IntervalArray.from_point(xs)
    jmid = jac(xpt).mid()
    y = _mid_inverse(jmid)
    yi = IntervalArray.from_point(y)
    fx = f(xpt)
    step = int_matvec(yi, fx)

    rel = inflation
    absd = abs_inflation
    for _ in range(retries):
        x = IntervalArray(xs - (rel * np.abs(xs) + absd),
                          xs + (rel * np.abs(xs) + absd), validate=False)
        for _ in range(max_iter):
            jx = jac(x)
            c = identity_int(len(xs)) - int_matmul(yi, jx)
            dx = IntervalArray(x.lo - xs, x.hi - xs, validate=False)
            k = (-step) + int_matvec(c, dx)
            kx = IntervalArray(xs + k.lo, xs + k.hi, validate=False)
            if x.interior_contains(kx):
                return Enclosure(box=kx, unique=True)
            try:
                x = x.intersect(kx)
            except Exception:
                break
            x = _inflate(x, rel, absd)
        rel *= 2.0
        absd *= 2.0
    raise InconclusiveError("krawczyk_solve: inclusion not achieved")


# =====================================================================
# Norm and eigenvalue bounds
# =====================================================================

def _upper_abs_rowsums(m: IntervalArray) -> np.ndarray:
    mags = IntervalArray.from_point(m.mag())
    return mags.sum(axis=1).hi


def spectral_norm_ub(m: IntervalArray, sharp: bool = False) -> Interval:
    """Rigorous upper bound for the 2-norm of every matrix in `m`.

    Default: ||M||_2 <= sqrt(||M||_1 ||M||_inf).  With sharp=True a
    Gershgorin/Weyl bound on M^T M is tried as well and the smaller upper
    bound wins.
    """
    mags = IntervalArray.from_point(m.mag())
    norm_inf = float(np.max(mags.sum(axis=1).hi)) if m.shape[0] else 0.0
    norm_1 = float(np.max(mags.sum(axis=0).hi)) if m.shape[1] else 0.0
    base = (Interval(0.0, norm_1) * Interval(0.0, norm_inf)).sqrt()
    bound = Interval(0.0, base.hi)
    if sharp:
        try:
            mtm = tensordot_int(m, m, (0, 0))
            mtm = mtm.intersect(mtm.T)
            eb = eig_bounds_sym(mtm)
            sharp_hi = Interval(0.0, max(eb.lam_max, 0.0)).sqrt().hi
            if sharp_hi < bound.hi:
                bound = Interval(0.0, sharp_hi)
        except InconclusiveError:
            pass
    return bound


def two_by_two_norm_ub(h: IntervalArray) -> Interval:
    """Sharp upper bound of the 2-norm of a nonnegative 2x2 interval matrix."""
    a = int_matmul(h.T, h)
    # largest eigenvalue of the symmetric 2x2 matrix a
    a11, a12, a21, a22 = a.item(0, 0), a.item(0, 1), a.item(1, 0), a.item(1, 1)
    a12 = a12.intersect(a21)
    tr = a11 + a22
    disc = (a11 - a22).sqr() + (a12 * a12).scale(4.0)
    lam = (tr + disc.sqrt()).scale(0.5)
    return Interval(0.0, lam.sqrt().hi)


def interval_cholesky(b: IntervalArray) -> IntervalArray:
    """Interval Cholesky factor of B; success proves every B in b is SPD."""
    n = b.shape[0]
    if (np.abs(b.mid() - b.mid().T) > 0).any():
        b = b.intersect(b.T)
    low = IntervalArray.zeros((n, n))
    for j in range(n):
        if j:
            s = (low[j, :j] * low[j, :j]).sum(axis=0)
            d = b.item(j, j) - Interval(float(s.lo), float(s.hi))
        else:
            d = b.item(j, j)
        if d.lo <= 0.0:
            raise InconclusiveError("interval Cholesky: pivot not positive")
        piv = d.sqrt()
        low.lo[j, j], low.hi[j, j] = piv.lo, piv.hi
        if j + 1 < n:
            if j:
                s = (low[j + 1:, :j] * low[j, :j]).sum(axis=1)
                rest = b[j + 1:, j] - s
            else:
                rest = b[j + 1:, j]
            col = rest.divide_scalar(piv)
            low.lo[j + 1:, j] = col.lo
            low.hi[j + 1:, j] = col.hi
    return low


@dataclass
class EigBounds:
    """Enclosures of all generalized eigenvalues of a symmetric pencil."""

    intervals: IntervalArray  # ascending, one per eigenvalue
    eps_p: float
    eps_q: float

    @property
    def lam_min(self) -> float:
        return float(np.min(self.intervals.lo))

    @property
    def lam_max(self) -> float:
        return float(np.max(self.intervals.hi))

    def min_abs(self) -> float:
        """Largest certified lower bound of min_k |lambda_k|; 0 if undecided."""
        straddle = (self.intervals.lo <= 0.0) & (self.intervals.hi >= 0.0)
        if straddle.any():
            return 0.0
        return float(np.min(np.minimum(np.abs(self.intervals.lo),
                                       np.abs(self.intervals.hi))))


def _sym_upper_2norm(m: IntervalArray) -> float:
    return float(np.max(_upper_abs_rowsums(m)))


def gen_eig_bounds(a: IntervalArray, b: Optional[IntervalArray] = None,
                   check_spd: bool = True) -> EigBounds:
    """Enclose all eigenvalues of the symmetric pencil A v = lambda B v.

    B must be symmetric positive definite (verified by interval Cholesky
    unless check_spd=False and B is the identity).  Realization: float
    eigendecomposition, then a Weyl/Gershgorin sandwich on the interval
    congruences V^T A V and V^T B V.
    """
    n = a.shape[0]
    a = a.intersect(a.T)
    if b is None:
        b = identity_int(n)
        bmid = np.eye(n)
    else:
        b = b.intersect(b.T)
        if check_spd:
            interval_cholesky(b)
        bmid = b.mid()
    try:
        w, v = scipy.linalg.eigh(a.mid(), bmid)
    except scipy.linalg.LinAlgError as exc:
        raise InconclusiveError(f"float eigendecomposition failed: {exc}") from None
    vi = IntervalArray.from_point(v)
    p = int_matmul(vi.T, int_matmul(a, vi))
    q = int_matmul(vi.T, int_matmul(b, vi))
    # eps_q = || Q - I ||_2 upper; eps_q < 1 certifies V nonsingular
    qd = q - identity_int(n)
    eps_q = _sym_upper_2norm(qd)
    if eps_q >= 1.0:
        raise InconclusiveError(f"basis residual too large (eps_q={eps_q:.3e})")
    dmat = IntervalArray.zeros((n, n))
    dmat.lo[np.diag_indices(n)] = w
    dmat.hi[np.diag_indices(n)] = w
    eps_p = _sym_upper_2norm(p - dmat)

    one = Interval.point(1.0)
    lo = np.empty(n)
    hi = np.empty(n)
    for k in range(n):
        lam_p = Interval(w[k] - eps_p, w[k] + eps_p)
        cands = []
        for denom in (one - Interval.point(eps_q), one + Interval.point(eps_q)):
            iv = lam_p / denom
            cands.append(iv)
        lo[k] = min(c.lo for c in cands)
        hi[k] = max(c.hi for c in cands)
    return EigBounds(intervals=IntervalArray(lo, hi), eps_p=eps_p, eps_q=eps_q)


def eig_bounds_sym(a: IntervalArray) -> EigBounds:
    """Eigenvalue enclosures of a symmetric interval matrix (B = I)."""
    return gen_eig_bounds(a, None, check_spd=False)


def block_diag_eig_bounds(blocks: list[IntervalArray],
                          b_blocks: Optional[list[IntervalArray]] = None) -> EigBounds:
    """Eigenvalue enclosures of a block-diagonal pencil, given its blocks."""
    parts = []
    for i, ablk in enumerate(blocks):
        bblk = b_blocks[i] if b_blocks is not None else None
        parts.append(gen_eig_bounds(ablk, bblk))
    lo = np.concatenate([p.intervals.lo for p in parts])
    hi = np.concatenate([p.intervals.hi for p in parts])
    order = np.argsort(lo)
    return EigBounds(intervals=IntervalArray(lo[order], hi[order]),
                     eps_p=max(p.eps_p for p in parts),
                     eps_q=max(p.eps_q for p in parts))
