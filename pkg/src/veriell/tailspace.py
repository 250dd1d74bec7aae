"""Finite models of the orthogonal complement of V_h inside a larger space.

For a cut degree M > N, the complement of V_h^N inside V_h^M (in the H^1_0
inner product) is spanned by chi_t = Phi_t - R_h Phi_t over the tail indices
t.  Its Gram matrices are Schur complements of the degree-M Gram matrices
and are assembled here with verified solves, so eigenvalue bounds on the
complement are fully rigorous.

Used for (a) the certified projection-error constant (complement Poincare
constant of the finite slab, combined with an analytic bound beyond degree
M) and (b) the truncated-surrogate soundness checks.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .interval import Interval, IntervalArray, int_matmul, tensordot_int
from .linalg import EigBounds, gen_eig_bounds, verified_solve
from .legendre import mass_2d, stiffness_2d


def _take(m: IntervalArray, rows, cols) -> IntervalArray:
    return IntervalArray(m.lo[np.ix_(rows, cols)], m.hi[np.ix_(rows, cols)],
                         validate=False)


def flat_indices(m: int, pred) -> np.ndarray:
    """Flat indices (i-1)*m + (j-1) of basis pairs (i,j) with pred(i,j)."""
    out = [(i - 1) * m + (j - 1)
           for i in range(1, m + 1) for j in range(1, m + 1) if pred(i, j)]
    return np.asarray(out, dtype=np.intp)


@dataclass
class ComplementBlock:
    """Schur-complement Gram matrices of one (parity) block of the tail."""

    stiff: IntervalArray  # (chi_t, chi_t')_{H^1_0}
    mass: IntervalArray   # (chi_t, chi_t')_{L^2}
    proj: Optional[IntervalArray]  # X = L_hh^{-1} L_ht (None if no coupling)
    head: np.ndarray      # flat indices of the V_h part of this block
    tail: np.ndarray      # flat indices of the tail part


def _schur_block(lmat: IntervalArray, mmat: IntervalArray,
                 head: np.ndarray, tail: np.ndarray) -> ComplementBlock:
    ltt = _take(lmat, tail, tail)
    mtt = _take(mmat, tail, tail)
    if len(head) == 0:
        return ComplementBlock(stiff=ltt, mass=mtt, proj=None, head=head, tail=tail)
    lht = _take(lmat, head, tail)
    # only columns actually coupled to V_h need a solve
    coupled = np.nonzero(lht.mag().any(axis=0))[0]
    x = IntervalArray.zeros((len(head), len(tail)))
    if len(coupled):
        lhh = _take(lmat, head, head)
        sol = verified_solve(lhh, lht[:, coupled]).box
        x.lo[:, coupled] = sol.lo
        x.hi[:, coupled] = sol.hi
    x = IntervalArray(x.lo, x.hi, validate=False)
    stiff = ltt - tensordot_int(lht, x, (0, 0))
    mht = _take(mmat, head, tail)
    mhh = _take(mmat, head, head)
    mass = (mtt - tensordot_int(mht, x, (0, 0))
            - tensordot_int(x, mht, (0, 0))
            + int_matmul(x.T, int_matmul(mhh, x)))
    return ComplementBlock(stiff=stiff, mass=mass, proj=x, head=head, tail=tail)


def complement_blocks(n: int, m: int, split_parity: bool = True) -> list[ComplementBlock]:
    """Gram blocks of the complement of V_h^N inside V_h^M.

    With split_parity the four (i mod 2, j mod 2) classes are assembled
    separately; stiffness and mass couple only within a class, so this is
    exact, not an approximation.
    """
    if m <= n:
        raise ValueError("cut degree must exceed N")
    lmat = stiffness_2d(m)
    mmat = mass_2d(m)
    groups = []
    if split_parity:
        for pi in (1, 0):
            for pj in (1, 0):
                head = flat_indices(m, lambda i, j, pi=pi, pj=pj:
                                    i % 2 == pi and j % 2 == pj and i <= n and j <= n)
                tail = flat_indices(m, lambda i, j, pi=pi, pj=pj:
                                    i % 2 == pi and j % 2 == pj and (i > n or j > n))
                if len(tail):
                    groups.append((head, tail))
    else:
        head = flat_indices(m, lambda i, j: i <= n and j <= n)
        tail = flat_indices(m, lambda i, j: i > n or j > n)
        groups.append((head, tail))
    return [_schur_block(lmat, mmat, h, t) for h, t in groups]


def complement_poincare(n: int, m: int) -> Interval:
    """Upper bound of sup { ||w||_L2 / ||w||_H10 : w in V_h^M, w ⟂ V_h^N }."""
    worst = 0.0
    for blk in complement_blocks(n, m):
        eb = gen_eig_bounds(blk.mass, blk.stiff)
        worst = max(worst, eb.lam_max)
    return Interval(0.0, worst).sqrt()


@dataclass
class SurrogateSpace:
    """Full (unsplit) complement model used by the surrogate soundness tests."""

    n: int
    m: int
    head: np.ndarray
    tail: np.ndarray
    block: ComplementBlock
    l_full: IntervalArray
    m_full: IntervalArray

    def split_coeffs(self, flat: IntervalArray) -> tuple[IntervalArray, IntervalArray]:
        """Degree-M coefficient vector -> (R_h part in Phi_F, chi coords)."""
        head_part = flat[self.head]
        tail_part = flat[self.tail]
        if self.block.proj is not None:
            head_part = head_part + tensordot_int(self.block.proj, tail_part, (1, 0))
        return head_part, tail_part

    def tail_h10_norm(self, tail_part: IntervalArray) -> Interval:
        q = tensordot_int(tail_part, tensordot_int(self.block.stiff, tail_part, (1, 0)), (0, 0))
        v = q.item()
        return Interval(max(v.lo, 0.0), v.hi).sqrt()


def build_surrogate(n: int, m: int) -> SurrogateSpace:
    head = flat_indices(m, lambda i, j: i <= n and j <= n)
    tail = flat_indices(m, lambda i, j: i > n or j > n)
    blk = _schur_block(stiffness_2d(m), mass_2d(m), head, tail)
    return SurrogateSpace(n=n, m=m, head=head, tail=tail, block=blk,
                          l_full=stiffness_2d(m), m_full=mass_2d(m))
