"""Truncated-tail surrogate checks.

Replacing the infinite complement by the finite slab between degrees N and M
gives a universe where ground truth is computable: the degree-M Galerkin
solution.  Two checks live here:

* soundness: the full fixed-point verifier, run with surrogate constants,
  must enclose the directly computed degree-M solution;
* block identity: the explicit 2x2 inverse formulas must reproduce direct
  verified solves of the linearized system.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .blocks import PolyNonlinearity, assemble_linearization, schur_bounds
from .constants import ConstantProvider, ConstantRecord
from .interval import Interval, IntervalArray, int_matvec, tensordot_int
from .legendre import SpectralFn, load_vector, weighted_gram, stiffness_2d
from .linalg import CachedSolver, gen_eig_bounds, verified_solve
from .tailspace import SurrogateSpace, build_surrogate
from .verify import (
    VerificationCertificate,
    enclose_approx,
    fixed_point_verify,
    galerkin_approx,
    legendre_powers,
    poly_of_function,
    residual_strong,
)


class SurrogateConstants(ConstantProvider):
    """Constants provider whose projection constant is the finite-slab one."""

    def __init__(self, n: int, c_slab: Interval, source: str):
        super().__init__()
        self.c_n_table[n] = ConstantRecord(Interval(0.0, c_slab.hi), source)


def _embed_fn(u: SpectralFn, m: int) -> SpectralFn:
    lo = np.zeros((m, m))
    hi = np.zeros((m, m))
    lo[:u.n, :u.n] = u.coeffs.lo
    hi[:u.n, :u.n] = u.coeffs.hi
    return SpectralFn(m, IntervalArray(lo, hi, validate=False))


@dataclass
class SurrogateRun:
    certificate: VerificationCertificate
    direct: SpectralFn          # degree-M enclosure of the true solution
    contained: bool
    head_error: IntervalArray   # R_h(u*_M - u_hat) coefficients
    tail_norm: Interval         # ||(I - R_h)(u*_M - u_hat)||


def surrogate_residual(uhat: SpectralFn, f: PolyNonlinearity,
                       space: SurrogateSpace) -> Interval:
    """Exact tail residual of the surrogate universe (verified solves)."""
    m = space.m
    u_m = _embed_fn(uhat, m)
    resid = residual_strong(u_m, f)
    load = load_vector(resid, m)
    sol = verified_solve(space.l_full, load).box
    _, tail_part = space.split_coeffs(sol)
    return Interval(0.0, space.tail_h10_norm(tail_part).hi)


def _exact_coupling_bounds(ops: "SurrogateOperators") -> dict:
    """Exact operator norms of the finite-universe coupling blocks (pencils)."""
    space = ops.space
    stiff = space.block.stiff
    l_hh = ops.l_hh
    out = {}
    # tau_Y: ||A_h^{-1} f'|_chi||, pencil (yload^T L_hh^{-1} yload, Stiff_chi)
    y2 = verified_solve(l_hh, ops.y_load).box
    maty = tensordot_int(ops.y_load, y2, (0, 0))
    eb = gen_eig_bounds(maty.intersect(maty.T), stiff)
    out["tau_Y"] = Interval(0.0, max(eb.lam_max, 0.0)).sqrt()
    # tau_Z: ||A_chi^{-1} f'|_Vh||, pencil (zload^T Stiff^{-1} zload, L_hh)
    z2 = verified_solve(stiff, ops.z_load).box
    matz = tensordot_int(ops.z_load, z2, (0, 0))
    eb = gen_eig_bounds(matz.intersect(matz.T), l_hh)
    out["tau_Z"] = Interval(0.0, max(eb.lam_max, 0.0)).sqrt()
    # kappa_perp: ||A_chi^{-1} f'|_chi||
    g2 = verified_solve(stiff, ops.gchi_mat).box
    matg = tensordot_int(ops.gchi_mat, g2, (0, 0))
    eb = gen_eig_bounds(matg.intersect(matg.T), stiff)
    out["kappa_perp"] = Interval(0.0, max(eb.lam_max, 0.0)).sqrt()
    return out


def surrogate_fixed_point(f: PolyNonlinearity, n: int, m: int,
                          seed: Optional[SpectralFn] = None) -> SurrogateRun:
    """Run the fixed-point verifier in the degree-M surrogate universe and
    test its enclosure against the directly computed degree-M solution."""
    space = build_surrogate(n, m)
    eb = gen_eig_bounds(space.block.mass, space.block.stiff)
    c_slab = Interval(0.0, max(eb.lam_max, 0.0)).sqrt()
    constants = SurrogateConstants(
        n, c_slab, f"finite-slab complement constant (N={n}, M={m})")

    u0 = galerkin_approx(f, n, seed=seed)
    uhat = enclose_approx(u0, f)
    prob = assemble_linearization(uhat, f, constants)
    ops = build_surrogate_operators(uhat, f, space)
    prob.chain_overrides.update(_exact_coupling_bounds(ops))
    b = schur_bounds(prob)
    delta = surrogate_residual(uhat, f, space)
    resid_l2 = residual_strong(uhat, f, prob.u_powers).l2_norm()
    cert = fixed_point_verify(prob, b, delta, resid_l2)

    # directly computed truth of this universe
    um0 = galerkin_approx(f, m, seed=_embed_fn(u0, m), symmetric=False)
    um = enclose_approx(um0, f)
    diff_flat = um.coeffs.reshape(m * m) - _embed_fn(uhat, m).coeffs.reshape(m * m)
    head_err, tail_part = space.split_coeffs(diff_flat)
    tail_norm = space.tail_h10_norm(tail_part)

    contained = False
    if cert.verified and cert.wh is not None:
        from .legendre import h10_norm_sup
        wh_flat = cert.wh.coeffs.reshape(n * n)
        head_norm = h10_norm_sup(head_err.reshape(n, n), n)
        contained = bool(wh_flat.encloses(head_err)
                         and head_norm.hi <= cert.sup_wh.hi
                         and tail_norm.hi <= cert.alpha.hi)
    return SurrogateRun(certificate=cert, direct=um, contained=contained,
                        head_error=head_err, tail_norm=tail_norm)


# =====================================================================
# Block-inverse identity at the finite level
# =====================================================================

@dataclass
class SurrogateOperators:
    """All blocks of the linearized operator matrix in (V_h, chi) coords."""

    space: SurrogateSpace
    g_n: IntervalArray        # finite-block Galerkin matrix (N^2 x N^2)
    l_hh: IntervalArray
    m2_full: IntervalArray    # (f'(u) Phi, Phi) over the degree-M basis
    y_load: IntervalArray     # (f'(u) chi_t, Phi_F)
    z_load: IntervalArray     # (f'(u) Phi_F, chi_t)
    gchi_mat: IntervalArray   # (f'(u) chi_s, chi_t)
    g_m: IntervalArray        # degree-M Galerkin matrix


def build_surrogate_operators(uhat: SpectralFn, f: PolyNonlinearity,
                              space: SurrogateSpace) -> SurrogateOperators:
    n, m = space.n, space.m
    um = _embed_fn(uhat, m)
    powers = legendre_powers(um, max(f.degree - 1, 1))
    fprime = poly_of_function(f.derivative(), powers)
    m2 = weighted_gram(fprime, m, factor=1.0)
    lm = space.l_full
    head, tail = space.head, space.tail
    x = space.block.proj
    m2_ht = IntervalArray(m2.lo[np.ix_(head, tail)], m2.hi[np.ix_(head, tail)])
    m2_hh = IntervalArray(m2.lo[np.ix_(head, head)], m2.hi[np.ix_(head, head)])
    m2_tt = IntervalArray(m2.lo[np.ix_(tail, tail)], m2.hi[np.ix_(tail, tail)])
    # chi_t = Phi_t - sum_F X[F,t] Phi_F
    y_load = m2_ht - tensordot_int(m2_hh, x, (1, 0))
    z_load = y_load.T  # (f' Phi_F, chi_t) transposed pairing, f' symmetric weight
    gchi = (m2_tt - tensordot_int(x, m2_ht, (0, 0))
            - tensordot_int(m2_ht, x, (0, 0))
            + tensordot_int(x, tensordot_int(m2_hh, x, (1, 0)), (0, 0)))
    l_hh = IntervalArray(lm.lo[np.ix_(head, head)], lm.hi[np.ix_(head, head)])
    g_n = l_hh - m2_hh
    g_m = lm - m2
    return SurrogateOperators(space=space, g_n=g_n, l_hh=l_hh, m2_full=m2,
                              y_load=y_load, z_load=z_load, gchi_mat=gchi,
                              g_m=g_m)


def block_solve(ops: SurrogateOperators, g_flat: IntervalArray
                ) -> tuple[IntervalArray, IntervalArray]:
    """Solve the linearized equation through the explicit block formulas.

    Returns (finite coefficients of R_h phi, chi coordinates of the rest).
    """
    space = ops.space
    head, tail = space.head, space.tail
    load_f = g_flat[head]
    load_t = g_flat[tail]
    if space.block.proj is not None:
        load_chi = load_t - tensordot_int(space.block.proj, load_f, (0, 0))
    else:
        load_chi = load_t
    stiff_chi = space.block.stiff
    chi_solver = CachedSolver(stiff_chi)
    t_solver = CachedSolver(ops.g_n)
    l_solver = CachedSolver(ops.l_hh)

    rhs1 = l_solver.solve(load_f)          # A_h^{-1} g coefficients
    rhs2 = chi_solver.solve(load_chi)      # A_chi^{-1} g chi-coordinates

    def t_inv(v):
        return t_solver.solve(int_matvec(ops.l_hh, v))

    def y_op(zc):
        return l_solver.solve(int_matvec(ops.y_load, zc))

    def z_op(vh):
        return chi_solver.solve(int_matvec(ops.z_load, vh))

    def gchi_op(zc):
        return zc - chi_solver.solve(int_matvec(ops.gchi_mat, zc))

    # Schur complement S = G_chi - Z T^{-1} Y assembled columnwise
    dim_t = len(tail)
    cols_lo = np.empty((dim_t, dim_t))
    cols_hi = np.empty((dim_t, dim_t))
    for k in range(dim_t):
        ek = IntervalArray.zeros((dim_t,))
        ek.lo[k] = ek.hi[k] = 1.0
        col = gchi_op(ek) - z_op(t_inv(y_op(ek)))
        cols_lo[:, k] = col.lo
        cols_hi[:, k] = col.hi
    s_mat = IntervalArray(cols_lo, cols_hi)
    s_solver = CachedSolver(s_mat)

    zt1 = z_op(t_inv(rhs1))
    phi_chi = s_solver.solve(rhs2 + zt1)
    phi_h = t_inv(rhs1) + t_inv(y_op(phi_chi))
    return phi_h, phi_chi


def direct_solve(ops: SurrogateOperators, g_flat: IntervalArray
                 ) -> tuple[IntervalArray, IntervalArray]:
    """Direct verified solve of the full degree-M linearized system."""
    sol = verified_solve(ops.g_m, g_flat).box
    return ops.space.split_coeffs(sol)


def boxes_intersect(a: IntervalArray, b: IntervalArray) -> bool:
    return bool((np.maximum(a.lo, b.lo) <= np.minimum(a.hi, b.hi)).all())
