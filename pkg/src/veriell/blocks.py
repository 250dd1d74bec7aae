"""Block decomposition of the linearized solution operator.

Splitting H^1_0 into V_h and its complement turns the linearization
A - f'(u) into a 2x2 operator matrix; its inverse has an explicit
Schur-complement form whose four block norms drive every verification
bound.  This module assembles the finite data (Gram matrices, weighted
Grams), certifies invertibility of the finite block, and produces rigorous
upper bounds for the block norms, trying the sharp pencil-based chains
first and falling back to sup-norm chains when a pencil cannot be
certified.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constants import ConstantProvider
from .interval import Interval, IntervalArray, quad_form_sup, tensordot_int
from .legendre import (
    LegPoly2D,
    SpectralFn,
    g3_table,
    linf_upper,
    stiffness_2d,
    weighted_gram,
)
from .linalg import (
    EigBounds,
    InconclusiveError,
    block_diag_eig_bounds,
    gen_eig_bounds,
    two_by_two_norm_ub,
    verified_solve,
)


# =====================================================================
# Nonlinearity descriptor
# =====================================================================

@dataclass(frozen=True)
class PolyNonlinearity:
    """f(u) = sum_k coeffs[k] * u^k (finite polynomial)."""

    coeffs: tuple[float, ...]

    @staticmethod
    def emden() -> "PolyNonlinearity":
        return PolyNonlinearity((0.0, 0.0, 1.0))

    @staticmethod
    def from_list(cs) -> "PolyNonlinearity":
        return PolyNonlinearity(tuple(float(c) for c in cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def derivative(self) -> "PolyNonlinearity":
        return PolyNonlinearity(tuple(k * c for k, c in enumerate(self.coeffs))[1:]
                                or (0.0,))

    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.coeffs)


def leg_constant(value: float, like: Optional[LegPoly2D] = None) -> LegPoly2D:
    arr = IntervalArray.from_point(np.array([[value]]))
    return LegPoly2D(arr)


def poly_of_function(f: PolyNonlinearity, powers: list[LegPoly2D]) -> LegPoly2D:
    """sum_k c_k u^k given cached Legendre powers of u (powers[k] = u^k)."""
    out = None
    for k, c in enumerate(f.coeffs):
        if c == 0.0:
            continue
        term = powers[k].scale(c)
        out = term if out is None else out + term
    return out if out is not None else leg_constant(0.0)


def legendre_powers(u: SpectralFn, kmax: int) -> list[LegPoly2D]:
    """[1, u, u^2, ..., u^kmax] in exact-degree Legendre form."""
    powers = [leg_constant(1.0)]
    if kmax >= 1:
        ul = u.to_legendre()
        powers.append(ul)
        for _ in range(2, kmax + 1):
            powers.append(powers[-1].mul(ul))
    return powers


# =====================================================================
# Linearized problem assembly
# =====================================================================

@dataclass
class LinearizedProblem:
    uhat: SpectralFn
    f: PolyNonlinearity
    n: int
    constants: ConstantProvider
    l_gram: IntervalArray          # 2D stiffness
    g_matrix: IntervalArray        # L - (f'(u) Phi, Phi)
    fprime_leg: LegPoly2D          # f'(u) in Legendre coords
    q_gram: Optional[IntervalArray]  # (f'(u) Phi, f'(u) Phi)
    mf: Interval                   # >= sup |f'(u)|
    uhat_linf: Interval            # >= sup |u|
    u_powers: list[LegPoly2D]
    parity_classes: Optional[list[np.ndarray]]  # exact parity split or None
    # sharper bounds injected by finite-universe (surrogate) instantiations
    chain_overrides: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict)

    # --- structured pencils -------------------------------------------
    def _blocks_of(self, mat: IntervalArray) -> list[IntervalArray]:
        if self.parity_classes is None:
            return [mat]
        out = []
        for cls in self.parity_classes:
            out.append(IntervalArray(mat.lo[np.ix_(cls, cls)],
                                     mat.hi[np.ix_(cls, cls)], validate=False))
        return out

    def pencil(self, a: IntervalArray, b: IntervalArray) -> EigBounds:
        return block_diag_eig_bounds(self._blocks_of(a), self._blocks_of(b))

    def diag_l_inv_sqrt(self) -> np.ndarray:
        """Upper bounds of sqrt((L^{-1})_ii), for ball-to-box conversion."""
        if "dL" not in self._cache:
            inv = verified_solve(self.l_gram, _identity_like(self.l_gram)).box
            diag = np.diagonal(inv.hi).copy()
            self._cache["dL"] = IntervalArray(np.zeros_like(diag), diag).sqrt().hi
        return self._cache["dL"]


def _identity_like(m: IntervalArray) -> IntervalArray:
    from .interval import identity_int
    return identity_int(m.shape[0])


def _parity_split(n: int, g: IntervalArray) -> Optional[list[np.ndarray]]:
    """Exact parity classes of the flat index set, or None if G couples them."""
    classes = []
    for pi in (1, 0):
        for pj in (1, 0):
            idx = [(i - 1) * n + (j - 1)
                   for i in range(1, n + 1) for j in range(1, n + 1)
                   if i % 2 == pi and j % 2 == pj]
            if idx:
                classes.append(np.asarray(idx, dtype=np.intp))
    mask = np.zeros((n * n, n * n), dtype=bool)
    for cls in classes:
        mask[np.ix_(cls, cls)] = True
    off = ~mask
    if (g.lo[off] == 0.0).all() and (g.hi[off] == 0.0).all():
        return classes
    return None


def assemble_linearization(uhat: SpectralFn, f: PolyNonlinearity,
                           constants: ConstantProvider,
                           with_q: Optional[bool] = None) -> LinearizedProblem:
    """Build G = L - (f'(u) Phi, Phi) and certify its invertibility."""
    n = uhat.n
    fp = f.derivative()
    powers = legendre_powers(uhat, max(f.degree, 1))
    fprime_leg = poly_of_function(fp, powers)
    lmat = stiffness_2d(n)
    gmat = lmat - weighted_gram(fprime_leg, n, factor=1.0)
    if with_q is None:
        with_q = n <= 24
    qmat = weighted_gram(fprime_leg.square(), n, factor=1.0) if with_q else None
    ulinf = Interval(0.0, linf_upper(uhat))
    if f.degree <= 2:
        # f'(u) = c1 + 2 c2 u: the refined grid bound on u is reused directly
        c1 = abs(f.coeffs[1]) if len(f.coeffs) > 1 else 0.0
        c2 = abs(f.coeffs[2]) if len(f.coeffs) > 2 else 0.0
        mf = Interval(0.0, (Interval.point(c1)
                            + Interval.point(2.0 * c2) * ulinf).hi)
    else:
        mf = Interval(0.0, _leg_linf_upper(fprime_leg))
    classes = _parity_split(n, gmat)
    prob = LinearizedProblem(uhat=uhat, f=f, n=n, constants=constants,
                             l_gram=lmat, g_matrix=gmat, fprime_leg=fprime_leg,
                             q_gram=qmat, mf=mf, uhat_linf=ulinf,
                             u_powers=powers, parity_classes=classes)
    # invertibility certificate: a single verified solve proves every member
    # of G nonsingular
    e0 = IntervalArray.zeros((n * n,))
    e0.lo[0] = e0.hi[0] = 1.0
    verified_solve(gmat, IntervalArray(e0.lo, e0.hi, validate=False))
    return prob


def _leg_linf_upper(p: LegPoly2D, grid: int = 64, reltol: float = 1e-3) -> float:
    """Upper bound of sup |p| over the square for a Legendre-coeff polynomial."""
    from .legendre import _legendre_all  # shared recurrence
    edges = np.linspace(0.0, 1.0, grid + 1)
    cells = IntervalArray(edges[:-1], edges[1:])
    s, t = p.coeffs.shape
    legs = _legendre_all(max(s, t) - 1, cells)
    bx_lo = np.stack([legs[k].lo for k in range(s)])
    bx_hi = np.stack([legs[k].hi for k in range(s)])
    bx = IntervalArray(bx_lo, bx_hi, validate=False)
    by = bx[:t] if t <= s else IntervalArray(
        np.stack([legs[k].lo for k in range(t)]),
        np.stack([legs[k].hi for k in range(t)]), validate=False)
    t1 = tensordot_int(p.coeffs, bx, (0, 0))   # (t, cx)
    vals = tensordot_int(t1, by, (0, 0))       # (cx, cy)
    return float(np.max(vals.mag()))


# =====================================================================
# Norm bounds
# =====================================================================

@dataclass
class TailBounds:
    """Sup-norm-chain bounds for the three coupling operators."""

    tau_y: Interval
    tau_z: Interval
    kappa_pp: Interval
    chains: dict

    def as_json(self):
        return {"tau_Y": list(self.tau_y.to_hex()),
                "tau_Z": list(self.tau_z.to_hex()),
                "kappa_perp": list(self.kappa_pp.to_hex()),
                "chains": dict(self.chains)}


def _ub(x: Interval) -> Interval:
    return Interval(0.0, x.hi)


def t_inverse_norm(p: LinearizedProblem) -> Interval:
    """K_T >= ||T^{-1}||: reciprocal of the smallest |eigenvalue| of (G, L)."""
    if "KT" in p._cache:
        return p._cache["KT"]
    eb = p.pencil(p.g_matrix, p.l_gram)
    m = eb.min_abs()
    if m <= 0.0:
        raise InconclusiveError("pencil (G, L) has an eigenvalue enclosure touching 0")
    kt = _ub(Interval.point(1.0) / Interval.point(m))
    p._cache["KT"] = kt
    p._cache["KT_eig"] = eb
    return kt


def _lam_q_l(p: LinearizedProblem) -> Optional[Interval]:
    """sqrt(lam_max(Q, L)): the multiplier-to-dual norm on V_h."""
    if p.q_gram is None:
        return None
    if "sqL" not in p._cache:
        eb = p.pencil(p.q_gram, p.l_gram)
        p._cache["sqL"] = Interval(0.0, max(eb.lam_max, 0.0)).sqrt()
    return p._cache["sqL"]


def tail_bounds(p: LinearizedProblem) -> TailBounds:
    """Bounds for the three coupling-operator norms of the multiplier f'(u)."""
    cn = p.constants.projection_constant(p.n)
    cp = p.constants.poincare
    chains = {}
    kpp = _ub(p.mf * cn * cn)
    chains["kappa_perp"] = "supnorm: mf*C_N^2"
    fallback = _ub(p.mf * cn * cp)
    sq = _lam_q_l(p)
    if sq is not None and (cn * sq).hi < fallback.hi:
        tau = _ub(cn * sq)
        chains["tau_Y"] = chains["tau_Z"] = "matrix: C_N*sqrt(lam_max(Q,L))"
    else:
        tau = fallback
        chains["tau_Y"] = chains["tau_Z"] = "supnorm: mf*C_P*C_N"
    tau_y = tau
    tau_z = tau
    ov = p.chain_overrides
    if "tau_Y" in ov and ov["tau_Y"].hi < tau_y.hi:
        tau_y = _ub(ov["tau_Y"])
        chains["tau_Y"] = "finite-universe pencil"
    if "tau_Z" in ov and ov["tau_Z"].hi < tau_z.hi:
        tau_z = _ub(ov["tau_Z"])
        chains["tau_Z"] = "finite-universe pencil"
    if "kappa_perp" in ov and ov["kappa_perp"].hi < kpp.hi:
        kpp = _ub(ov["kappa_perp"])
        chains["kappa_perp"] = "finite-universe pencil"
    return TailBounds(tau_y=tau_y, tau_z=tau_z, kappa_pp=kpp, chains=chains)


def _mass_pencil_matrix(p: LinearizedProblem) -> Optional[IntervalArray]:
    """B2 = G M^{-1} G, the mass-weighted square of the finite block."""
    if "B2" not in p._cache:
        from .legendre import mass_2d
        try:
            y = verified_solve(mass_2d(p.n), p.g_matrix).box
            b2 = tensordot_int(p.g_matrix, y, (0, 0))
            p._cache["B2"] = b2.intersect(b2.T)
        except InconclusiveError:
            p._cache["B2"] = None
    return p._cache["B2"]


def t_l2_to_h1(p: LinearizedProblem) -> Interval:
    """Upper bound of sup ||T^{-1} A_h^{-1} g||_H10 / ||g||_L2.

    Sharp pencil route sqrt(lam_max(L, G M^{-1} G)) with the K_T*C_P product
    as fallback; the bound drives the finite image of the nonlinear terms.
    """
    if "t_l2h1" in p._cache:
        return p._cache["t_l2h1"]
    val = _ub(t_inverse_norm(p) * p.constants.poincare)
    b2 = _mass_pencil_matrix(p)
    if b2 is not None:
        try:
            eb = p.pencil(p.l_gram, b2)
            direct = Interval(0.0, max(eb.lam_max, 0.0)).sqrt()
            if direct.hi < val.hi:
                val = _ub(direct)
        except InconclusiveError:
            pass
    p._cache["t_l2h1"] = val
    return val


def multiplier_after_solve(p: LinearizedProblem) -> Interval:
    """Upper bound of sup ||f'(u) T^{-1} A_h^{-1} g||_L2 / ||g||_L2.

    Composed pencil sqrt(lam_max(Q, G M^{-1} G)); falls back to the product
    of the individual factors.
    """
    if "zt_l2" in p._cache:
        return p._cache["zt_l2"]
    val = _ub(p.mf * t_l2_to_h1(p) * p.constants.poincare) if p.q_gram is None \
        else None
    if p.q_gram is not None:
        sq = _lam_q_l(p)
        val = _ub(sq * t_l2_to_h1(p)) if sq is not None else \
            _ub(p.mf * t_l2_to_h1(p) * p.constants.poincare)
        b2 = _mass_pencil_matrix(p)
        if b2 is not None:
            try:
                eb = p.pencil(p.q_gram, b2)
                direct = Interval(0.0, max(eb.lam_max, 0.0)).sqrt()
                if direct.hi < val.hi:
                    val = _ub(direct)
            except InconclusiveError:
                pass
    p._cache["zt_l2"] = val
    return val


def _direct_coupled_norm(p: LinearizedProblem) -> Optional[Interval]:
    """C_N * sqrt(lam_max(Q, G L^{-1} G)) >= ||T^{-1} A_h^{-1} f'|_{V_perp}||.

    Also bounds the transposed composition ||A_perp^{-1} f'|_{V_h} T^{-1}||.
    """
    if p.q_gram is None:
        return None
    if "ty" in p._cache:
        return p._cache["ty"]
    try:
        x = verified_solve(p.l_gram, p.g_matrix).box
        b = tensordot_int(p.g_matrix, x, (0, 0))
        b = b.intersect(b.T)
        eb = p.pencil(p.q_gram, b)
        cn = p.constants.projection_constant(p.n)
        val = _ub(cn * Interval(0.0, max(eb.lam_max, 0.0)).sqrt())
    except InconclusiveError:
        val = None
    p._cache["ty"] = val
    return val


def _direct_cross_norm(p: LinearizedProblem) -> Optional[Interval]:
    """C_N^2 / min|eig(G, Q)| >= ||A_perp^{-1} f' T^{-1} A_h^{-1} f'|_{V_perp}||."""
    if p.q_gram is None:
        return None
    if "cross" in p._cache:
        return p._cache["cross"]
    try:
        eb = p.pencil(p.g_matrix, p.q_gram)
        m = eb.min_abs()
        if m <= 0.0:
            raise InconclusiveError("pencil (G, Q) touches zero")
        cn = p.constants.projection_constant(p.n)
        val = _ub(cn * cn / Interval.point(m))
    except InconclusiveError:
        val = None
    p._cache["cross"] = val
    return val


class BlockNormBounds:
    """Upper bounds of the four block norms of the inverted operator matrix.

    Access to the individual blocks is instrumented (`reads`) so tests can
    assert which blocks a bound chain actually consumed.
    """

    def __init__(self, k_t: Interval, tau: TailBounds, kappa: Interval,
                 s_inv: Interval, t_y: Interval, z_t: Interval,
                 h: dict[str, Interval], variant: str, chains: dict,
                 eta: Optional[Interval] = None):
        self.k_t = k_t
        self.tau = tau
        self.kappa = kappa
        self.s_inv = s_inv
        self.t_y = t_y
        self.z_t = z_t
        self._h = h
        self.variant = variant
        self.chains = chains
        self.eta = eta
        self.reads: set[str] = set()

    def _get(self, key: str) -> Interval:
        self.reads.add(key)
        return self._h[key]

    @property
    def h11(self) -> Interval:
        return self._get("h11")

    @property
    def h12(self) -> Interval:
        return self._get("h12")

    @property
    def h21(self) -> Interval:
        return self._get("h21")

    @property
    def h22(self) -> Interval:
        return self._get("h22")

    def peek(self, key: str) -> Interval:
        """Read a block bound without recording it (serialization only)."""
        return self._h[key]

    def as_json(self):
        out = {"variant": self.variant,
               "kappa": list(self.kappa.to_hex()),
               "K_T": list(self.k_t.to_hex()),
               "S_inv": list(self.s_inv.to_hex()),
               "coupled_TY": list(self.t_y.to_hex()),
               "coupled_ZT": list(self.z_t.to_hex()),
               "chains": dict(self.chains)}
        out.update(self.tau.as_json())
        for key in ("h11", "h12", "h21", "h22"):
            out[key] = list(self._h[key].to_hex())
        if self.eta is not None:
            out["eta"] = list(self.eta.to_hex())
        return out


def schur_bounds(p: LinearizedProblem) -> BlockNormBounds:
    """Certify the tail-side Schur complement and bound the inverse blocks."""
    kt = t_inverse_norm(p)
    tau = tail_bounds(p)
    chains = dict(tau.chains)
    ty = _direct_coupled_norm(p)
    if ty is not None and ty.hi < (kt * tau.tau_y).hi:
        chains["coupled"] = "pencil: C_N*sqrt(lam_max(Q, G L^-1 G))"
    else:
        ty = _ub(kt * tau.tau_y)
        chains["coupled"] = "product: K_T*tau"
    if "coupled_TY" in p.chain_overrides and p.chain_overrides["coupled_TY"].hi < ty.hi:
        ty = _ub(p.chain_overrides["coupled_TY"])
        chains["coupled"] = "finite-universe pencil"
    zt = ty  # same bound for the transposed composition
    cross = _direct_cross_norm(p)
    cands = [("pencil: C_N^2/min|eig(G,Q)|", cross)] if cross is not None else []
    cands.append(("product: z_t*tau_Y", _ub(zt * tau.tau_y)))
    cands.append(("product: tau_Z*K_T*tau_Y", _ub(tau.tau_z * kt * tau.tau_y)))
    if "kappa_cross" in p.chain_overrides:
        cands.append(("finite-universe pencil", _ub(p.chain_overrides["kappa_cross"])))
    tag, cross_val = min(cands, key=lambda kv: kv[1].hi)
    chains["kappa_cross"] = tag
    kappa, s_inv, h = schur_arithmetic(kt, ty, zt, tau.kappa_pp, cross_val)
    return BlockNormBounds(k_t=kt, tau=tau, kappa=kappa, s_inv=s_inv,
                           t_y=ty, z_t=zt, h=h, variant="schur", chains=chains)


def schur_arithmetic(kt: Interval, ty: Interval, zt: Interval,
                     kappa_pp: Interval, cross: Interval
                     ) -> tuple[Interval, Interval, dict[str, Interval]]:
    """Neumann-series arithmetic: kappa, ||S^{-1}|| and the four block norms."""
    kappa = _ub(kappa_pp + cross)
    if kappa.hi >= 1.0:
        raise InconclusiveError(
            f"Schur contraction quantity kappa >= 1 (bound {kappa.hi:.6f})")
    s_inv = _ub(Interval.point(1.0) / (Interval.point(1.0) - kappa))
    h = {
        "h11": _ub(kt + ty * s_inv * zt),
        "h12": _ub(ty * s_inv),
        "h21": _ub(s_inv * zt),
        "h22": s_inv,
    }
    return kappa, s_inv, h


def schur_bounds_alt(p: LinearizedProblem) -> BlockNormBounds:
    """Variant certifying the finite-side Schur complement instead."""
    kt = t_inverse_norm(p)
    tau = tail_bounds(p)
    chains = dict(tau.chains)
    kpp = tau.kappa_pp
    if kpp.hi >= 1.0:
        raise InconclusiveError("tail self-coupling >= 1; complement block not invertible")
    g_inv = _ub(Interval.point(1.0) / (Interval.point(1.0) - kpp))
    eta = _ub(kt * tau.tau_y * tau.tau_z * g_inv)
    if eta.hi >= 1.0:
        raise InconclusiveError(f"finite Schur perturbation eta >= 1 (bound {eta.hi:.6f})")
    sh_inv = _ub(kt / (Interval.point(1.0) - eta))
    chains["variant"] = "finite-side Schur complement"
    h = {
        "h11": sh_inv,
        "h12": _ub(sh_inv * tau.tau_y * g_inv),
        "h21": _ub(g_inv * tau.tau_z * sh_inv),
        "h22": _ub(g_inv + g_inv * tau.tau_z * sh_inv * tau.tau_y * g_inv),
    }
    return BlockNormBounds(k_t=kt, tau=tau, kappa=kpp, s_inv=sh_inv,
                           t_y=_ub(kt * tau.tau_y), z_t=_ub(kt * tau.tau_z),
                           h=h, variant="schur-alt", chains=chains, eta=eta)


def l_inverse_norm(b: BlockNormBounds) -> Interval:
    """Euclidean norm bound of the 2x2 block-norm matrix: >= ||L^{-1}||.

    The Euclidean norm of a nonnegative matrix is entrywise monotone, so the
    point matrix of upper bounds gives a valid (and sharp) bound.
    """
    import numpy as _np
    ubs = _np.array([[b.h11.hi, b.h12.hi], [b.h21.hi, b.h22.hi]])
    return two_by_two_norm_ub(IntervalArray(ubs.copy(), ubs.copy()))


def ritz_error_constant(p: LinearizedProblem, b: BlockNormBounds) -> Interval:
    """C with ||phi - R_h phi|| <= C ||L phi||_L2 for the linearized operator."""
    cn = p.constants.projection_constant(p.n)
    cp = p.constants.poincare
    if b.variant == "schur":
        inner = Interval.point(1.0) + p.mf * cp * cp * b.k_t
        return _ub(b.s_inv * cn * inner)
    g_inv = _ub(Interval.point(1.0) / (Interval.point(1.0) - b.tau.kappa_pp))
    inner2 = Interval.point(1.0) + p.mf * cn * cn * g_inv
    inner = Interval.point(1.0) + p.mf * cp * cp * b.s_inv * inner2
    return _ub(g_inv * cn * inner)
