"""Existence proof drivers.

Pipeline: float Galerkin solve -> Krawczyk enclosure of the discrete
solution -> residual tail bound -> candidate-set fixed-point verification
(coefficient box plus complement norm ball), or Kantorovich-type
verification in block or classic mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .blocks import (
    BlockNormBounds,
    LinearizedProblem,
    PolyNonlinearity,
    assemble_linearization,
    l_inverse_norm,
    legendre_powers,
    poly_of_function,
    schur_bounds,
    schur_bounds_alt,
)
from .constants import ConstantProvider
from .interval import Interval, IntervalArray, quad_form_sup
from .legendre import (
    LegPoly2D,
    SpectralFn,
    fn_norms,
    h10_norm_sup,
    linf_upper,
    load_vector,
    mass_2d,
    stiffness_2d,
)
from .linalg import CachedSolver, Enclosure, InconclusiveError, krawczyk_solve


# =====================================================================
# Candidate set and certificate containers
# =====================================================================

@dataclass
class CandidateSet:
    """W = W_h + W_perp: coefficient box plus tail ball of radius alpha.

    The finite part is the intersection of the coefficient box with an
    H^1_0 ball of radius wh_h1 (when given); carrying both avoids the
    dimension factor a bare box pays in norm-based chains.
    """

    wh_box: IntervalArray   # (N, N) interval coefficients
    alpha: Interval         # [0, radius bound]
    wh_h1: Optional[Interval] = None

    @property
    def n(self) -> int:
        return self.wh_box.shape[0]


@dataclass
class VerificationCertificate:
    method: str
    variant: str
    status: str
    problem: dict
    bounds: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    rho: Optional[Interval] = None
    alpha: Optional[Interval] = None
    sup_wh: Optional[Interval] = None
    wh: Optional[SpectralFn] = None
    uhat: Optional[SpectralFn] = None
    beta: Optional[Interval] = None
    omega: Optional[Interval] = None
    uniqueness_radius: Optional[Interval] = None
    contraction: Optional[Interval] = None
    iterations: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.status in ("verified", "verified-unique")


# =====================================================================
# Discrete solution: float Newton + Krawczyk enclosure
# =====================================================================

def _single_mode_seed(f: PolyNonlinearity, n: int) -> float:
    """Solve the one-mode Galerkin problem s*L11 = sum c_k s^k q_k.

    q_k = int (psi1 x psi1)^{k+1} = (B(k+2, k+2))^2 in Beta-function terms.
    """
    l11 = 2.0 * (1.0 / 3.0) * (1.0 / 30.0)
    qs = [(math.factorial(k + 1) ** 2 / math.factorial(2 * (k + 1) + 1)) ** 2
          for k in range(len(f.coeffs))]

    def g(s):
        return l11 * s - sum(c * s ** k * qs[k] for k, c in enumerate(f.coeffs))

    def dg(s):
        return l11 - sum(k * c * s ** (k - 1) * qs[k]
                         for k, c in enumerate(f.coeffs) if k >= 1)

    deg = f.degree
    if deg == 2 and f.coeffs[2] != 0.0:
        base = (l11 - f.coeffs[1] * qs[1]) / (f.coeffs[2] * qs[2])
        starts = [base]
    else:
        top = abs(f.coeffs[deg]) * qs[deg]
        scale = (l11 / top) ** (1.0 / (deg - 1)) if deg >= 2 and top > 0 else 1.0
        starts = [scale, 2 * scale, 0.5 * scale]
    for s in starts:
        for _ in range(80):
            d = dg(s)
            if d == 0.0:
                break
            step = g(s) / d
            s -= step
            if abs(step) < 1e-13 * max(1.0, abs(s)):
                break
        if abs(s) > 1e-8 and abs(g(s)) < 1e-10 * max(1.0, abs(s)):
            return s
    raise RuntimeError("no nontrivial single-mode seed found; supply one explicitly")


def _sym_indices(n: int) -> np.ndarray:
    return np.asarray([(i - 1) * n + (j - 1)
                       for i in range(1, n + 1, 2) for j in range(1, n + 1, 2)],
                      dtype=np.intp)


def _embed(n: int, idx: np.ndarray, vals_lo, vals_hi) -> IntervalArray:
    lo = np.zeros(n * n)
    hi = np.zeros(n * n)
    lo[idx] = vals_lo
    hi[idx] = vals_hi
    return IntervalArray(lo, hi, validate=False).reshape(n, n)


def _galerkin_residual(f: PolyNonlinearity, n: int):
    """Float residual/Jacobian builders shared by the Newton iteration."""
    from .legendre import _band_matrix, g3_table
    lmat = stiffness_2d(n).mid()
    e = _band_matrix(n).mid()
    g3 = g3_table(n).mid()
    from .legendre import product_table, _table_size
    pt = product_table(_table_size(2 * (n + 1))).mid()
    norms = np.array([1.0 / (2 * s + 1) for s in range(2 * n + 3)])
    bmat = np.zeros((n, 2 * n + 3))
    bmat[:, :n + 2] = e * norms[None, :n + 2]

    def leg_of(c):
        u = c.reshape(n, n)
        return np.einsum('ia,jb,ij->ab', e, e, u)

    def leg_mul(p, q):
        sa, sb = p.shape[0], q.shape[0]
        a = pt[:sa, :sb, :sa + sb - 1]
        r1 = np.einsum('ab,acs->csb', p, a)
        r2 = np.einsum('csb,cd->sbd', r1, q)
        ay = pt[:p.shape[1], :q.shape[1], :p.shape[1] + q.shape[1] - 1]
        return np.einsum('sbd,bdt->st', r2, ay)

    def f_of(c):
        ul = leg_of(c)
        powers = [np.ones((1, 1)), ul]
        for _ in range(2, max(f.degree, 1) + 1):
            powers.append(leg_mul(powers[-1], ul))
        acc = None
        for k, ck in enumerate(f.coeffs):
            if ck == 0.0:
                continue
            term = ck * powers[k]
            if acc is None:
                acc = term.copy()
            else:
                s = max(acc.shape[0], term.shape[0])
                t = max(acc.shape[1], term.shape[1])
                pad = np.zeros((s, t))
                pad[:acc.shape[0], :acc.shape[1]] = acc
                pad[:term.shape[0], :term.shape[1]] += term
                acc = pad
        if acc is None:
            acc = np.zeros((1, 1))
        load = np.einsum('st,is,jt->ij', acc,
                         bmat[:, :acc.shape[0]], bmat[:, :acc.shape[1]]).reshape(-1)
        return lmat @ c - load

    def jac_of(c):
        ul = leg_of(c)
        powers = [np.ones((1, 1)), ul]
        for _ in range(2, max(f.degree - 1, 1) + 1):
            powers.append(leg_mul(powers[-1], ul))
        fp = f.derivative()
        acc = None
        for k, ck in enumerate(fp.coeffs):
            if ck == 0.0:
                continue
            term = ck * powers[k]
            if acc is None:
                acc = term.copy()
            else:
                s = max(acc.shape[0], term.shape[0])
                t = max(acc.shape[1], term.shape[1])
                pad = np.zeros((s, t))
                pad[:acc.shape[0], :acc.shape[1]] = acc
                pad[:term.shape[0], :term.shape[1]] += term
                acc = pad
        if acc is None:
            return lmat.copy()
        w1 = np.einsum('st,sik->tik', acc, g3[:acc.shape[0]])
        m2 = np.einsum('tik,tjl->ijkl', w1, g3[:acc.shape[1]])
        return lmat - m2.reshape(n * n, n * n)

    return f_of, jac_of


def galerkin_approx(f: PolyNonlinearity, n: int,
                    seed: Optional[SpectralFn] = None,
                    symmetric: bool = True,
                    tol: float = 1e-12, max_iter: int = 50) -> SpectralFn:
    """Floating-point Galerkin solution (not rigorous by itself)."""
    if n < 1:
        raise ValueError("degree must be >= 1")
    if f.is_zero():
        return SpectralFn.zero(n)
    f_of, jac_of = _galerkin_residual(f, n)
    c = np.zeros(n * n)
    if seed is not None:
        c = seed.coeffs.mid().reshape(-1).copy()
    else:
        c[0] = _single_mode_seed(f, n)
    idx = _sym_indices(n) if symmetric and seed is None else np.arange(n * n)
    for it in range(max_iter):
        r = f_of(c)[idx]
        j = jac_of(c)[np.ix_(idx, idx)]
        try:
            step = np.linalg.solve(j, r)
        except np.linalg.LinAlgError as exc:
            raise RuntimeError(f"Newton Jacobian singular: {exc}") from None
        c[idx] -= step
        nrm = max(1.0, float(np.linalg.norm(c)))
        if float(np.linalg.norm(step)) < tol * nrm:
            resid = float(np.linalg.norm(f_of(c)[idx]))
            if resid <= 1e-10 * nrm:
                return SpectralFn.from_point(n, c.reshape(n, n))
    raise RuntimeError("Galerkin Newton iteration did not converge; try another seed")


def _interval_system(f: PolyNonlinearity, n: int, idx: np.ndarray):
    """Interval residual/Jacobian over the reduced coefficient set."""
    from .legendre import weighted_gram
    lmat = stiffness_2d(n)
    lflat = IntervalArray(lmat.lo[np.ix_(idx, np.arange(n * n))],
                          lmat.hi[np.ix_(idx, np.arange(n * n))], validate=False)

    def residual(x: IntervalArray) -> IntervalArray:
        u = SpectralFn(n, _embed(n, idx, x.lo, x.hi))
        powers = legendre_powers(u, max(f.degree, 1))
        fleg = poly_of_function(f, powers)
        load = load_vector(fleg, n)
        from .interval import int_matvec
        full = int_matvec(lflat, u.coeffs.reshape(n * n)) - load[idx]
        return full

    def jacobian(x: IntervalArray) -> IntervalArray:
        u = SpectralFn(n, _embed(n, idx, x.lo, x.hi))
        powers = legendre_powers(u, max(f.degree - 1, 1))
        fpleg = poly_of_function(f.derivative(), powers)
        g = lmat - weighted_gram(fpleg, n, factor=1.0)
        return IntervalArray(g.lo[np.ix_(idx, idx)], g.hi[np.ix_(idx, idx)],
                             validate=False)

    return residual, jacobian


def enclose_approx(u0: SpectralFn, f: PolyNonlinearity,
                   symmetric: Optional[bool] = None) -> SpectralFn:
    """Krawczyk-certified enclosure of a true discrete Galerkin solution."""
    n = u0.n
    if f.is_zero():
        return SpectralFn.zero(n)
    mid = u0.coeffs.mid().reshape(-1)
    if symmetric is None:
        sym_idx = _sym_indices(n)
        mask = np.ones(n * n, dtype=bool)
        mask[sym_idx] = False
        symmetric = bool(np.all(mid[mask] == 0.0))
    idx = _sym_indices(n) if symmetric else np.arange(n * n)
    residual, jacobian = _interval_system(f, n, idx)
    enc = krawczyk_solve(residual, jacobian, mid[idx])
    box = enc.box
    return SpectralFn(n, _embed(n, idx, box.lo, box.hi))


# =====================================================================
# Residual
# =====================================================================

def residual_strong(uhat: SpectralFn, f: PolyNonlinearity,
                    powers: Optional[list[LegPoly2D]] = None) -> LegPoly2D:
    """Lap(u) + f(u) in exact Legendre form (the strong residual)."""
    if powers is None:
        powers = legendre_powers(uhat, max(f.degree, 1))
    return uhat.laplacian() + poly_of_function(f, powers)


def residual_tail(uhat: SpectralFn, f: PolyNonlinearity,
                  constants: ConstantProvider,
                  powers: Optional[list[LegPoly2D]] = None) -> tuple[Interval, Interval]:
    """(delta_perp, ||residual||_L2): tail bound C_N ||Lap u + f(u)||_L2."""
    r = residual_strong(uhat, f, powers).l2_norm()
    cn = constants.projection_constant(uhat.n)
    delta = Interval(0.0, (cn * r).hi)
    return delta, r


# =====================================================================
# Nonlinear image of a candidate set
# =====================================================================

@dataclass
class ImageParts:
    load_g: IntervalArray     # (G(w_h), Phi_ij) load vector, length N^2
    g_l2: Interval            # >= ||G(w_h)||_L2
    tail_l2: Interval         # >= ||G(w) - G(w_h)||_L2 over the candidate
    wh_linf: Interval
    wh_h10: Interval          # H^1_0 norm bound of the box
    cross_log: dict


def nonlinear_image(cand: CandidateSet, p: LinearizedProblem) -> ImageParts:
    """Rigorous decomposition of G(w) = f'(u)w + f(u) - f(u+w) over W.

    The polynomial part is expanded symbolically so that the linear terms
    cancel exactly: G(w) = -sum_k c_k sum_{m>=2} C(k,m) u^{k-m} w^m.  For
    wide boxes the raw interval quartic forms overestimate badly, so every
    L^2 quantity is the min of the exact-coefficient route and an embedding
    route through the H^1_0 norm of the box.
    """
    n = p.n
    f = p.f
    c4 = p.constants.l4
    wh = SpectralFn(n, cand.wh_box)
    wh_powers = legendre_powers(wh, max(f.degree, 2))
    g_poly: Optional[LegPoly2D] = None
    for k, ck in enumerate(f.coeffs):
        if ck == 0.0 or k < 2:
            continue
        for m in range(2, k + 1):
            term = wh_powers[m] if k == m else p.u_powers[k - m].mul(wh_powers[m])
            term = term.scale(-ck * math.comb(k, m))
            g_poly = term if g_poly is None else g_poly + term
    if g_poly is None:
        g_poly = LegPoly2D(IntervalArray.zeros((1, 1)))
    load_g = load_vector(g_poly, n)
    g_l2 = Interval(0.0, g_poly.l2_norm().hi)

    zero_box = _is_zero_box(cand.wh_box)
    h1 = Interval.point(0.0) if zero_box else h10_norm_sup(cand.wh_box, n)
    if cand.wh_h1 is not None and cand.wh_h1.hi < h1.hi:
        h1 = Interval(0.0, cand.wh_h1.hi)
    # interval-coefficient boxes carry irreducible widths; grid refinement
    # cannot shrink them, so a bounded pass is used here
    mh = Interval(0.0, linf_upper(wh, grid=48, max_rounds=1)) \
        if not zero_box else Interval.point(0.0)
    if f.degree == 2 and not zero_box:
        # quadratic sharp route: ||w^2||_L2 = ||w||_L4^2 <= (C_4 ||w||)^2
        c2 = abs(f.coeffs[2])
        emb = Interval(0.0, (Interval.point(c2) * (c4 * h1).sqr()).hi)
        if emb.hi < g_l2.hi:
            g_l2 = emb
        mdiag = _sqrt_diag_upper(mass_2d(n))
        cap = _sym_box(g_l2.hi * mdiag)
        load_g = load_g.intersect(cap)

    cn = p.constants.projection_constant(n)
    alpha = cand.alpha
    mu = p.uhat_linf
    tail = Interval.point(0.0)
    log = {}
    for k, ck in enumerate(f.coeffs):
        if ck == 0.0 or k < 2:
            continue
        for m in range(2, k + 1):
            ckm = abs(ck) * math.comb(k, m)
            for j in range(1, m + 1):
                eps = cn * alpha if j == 1 else \
                    _pow_int(p.constants.embedding(2 * j) * alpha, j)
                factor = _pow_int(mh, m - j)
                if m - j == 1:
                    # ||w_h w_perp|| route through L4 x L4 when sharper
                    alt = c4 * h1
                    if j == 1 and (c4 * alt * alpha).hi < (factor * eps).hi:
                        factor, eps = alt, c4 * alpha
                coef = Interval.point(ckm * math.comb(m, j))
                term = coef * _pow_int(mu, k - m) * factor * eps
                tail = tail + term
                key = f"k{k}_m{m}_j{j}"
                log[key] = term.hi
    return ImageParts(load_g=load_g, g_l2=g_l2, tail_l2=Interval(0.0, tail.hi),
                      wh_linf=mh, wh_h10=h1, cross_log=log)


def _pow_int(x: Interval, k: int) -> Interval:
    out = Interval.point(1.0)
    for _ in range(k):
        out = out * x
    return out


def _is_zero_box(box: IntervalArray) -> bool:
    return bool((box.lo == 0.0).all() and (box.hi == 0.0).all())


# =====================================================================
# Fixed-point verification
# =====================================================================

def _sqrt_diag_upper(m: IntervalArray) -> np.ndarray:
    d = np.diagonal(m.hi).copy()
    return IntervalArray(np.zeros_like(d), np.maximum(d, 0.0)).sqrt().hi


def _sym_box(radii: np.ndarray) -> IntervalArray:
    r = np.maximum(radii, 0.0)
    return IntervalArray(-r, r, validate=False)


@dataclass
class _IterationState:
    wh: IntervalArray     # flat (N^2,) image box
    alpha: Interval
    norm_route: Interval  # H^1_0 bound of the finite image (norm route)


def _candidate_image(cand: CandidateSet, p: LinearizedProblem,
                     b: BlockNormBounds, delta: Interval,
                     solver: CachedSolver) -> tuple[_IterationState, dict]:
    from .blocks import multiplier_after_solve, t_l2_to_h1
    n = p.n
    cn = p.constants.projection_constant(n)
    parts = nonlinear_image(cand, p)
    mdiag = _sqrt_diag_upper(mass_2d(n))
    if p.q_gram is not None:
        qdiag = _sqrt_diag_upper(p.q_gram)
    else:
        qdiag = p.mf.hi * mdiag
    # loads of the tail contributions, per-coefficient Cauchy-Schwarz
    tail_load = _sym_box(parts.tail_l2.hi * mdiag)
    rhs1 = parts.load_g + tail_load
    x_t = solver.solve(rhs1)
    # H^1_0 bound of x_t = T^{-1} A_h^{-1} G(w): solve pencil applied to L2 data
    g_total = parts.g_l2 + parts.tail_l2
    th = t_l2_to_h1(p)
    xt_h1 = Interval(0.0, (th * g_total).hi)
    dl = p.diag_l_inv_sqrt()
    x_t = x_t.intersect(_sym_box(xt_h1.hi * dl))
    # || (A_perp^{-1} f'|_{V_h}) T^{-1} g_h ||: composed pencil, then the
    # per-box quadratic form as an alternative
    z_xt = Interval(0.0, (b.tau.tau_z * xt_h1).hi)
    z_comp = Interval(0.0, (cn * multiplier_after_solve(p) * g_total).hi)
    if z_comp.hi < z_xt.hi:
        z_xt = z_comp
    if p.q_gram is not None:
        zq = quad_form_sup(x_t, p.q_gram)
        z_alt = Interval(0.0, (Interval(0.0, max(zq.hi, 0.0)).sqrt() * cn).hi)
        if z_alt.hi < z_xt.hi:
            z_xt = z_alt
    g_perp = cn * g_total
    alpha_new = Interval(0.0, (b.s_inv * (delta + z_xt + g_perp)).hi)
    # tail aggregate pushed back into V_h: load box through the solver
    s_load = _sym_box((cn * alpha_new).hi * qdiag)
    x_s = solver.solve(s_load)
    img = x_t + x_s
    # norm-route bound of the same image; both routes enclose the true image
    # set, so their intersection does as well
    norm_route = Interval(0.0, (xt_h1 + b.t_y * alpha_new).hi)
    img = img.intersect(_sym_box(norm_route.hi * dl))
    log = {"alpha": alpha_new.hi, "g_l2": parts.g_l2.hi,
           "tail_l2": parts.tail_l2.hi, "wh_linf": parts.wh_linf.hi,
           "norm_route": norm_route.hi}
    return _IterationState(wh=img, alpha=alpha_new, norm_route=norm_route), log


def _contraction_bound(cand: CandidateSet, p: LinearizedProblem,
                       b: BlockNormBounds, h_norm: Interval) -> Interval:
    """Lipschitz constant of the fixed-point map on the candidate set."""
    n = p.n
    cn = p.constants.projection_constant(n)
    cp = p.constants.poincare
    c4 = p.constants.l4
    alpha = cand.alpha
    f = p.f
    wh = SpectralFn(n, cand.wh_box)
    lip = Interval.point(0.0)
    if f.degree >= 2 and any(c != 0.0 for c in f.coeffs[2:]):
        if f.degree == 2:
            c2 = abs(f.coeffs[2])
            l4sq = wh.square().l2_norm_sq()
            wh_l4 = Interval(0.0, max(l4sq.hi, 0.0)).sqrt().sqrt()
            h1 = h10_norm_sup(cand.wh_box, n)
            if cand.wh_h1 is not None and cand.wh_h1.hi < h1.hi:
                h1 = cand.wh_h1
            emb_l4 = Interval(0.0, (c4 * h1).hi)
            if emb_l4.hi < wh_l4.hi:
                wh_l4 = emb_l4
            lip = Interval.point(2.0 * c2) * c4 * (wh_l4 + c4 * alpha)
        else:
            mh = Interval(0.0, linf_upper(wh, grid=48, max_rounds=1))
            mu = p.uhat_linf
            for d in range(1, f.degree):
                bd = Interval.point(0.0)
                for k, ck in enumerate(f.coeffs):
                    if k >= d + 1 and ck != 0.0:
                        bd = bd + Interval.point(abs(ck) * k * math.comb(k - 1, d)) \
                            * _pow_int(mu, k - 1 - d)
                if bd.hi == 0.0:
                    continue
                for j in range(d + 1):
                    if j == 0:
                        emb = cp
                    else:
                        emb = _pow_int(p.constants.embedding(2 * (j + 1)), j + 1) \
                            * _pow_int(alpha, j)
                    lip = lip + bd * Interval.point(math.comb(d, j)) \
                        * _pow_int(mh, d - j) * emb
    factor = (cp.sqr() + cn.sqr()).sqrt()
    return Interval(0.0, (h_norm * factor * lip).hi)


def fixed_point_verify(p: LinearizedProblem, b: BlockNormBounds,
                       delta: Interval, resid_l2: Interval,
                       max_iterations: int = 30,
                       inflate_box: float = 1.05,
                       inflate_alpha: float = 1.1) -> VerificationCertificate:
    """Verify the Newton-type fixed-point equation on candidate sets."""
    n = p.n
    cert = VerificationCertificate(
        method="fixed-point", variant=b.variant, status="inconclusive",
        problem={"f": list(p.f.coeffs), "N": n},
        bounds=_bounds_json(p, b, delta, resid_l2),
        constants=p.constants.sources(), uhat=p.uhat)
    solver = CachedSolver(p.g_matrix)
    state, log = _candidate_image(
        CandidateSet(IntervalArray.zeros((n, n)), Interval.point(0.0)),
        p, b, delta, solver)
    cert.iterations.append({"phase": "residual-only", **log})
    alpha_cap = max(1.0, 1e6 * state.alpha.hi)
    h_norm = l_inverse_norm(b)
    for it in range(max_iterations):
        cand = CandidateSet(
            state.wh.scale_outward(inflate_box).reshape(n, n),
            Interval(0.0, (state.alpha * Interval.point(inflate_alpha)).hi),
            wh_h1=Interval(0.0, (state.norm_route
                                 * Interval.point(inflate_box)).hi))
        try:
            new_state, log = _candidate_image(cand, p, b, delta, solver)
        except (InconclusiveError, OverflowError) as exc:
            cert.notes["reason"] = f"candidate image failed: {exc}"
            cert.alpha = state.alpha
            return cert
        if (not math.isfinite(new_state.alpha.hi)
                or not np.isfinite(new_state.wh.hi).all()
                or new_state.alpha.hi > alpha_cap):
            cert.notes["reason"] = "candidate iteration diverged"
            cert.alpha = state.alpha
            return cert
        included = (cand.wh_box.reshape(n * n).interior_contains(new_state.wh)
                    and new_state.alpha.hi < cand.alpha.hi
                    and new_state.norm_route.hi < cand.wh_h1.hi)
        log.update({"iteration": it, "included": included})
        cert.iterations.append(log)
        if included:
            q = _contraction_bound(cand, p, b, h_norm)
            cert.contraction = q
            sup_box = h10_norm_sup(new_state.wh.reshape(n, n), n)
            sup_wh = Interval(0.0, min(sup_box.hi, new_state.norm_route.hi))
            rho = Interval(0.0, (sup_wh.sqr() + new_state.alpha.sqr()).sqrt().hi)
            cert.sup_wh = sup_wh
            cert.alpha = new_state.alpha
            cert.rho = rho
            cert.wh = SpectralFn(n, new_state.wh.reshape(n, n))
            cert.notes["sup_wh_route"] = (
                "box" if sup_box.hi <= new_state.norm_route.hi else "norm")
            if q.hi < 1.0:
                cert.status = "verified-unique"
            else:
                cert.status = "inconclusive"
                cert.notes["reason"] = (
                    f"image included but contraction bound {q.hi:.3f} >= 1")
            return cert
        state = new_state
    cert.notes["reason"] = f"no inclusion after {max_iterations} iterations"
    cert.alpha = state.alpha
    cert.wh = SpectralFn(n, state.wh.reshape(n, n))
    return cert


# =====================================================================
# Kantorovich-type verification
# =====================================================================

def _beta_block(b: BlockNormBounds, delta: Interval) -> Interval:
    """Residual image norm through the explicit blocks: only the second
    column of the block matrix acts on a pure tail residual."""
    two = (b.h12.sqr() + b.h22.sqr()).sqrt()
    return Interval(0.0, (delta * two).hi)


def _omega_multiplier(p: LinearizedProblem, radius: Interval) -> Interval:
    """sup_{||v|| <= r} ||(f'(u) - f'(u+v)) phi||_L2 / (||v|| ||phi||_H1)."""
    f = p.f
    c4 = p.constants.l4
    out = Interval.point(0.0)
    mu = p.uhat_linf
    for d in range(1, max(f.degree, 1)):
        bd = Interval.point(0.0)
        for k, ck in enumerate(f.coeffs):
            if k >= d + 1 and ck != 0.0:
                bd = bd + Interval.point(abs(ck) * k * math.comb(k - 1, d)) \
                    * _pow_int(mu, k - 1 - d)
        if bd.hi == 0.0:
            continue
        emb = p.constants.embedding(2 * (d + 1))
        out = out + bd * _pow_int(emb, d + 1) * _pow_int(radius, d - 1)
    return Interval(0.0, out.hi)


def kantorovich_verify(p: LinearizedProblem, b: BlockNormBounds,
                       delta: Interval, resid_l2: Interval,
                       mode: str = "block") -> VerificationCertificate:
    """Kantorovich-type existence test; block mode or classic IN mode."""
    if mode not in ("block", "in-classic"):
        raise ValueError(f"unknown mode {mode!r}")
    cn = p.constants.projection_constant(p.n)
    cp = p.constants.poincare
    method = "kantorovich" if mode == "block" else "in-classic"
    cert = VerificationCertificate(
        method=method, variant=b.variant, status="inconclusive",
        problem={"f": list(p.f.coeffs), "N": p.n},
        bounds=_bounds_json(p, b, delta, resid_l2),
        constants=p.constants.sources(), uhat=p.uhat)
    if mode == "block":
        # beta reads only the second block column (the finite residual part
        # vanishes); the omega chain afterwards legitimately reads the rest
        seen = b.reads
        b.reads = set()
        beta = _beta_block(b, delta)
        cert.notes["beta_reads"] = sorted(b.reads)
        b.reads = seen | b.reads
        h_norm = l_inverse_norm(b)
        factor = (cp.sqr() + cn.sqr()).sqrt()
        omega = Interval(0.0, (h_norm * factor
                               * _omega_multiplier(p, beta * 2.0)).hi)
        cert.notes["delta_chain"] = "tail residual via Ritz-vanishing reduction"
        cert.bounds["L_inv"] = list(h_norm.to_hex())
    else:
        # classic chain: no use of the vanishing finite part
        h_norm = l_inverse_norm(b)
        delta_cl = Interval(0.0, (cp * resid_l2).hi)
        beta = Interval(0.0, (h_norm * delta_cl).hi)
        omega = Interval(0.0, (h_norm * cp * _omega_multiplier(p, beta * 2.0)).hi)
        cert.notes["delta_chain"] = "classic embedding bound C_P*||residual||_L2"
        cert.bounds["delta_classic"] = list(delta_cl.to_hex())
        cert.bounds["L_inv"] = list(h_norm.to_hex())
    cert.beta = beta
    cert.omega = omega
    prod = Interval(0.0, (beta * omega).hi)
    cert.bounds["beta_omega"] = list(prod.to_hex())
    rho = kantorovich_radius(beta, omega)
    if rho is None:
        cert.status = "failed-hypothesis"
        cert.notes["reason"] = f"beta*omega = {prod.hi:.6f} >= 1/2"
        return cert
    cert.rho = rho
    cert.uniqueness_radius = Interval(0.0, (beta * 2.0).hi)
    cert.status = "verified"
    return cert


def kantorovich_radius(beta: Interval, omega: Interval) -> Optional[Interval]:
    """rho = (1 - sqrt(1 - 2 beta omega)) / omega, or None if the hypothesis
    beta*omega < 1/2 cannot be certified.

    Evaluated in the equivalent form 2 beta / (1 + sqrt(1 - 2 beta omega)),
    which is stable and yields rho = beta in the omega -> 0 limit.
    """
    prod = Interval(0.0, (beta * omega).hi)
    if prod.hi >= 0.5:
        return None
    arg = Interval(max(0.0, 1.0 - 2.0 * prod.hi), 1.0)
    rho = (beta * 2.0) / (Interval.point(1.0) + arg.sqrt())
    return Interval(0.0, rho.hi)


def _bounds_json(p: LinearizedProblem, b: BlockNormBounds,
                 delta: Interval, resid_l2: Interval) -> dict:
    out = b.as_json()
    out["delta_perp"] = list(delta.to_hex())
    out["residual_l2"] = list(resid_l2.to_hex())
    out["uhat_linf"] = list(p.uhat_linf.to_hex())
    out["fprime_linf"] = list(p.mf.to_hex())
    return out


# =====================================================================
# End-to-end pipeline
# =====================================================================

@dataclass
class PipelineResult:
    uhat: SpectralFn
    problem: LinearizedProblem
    blocks: BlockNormBounds
    delta: Interval
    resid_l2: Interval
    certificates: list[VerificationCertificate]


def prepare_problem(f: PolyNonlinearity, n: int,
                    constants: Optional[ConstantProvider] = None,
                    seed: Optional[SpectralFn] = None,
                    variant: str = "schur") -> tuple[LinearizedProblem, BlockNormBounds,
                                                     Interval, Interval]:
    """Shared pipeline head: solve, enclose, assemble, bound."""
    constants = constants or ConstantProvider()
    u0 = galerkin_approx(f, n, seed=seed)
    uhat = enclose_approx(u0, f)
    prob = assemble_linearization(uhat, f, constants)
    if variant == "schur":
        try:
            b = schur_bounds(prob)
        except InconclusiveError:
            b = schur_bounds_alt(prob)
    elif variant == "schur-alt":
        b = schur_bounds_alt(prob)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    delta, resid_l2 = residual_tail(uhat, f, constants, prob.u_powers)
    return prob, b, delta, resid_l2


def verify_problem(f: PolyNonlinearity, n: int, methods: list[str],
                   constants: Optional[ConstantProvider] = None,
                   variant: str = "schur",
                   options: Optional[dict] = None) -> PipelineResult:
    options = options or {}
    prob, b, delta, resid_l2 = prepare_problem(f, n, constants, variant=variant)
    certs = []
    for method in methods:
        if method == "fixed-point":
            certs.append(fixed_point_verify(prob, b, delta, resid_l2,
                                            **options.get("fixed_point", {})))
        elif method == "kantorovich":
            certs.append(kantorovich_verify(prob, b, delta, resid_l2, mode="block"))
        elif method == "in-classic":
            certs.append(kantorovich_verify(prob, b, delta, resid_l2, mode="in-classic"))
        else:
            raise ValueError(f"unknown method {method!r}")
    return PipelineResult(uhat=prob.uhat, problem=prob, blocks=b,
                          delta=delta, resid_l2=resid_l2, certificates=certs)
