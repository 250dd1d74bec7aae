"""Tensor integrated-Legendre space on (0,1)^2 with interval coefficients.

The 1D basis is psi_i(x) = x(1-x) P_i'(x) / (i(i+1)), i >= 1, with P_i the
shifted Legendre polynomial on (0,1).  Key identities used throughout:

    psi_i'  = -P_i                         (stiffness is diagonal)
    psi_i   = (P_{i-1} - P_{i+1}) / (2(2i+1))
    P_a P_b = sum_k  c(a,b,k) P_{a+b-2k}   (Neumann-Adams linearization)

All structure tables (bands, product coefficients, norms) are computed in
exact rational arithmetic once and converted to tight intervals, so every
polynomial pairing reduces to interval tensor contractions against exact
data -- no quadrature error anywhere.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .interval import (
    Interval,
    IntervalArray,
    IntervalDomainError,
    int_matvec,
    quad_form_sup,
    tensordot_int,
)

__all__ = [
    "SpectralFn", "LegPoly2D", "FnNorms",
    "shifted_legendre_eval", "basis_eval", "eval_basis_1d",
    "gram_matrices", "stiffness_2d", "mass_2d", "weighted_gram",
    "g3_table", "fn_norms", "linf_upper", "load_vector",
    "stiffness_1d_fraction", "mass_1d_fraction", "adams_coeff",
]


# =====================================================================
# Exact rational structure coefficients
# =====================================================================

@lru_cache(maxsize=None)
def _central(m: int) -> Fraction:
    # (2m)! / (2^m (m!)^2)
    return Fraction(math.comb(2 * m, m), 2 ** m)


def adams_coeff(a: int, b: int, k: int) -> Fraction:
    """Coefficient of P_{a+b-2k} in P_a P_b (shifted or standard Legendre)."""
    return (_central(k) * _central(a - k) * _central(b - k) / _central(a + b - k)
            * Fraction(2 * (a + b) - 4 * k + 1, 2 * (a + b) - 2 * k + 1))


@lru_cache(maxsize=8)
def product_table(dmax: int) -> IntervalArray:
    """A[a,b,s] with P_a P_b = sum_s A[a,b,s] P_s, for a,b <= dmax."""
    lo = np.zeros((dmax + 1, dmax + 1, 2 * dmax + 1))
    hi = np.zeros_like(lo)
    for a in range(dmax + 1):
        for b in range(a + 1):
            for k in range(b + 1):
                s = a + b - 2 * k
                iv = Interval.from_fraction(adams_coeff(a, b, k))
                lo[a, b, s] = lo[b, a, s] = iv.lo
                hi[a, b, s] = hi[b, a, s] = iv.hi
    return IntervalArray(lo, hi, validate=False)


def psi_band_fraction(i: int) -> dict[int, Fraction]:
    """psi_i in the Legendre basis: {i-1: c, i+1: -c}, c = 1/(2(2i+1))."""
    c = Fraction(1, 2 * (2 * i + 1))
    return {i - 1: c, i + 1: -c}


@lru_cache(maxsize=8)
def _band_matrix(n: int) -> IntervalArray:
    """E[i-1, s]: psi_i = sum_s E[i-1,s] P_s, shape (n, n+2)."""
    lo = np.zeros((n, n + 2))
    hi = np.zeros_like(lo)
    for i in range(1, n + 1):
        for s, fr in psi_band_fraction(i).items():
            iv = Interval.from_fraction(fr)
            lo[i - 1, s] = iv.lo
            hi[i - 1, s] = iv.hi
    return IntervalArray(lo, hi, validate=False)


@lru_cache(maxsize=8)
def _second_deriv_table(n: int) -> IntervalArray:
    """D2[i-1, s]: psi_i'' = sum_s D2[i-1,s] P_s (exact integers)."""
    out = np.zeros((n, n + 2))
    for i in range(1, n + 1):
        j = i - 1
        while j >= 0:
            out[i - 1, j] = -2.0 * (2 * j + 1)
            j -= 2
    return IntervalArray(out.copy(), out.copy(), validate=False)


@lru_cache(maxsize=8)
def _leg_norm_ivs(s: int) -> IntervalArray:
    """Intervals of 1/(2k+1), k = 0..s-1 (L^2 norms of the Legendre basis)."""
    return IntervalArray.from_fractions(
        [Fraction(1, 2 * k + 1) for k in range(s)], shape=(s,))


def stiffness_1d_fraction(i: int, j: int) -> Fraction:
    """Exact (psi_i', psi_j')_{L^2(0,1)}."""
    return Fraction(1, 2 * i + 1) if i == j else Fraction(0)


def mass_1d_fraction(i: int, j: int) -> Fraction:
    """Exact (psi_i, psi_j)_{L^2(0,1)} (pentadiagonal)."""
    if i > j:
        i, j = j, i
    if i == j:
        return Fraction(1, 4 * (2 * i + 1) ** 2) * (
            Fraction(1, 2 * i - 1) + Fraction(1, 2 * i + 3))
    if j == i + 2:
        return -Fraction(1, 4 * (2 * i + 1) * (2 * i + 5) * (2 * i + 3))
    return Fraction(0)


@lru_cache(maxsize=8)
def gram_matrices(n: int) -> tuple[IntervalArray, IntervalArray]:
    """1D stiffness and mass Gram matrices of psi_1..psi_n as enclosures."""
    if n < 1:
        raise ValueError("degree must be >= 1")
    stiff = IntervalArray.from_fractions(
        [stiffness_1d_fraction(i, j) for i in range(1, n + 1) for j in range(1, n + 1)],
        shape=(n, n))
    mass = IntervalArray.from_fractions(
        [mass_1d_fraction(i, j) for i in range(1, n + 1) for j in range(1, n + 1)],
        shape=(n, n))
    return stiff, mass


def _outer(a: IntervalArray, b: IntervalArray) -> IntervalArray:
    n = a.shape[0]
    return a.reshape(n, 1, n, 1) * b.reshape(1, n, 1, n)


@lru_cache(maxsize=8)
def stiffness_2d(n: int) -> IntervalArray:
    """(grad Phi_ij, grad Phi_kl) as an (n^2, n^2) enclosure (tensor identity)."""
    stiff, mass = gram_matrices(n)
    full = _outer(stiff, mass) + _outer(mass, stiff)
    return full.reshape(n * n, n * n)


@lru_cache(maxsize=8)
def mass_2d(n: int) -> IntervalArray:
    stiff, mass = gram_matrices(n)
    return _outer(mass, mass).reshape(n * n, n * n)


@lru_cache(maxsize=8)
def g3_table(n: int) -> IntervalArray:
    """G3[s, i, k] = (P_s, psi_i psi_k)_{L^2(0,1)}, exact rationals.

    s runs to 2n+2 so that products against любой degree-(n+1) squared
    Legendre data are covered.
    """
    smax = 2 * n + 3
    vals = {}
    for i in range(1, n + 1):
        bi = psi_band_fraction(i)
        for k in range(i, n + 1):
            bk = psi_band_fraction(k)
            acc: dict[int, Fraction] = {}
            for a, ca in bi.items():
                for b, cb in bk.items():
                    lo_ab, hi_ab = min(a, b), max(a, b)
                    for kk in range(lo_ab + 1):
                        s = a + b - 2 * kk
                        if s >= smax:
                            continue
                        c = ca * cb * adams_coeff(a, b, kk) / (2 * s + 1)
                        acc[s] = acc.get(s, Fraction(0)) + c
            vals[(i, k)] = acc
    lo = np.zeros((smax, n, n))
    hi = np.zeros_like(lo)
    for (i, k), acc in vals.items():
        for s, fr in acc.items():
            iv = Interval.from_fraction(fr)
            lo[s, i - 1, k - 1] = lo[s, k - 1, i - 1] = iv.lo
            hi[s, i - 1, k - 1] = hi[s, k - 1, i - 1] = iv.hi
    return IntervalArray(lo, hi, validate=False)


# =====================================================================
# Basis evaluation
# =====================================================================

def _check_unit(x: IntervalArray):
    if (x.lo < 0.0).any() or (x.hi > 1.0).any():
        raise IntervalDomainError("argument outside [0,1]")


def _legendre_all(nmax: int, x: IntervalArray) -> list[IntervalArray]:
    """P_0..P_nmax at shifted argument, three-term recurrence on intervals.

    Values are re-intersected with [-1, 1] (valid on [0,1]) to damp the
    width growth of the recurrence.
    """
    shape = x.shape
    t = x + x - 1.0  # 2x - 1
    ones = np.ones(shape)
    out = [IntervalArray.from_point(ones)]
    if nmax >= 1:
        out.append(t)
    for k in range(1, nmax):
        nxt = (t * out[k]) * float(2 * k + 1) - out[k - 1] * float(k)
        nxt = nxt.divide_scalar(Interval.point(float(k + 1)))
        nxt = IntervalArray(np.maximum(nxt.lo, -ones), np.minimum(nxt.hi, ones),
                            validate=False)
        out.append(nxt)
    return out


def shifted_legendre_eval(i: int, x: Union[Interval, IntervalArray]) -> Union[Interval, IntervalArray]:
    """Enclosure of the degree-i shifted Legendre polynomial on [0,1].

    Mean-value widening with |P_i'| <= i(i+1) on [0,1]; values stay in [-1,1].
    """
    scalar = isinstance(x, Interval)
    xa = IntervalArray(np.atleast_1d(x.lo), np.atleast_1d(x.hi)) if scalar else x
    _check_unit(xa)
    rad = xa.rad()
    xm = IntervalArray.from_point(np.clip(xa.mid(), 0.0, 1.0))
    p = _legendre_all(i, xm)[i]
    pad = float(i * (i + 1)) * rad
    from .interval import _add_down, _add_up
    out = IntervalArray(np.maximum(_add_down(p.lo, -pad), -1.0),
                        np.minimum(_add_up(p.hi, pad), 1.0), validate=False)
    return out.item(0) if scalar else out


def eval_basis_1d(n: int, x: IntervalArray) -> IntervalArray:
    """psi_1..psi_n over interval arguments; shape (n,) + x.shape.

    Wide arguments are handled in mean-value form: evaluate at the midpoint
    with the (stable) point recurrence and widen by the argument radius,
    using |psi_i'| = |P_i| <= 1 on [0,1].  This avoids the exponential width
    growth of the raw interval recurrence near the endpoints.
    """
    _check_unit(x)
    rad = x.rad()
    xm = IntervalArray.from_point(np.clip(x.mid(), 0.0, 1.0))
    legs = _legendre_all(n + 1, xm)
    rows = []
    for i in range(1, n + 1):
        c = Interval.from_fraction(Fraction(1, 2 * (2 * i + 1)))
        rows.append((legs[i - 1] - legs[i + 1]) * c)
    lo = np.stack([r.lo for r in rows])
    hi = np.stack([r.hi for r in rows])
    from .interval import _add_down, _add_up
    lo = _add_down(lo, np.broadcast_to(-rad, lo.shape))
    hi = _add_up(hi, np.broadcast_to(rad, hi.shape))
    return IntervalArray(lo, hi, validate=False)


def basis_eval(i: int, x: Union[Interval, IntervalArray]) -> Union[Interval, IntervalArray]:
    """Enclosure of psi_i(x) on [0,1]."""
    scalar = isinstance(x, Interval)
    xa = IntervalArray(np.atleast_1d(x.lo), np.atleast_1d(x.hi)) if scalar else x
    out = eval_basis_1d(i, xa)[i - 1]
    return out.item(0) if scalar else out


# =====================================================================
# Function types
# =====================================================================

@dataclass
class LegPoly2D:
    """Polynomial sum_{s,t} c_st P_s(x) P_t(y) with interval coefficients.

    The exact-degree representation used for products, Laplacians and
    residuals; Parseval makes L^2 pairings trivial.
    """

    coeffs: IntervalArray  # shape (S, T)

    @property
    def degrees(self) -> tuple[int, int]:
        s, t = self.coeffs.shape
        return s - 1, t - 1

    def __add__(self, other: "LegPoly2D") -> "LegPoly2D":
        lo, hi = _pad_add(self.coeffs, other.coeffs)
        return LegPoly2D(IntervalArray(lo, hi, validate=False))

    def scale(self, c: Union[float, Interval]) -> "LegPoly2D":
        return LegPoly2D(self.coeffs * c)

    def __neg__(self) -> "LegPoly2D":
        return LegPoly2D(-self.coeffs)

    def mul(self, other: "LegPoly2D") -> "LegPoly2D":
        """Exact-degree product via the Legendre linearization table."""
        u, v = self.coeffs, other.coeffs
        dmax = max(u.shape[0], u.shape[1], v.shape[0], v.shape[1]) - 1
        table = product_table(_table_size(dmax))
        ax = table[:u.shape[0], :v.shape[0], :u.shape[0] + v.shape[0] - 1]
        ay = table[:u.shape[1], :v.shape[1], :u.shape[1] + v.shape[1] - 1]
        r1 = tensordot_int(u, ax, (0, 0))            # (b, c, s)
        r2 = tensordot_int(r1, v, (1, 0))            # (b, s, d)
        return LegPoly2D(tensordot_int(r2, ay, ((0, 2), (0, 1))))  # (s, t)

    def square(self) -> "LegPoly2D":
        return self.mul(self)

    def l2_norm_sq(self) -> Interval:
        """Exact Parseval: int p^2 = sum c_st^2 / ((2s+1)(2t+1))."""
        s, t = self.coeffs.shape
        ws = _leg_norm_ivs(s)
        wt = _leg_norm_ivs(t)
        sq = self.coeffs.sqr()
        tmp = sq * ws.reshape(s, 1)
        tmp = tmp * wt.reshape(1, t)
        q = tmp.total()
        return Interval(max(q.lo, 0.0), q.hi)

    def l2_norm(self) -> Interval:
        return self.l2_norm_sq().sqrt()

    def inner(self, other: "LegPoly2D") -> Interval:
        s = min(self.coeffs.shape[0], other.coeffs.shape[0])
        t = min(self.coeffs.shape[1], other.coeffs.shape[1])
        ws = _leg_norm_ivs(s)
        wt = _leg_norm_ivs(t)
        prod = self.coeffs[:s, :t] * other.coeffs[:s, :t]
        prod = prod * ws.reshape(s, 1)
        prod = prod * wt.reshape(1, t)
        return prod.total()


def _pad_add(a: IntervalArray, b: IntervalArray):
    s = max(a.shape[0], b.shape[0])
    t = max(a.shape[1], b.shape[1])
    lo = np.zeros((s, t))
    hi = np.zeros((s, t))
    lo[:a.shape[0], :a.shape[1]] = a.lo
    hi[:a.shape[0], :a.shape[1]] = a.hi
    lo2 = np.zeros((s, t))
    hi2 = np.zeros((s, t))
    lo2[:b.shape[0], :b.shape[1]] = b.lo
    hi2[:b.shape[0], :b.shape[1]] = b.hi
    from .interval import _add_down, _add_up
    return _add_down(lo, lo2), _add_up(hi, hi2)


@lru_cache(maxsize=8)
def _table_size(dmax: int) -> int:
    # grow in steps to keep the lru-cached product tables few
    size = 8
    while size < dmax:
        size *= 2
    return size


@dataclass
class SpectralFn:
    """Member of V_h^N: sum_{i,j=1..N} c_ij psi_i(x) psi_j(y)."""

    n: int
    coeffs: IntervalArray  # shape (N, N)

    def __post_init__(self):
        if self.coeffs.shape != (self.n, self.n):
            raise ValueError("coefficient shape mismatch")

    @staticmethod
    def from_point(n: int, arr: np.ndarray) -> "SpectralFn":
        return SpectralFn(n, IntervalArray.from_point(np.asarray(arr, dtype=np.float64)))

    @staticmethod
    def zero(n: int) -> "SpectralFn":
        return SpectralFn(n, IntervalArray.zeros((n, n)))

    def is_point(self) -> bool:
        return bool((self.coeffs.lo == self.coeffs.hi).all())

    def __add__(self, other: "SpectralFn") -> "SpectralFn":
        if other.n != self.n:
            raise ValueError("degree mismatch")
        return SpectralFn(self.n, self.coeffs + other.coeffs)

    def scale(self, c: Union[float, Interval]) -> "SpectralFn":
        return SpectralFn(self.n, self.coeffs * c)

    def to_legendre(self) -> LegPoly2D:
        e = _band_matrix(self.n)
        t1 = tensordot_int(e, self.coeffs, (0, 0))   # (s, j)
        return LegPoly2D(tensordot_int(t1, e, (1, 0)))  # (s, t)

    def mul(self, other: "SpectralFn") -> LegPoly2D:
        """Product tracked exactly in the higher-degree Legendre space."""
        return self.to_legendre().mul(other.to_legendre())

    def square(self) -> LegPoly2D:
        return self.to_legendre().square()

    def laplacian(self) -> LegPoly2D:
        d2 = _second_deriv_table(self.n)
        e = _band_matrix(self.n)
        part1 = tensordot_int(tensordot_int(d2, self.coeffs, (0, 0)), e, (1, 0))
        part2 = tensordot_int(tensordot_int(e, self.coeffs, (0, 0)), d2, (1, 0))
        return LegPoly2D(part1 + part2)

    def eval(self, x: Union[Interval, IntervalArray],
             y: Union[Interval, IntervalArray]) -> Union[Interval, IntervalArray]:
        scalar = isinstance(x, Interval)
        xa = IntervalArray(np.atleast_1d(x.lo), np.atleast_1d(x.hi)) if scalar else x
        ya = IntervalArray(np.atleast_1d(y.lo), np.atleast_1d(y.hi)) if scalar else y
        if xa.shape != ya.shape:
            raise ValueError("eval expects paired x, y samples")
        bx = eval_basis_1d(self.n, xa)   # (N, k)
        by = eval_basis_1d(self.n, ya)
        t = tensordot_int(self.coeffs, bx, (0, 0))   # (j, k)
        out = (t * by).sum(axis=0)
        return out.item(0) if scalar else out

    # --- serialization -----------------------------------------------
    def to_rows(self) -> list[tuple[int, int, str, str]]:
        rows = []
        for i in range(self.n):
            for j in range(self.n):
                rows.append((i + 1, j + 1,
                             float(self.coeffs.lo[i, j]).hex(),
                             float(self.coeffs.hi[i, j]).hex()))
        return rows

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "lo_hex", "hi_hex", "lo", "hi"])
            for i, j, lhx, hhx in self.to_rows():
                w.writerow([i, j, lhx, hhx,
                            repr(float.fromhex(lhx)), repr(float.fromhex(hhx))])

    @staticmethod
    def from_csv(path) -> "SpectralFn":
        entries = {}
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                entries[(int(row["i"]), int(row["j"]))] = (
                    float.fromhex(row["lo_hex"]), float.fromhex(row["hi_hex"]))
        n = max(max(i, j) for i, j in entries)
        lo = np.zeros((n, n))
        hi = np.zeros((n, n))
        for (i, j), (a, b) in entries.items():
            lo[i - 1, j - 1] = a
            hi[i - 1, j - 1] = b
        return SpectralFn(n, IntervalArray(lo, hi))

    def to_json_obj(self) -> dict:
        return {"n": self.n,
                "coeffs": [[i, j, [lhx, hhx]] for i, j, lhx, hhx in self.to_rows()]}

    @staticmethod
    def from_json_obj(obj: dict) -> "SpectralFn":
        n = int(obj["n"])
        lo = np.zeros((n, n))
        hi = np.zeros((n, n))
        for i, j, (a, b) in obj["coeffs"]:
            lo[i - 1][j - 1] = float.fromhex(a)
            hi[i - 1][j - 1] = float.fromhex(b)
        return SpectralFn(n, IntervalArray(lo, hi))


# =====================================================================
# Pairings against the basis
# =====================================================================

def load_vector(p: LegPoly2D, n: int) -> IntervalArray:
    """(p, psi_i psi_j)_{L^2} for i,j = 1..n, flattened to length n^2."""
    e = _band_matrix(n)
    s, t = p.coeffs.shape
    width = max(s, t, n + 2)
    b_lo = np.zeros((n, width))
    b_hi = np.zeros((n, width))
    norms = _leg_norm_ivs(n + 2)
    scaled = e * norms.reshape(1, n + 2)
    b_lo[:, :n + 2] = scaled.lo
    b_hi[:, :n + 2] = scaled.hi
    b = IntervalArray(b_lo, b_hi, validate=False)
    t1 = tensordot_int(b[:, :s], p.coeffs, (1, 0))      # (i, t)
    out = tensordot_int(t1, b[:, :t], (1, 1))           # (i, j)
    return out.reshape(n * n)


def weighted_gram(weight: LegPoly2D, n: int, factor: float = 2.0) -> IntervalArray:
    """Enclosure of (factor * w * Phi_kl, Phi_ij) as an (n^2, n^2) matrix.

    `weight` is the multiplier (e.g. u for the Frechet derivative 2u of the
    Emden nonlinearity with factor=2, or u^2 with factor=4 for the
    squared-multiplier Gram).
    """
    g3 = g3_table(n)
    s, t = weight.coeffs.shape
    smax = g3.shape[0]
    if s > smax or t > smax:
        raise ValueError("weight degree exceeds g3 table range")
    w1 = tensordot_int(weight.coeffs, g3[:s], (0, 0))   # (t, i, k)
    q = tensordot_int(w1, g3[:t], (0, 0))               # (i, k, j, l)
    q = q.transpose(0, 2, 1, 3).reshape(n * n, n * n)
    return q * float(factor)


# =====================================================================
# Norms
# =====================================================================

@dataclass
class FnNorms:
    h10: Interval
    l2: Interval
    l4: Interval
    linf: Interval  # upper bound only: [0, sup]


def fn_norms(fn: SpectralFn, linf_grid: int = 64,
             linf_reltol: float = 1e-3, with_linf: bool = True) -> FnNorms:
    flat = fn.coeffs.reshape(fn.n * fn.n)
    h1sq = quad_form_sup(flat, stiffness_2d(fn.n))
    l2sq = quad_form_sup(flat, mass_2d(fn.n))
    leg = fn.to_legendre()
    l4sq = leg.square().l2_norm_sq()
    sup = linf_upper(fn, grid=linf_grid, reltol=linf_reltol) if with_linf \
        else float("inf")
    return FnNorms(
        h10=Interval(max(h1sq.lo, 0.0), h1sq.hi).sqrt(),
        l2=Interval(max(l2sq.lo, 0.0), l2sq.hi).sqrt(),
        l4=Interval(max(l4sq.lo, 0.0), l4sq.hi).sqrt().sqrt(),
        linf=Interval(0.0, sup),
    )


def linf_upper(fn: SpectralFn, grid: int = 64, reltol: float = 1e-3,
               cell_cap: int = 1_000_000, max_rounds: int = 12) -> float:
    """Rigorous upper bound of sup |fn| on [0,1]^2 via adaptive interval grid."""
    edges = np.linspace(0.0, 1.0, grid + 1)
    cols = IntervalArray(edges[:-1], edges[1:])
    bx = eval_basis_1d(fn.n, cols)          # (N, grid)
    t1 = tensordot_int(fn.coeffs, bx, (0, 0))   # (j, cx)
    vals = tensordot_int(t1, bx, (0, 0))        # (cx, cy)
    mag = vals.mag()
    wid = vals.width()

    best = float(np.max(mag))
    xlo = np.repeat(edges[:-1], grid)
    xhi = np.repeat(edges[1:], grid)
    ylo = np.tile(edges[:-1], grid)
    yhi = np.tile(edges[1:], grid)
    mags = mag.reshape(-1)
    wids = wid.reshape(-1)
    total = grid * grid

    for _ in range(max_rounds):
        thresh = reltol * best
        hot = (wids > thresh) & (mags > best - wids)
        if not hot.any() or total >= cell_cap:
            break
        hot_width = float(np.max(wids[hot]))
        keep = ~hot
        sx0, sx1 = xlo[hot], xhi[hot]
        sy0, sy1 = ylo[hot], yhi[hot]
        xm = 0.5 * (sx0 + sx1)
        ym = 0.5 * (sy0 + sy1)
        nx0 = np.concatenate([sx0, xm, sx0, xm])
        nx1 = np.concatenate([xm, sx1, xm, sx1])
        ny0 = np.concatenate([sy0, sy0, ym, ym])
        ny1 = np.concatenate([ym, ym, sy1, sy1])
        total += 3 * int(hot.sum())
        px = eval_basis_1d(fn.n, IntervalArray(nx0, nx1))   # (N, c)
        py = eval_basis_1d(fn.n, IntervalArray(ny0, ny1))
        t = tensordot_int(fn.coeffs, px, (0, 0))            # (j, c)
        cellv = (t * py).sum(axis=0)
        nmag = cellv.mag()
        nwid = cellv.width()
        xlo = np.concatenate([xlo[keep], nx0])
        xhi = np.concatenate([xhi[keep], nx1])
        ylo = np.concatenate([ylo[keep], ny0])
        yhi = np.concatenate([yhi[keep], ny1])
        mags = np.concatenate([mags[keep], nmag])
        wids = np.concatenate([wids[keep], nwid])
        best = float(np.max(mags))
        if float(np.max(nwid)) > 0.8 * hot_width:
            # children as wide as their parents: widths are dominated by
            # coefficient intervals and subdividing cannot tighten the bound
            break
    return best


def h10_norm_sup(coeffs: IntervalArray, n: int) -> Interval:
    """H^1_0 norm range of a coefficient box (sup is the certified bound)."""
    q = quad_form_sup(coeffs.reshape(n * n), stiffness_2d(n))
    return Interval(max(q.lo, 0.0), q.hi).sqrt()
