"""Directed-rounding interval arithmetic over IEEE-754 binary64.

Every operation returns an interval that contains the exact real result for
any selection of points from its operands.  Outward rounding is realized by
nextafter-based endpoint nudging: round-to-nearest is off by at most one ulp,
so moving each endpoint one step outward restores the enclosure.  Scalar
operations additionally detect exact results (via rational arithmetic) so
that e.g. [1,2]+[3,4] really is [4,6].

Intervals are immutable; NaN endpoints and empty intervals are not
representable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

#: rounding strategy recorded in certificates
ROUNDING_STRATEGY = "nextafter-nudging"

_INF = float("inf")


class IntervalDomainError(ValueError):
    """Operation left the domain (division by zero-containing interval, ...)."""


def _down(x):
    return np.nextafter(x, -_INF)


def _up(x):
    return np.nextafter(x, _INF)


# Additions preserve exactness when one operand is zero: this keeps
# structural zeros (parity blocks, zero functions) exact through the
# vectorized pipeline instead of smearing them to +-5e-324.
def _add_down(x, y):
    return np.where(y == 0.0, x, np.where(x == 0.0, y, _down(x + y)))


def _add_up(x, y):
    return np.where(y == 0.0, x, np.where(x == 0.0, y, _up(x + y)))


def _mul_down(x, y):
    return np.where((x == 0.0) | (y == 0.0), 0.0, _down(x * y))


def _mul_up(x, y):
    return np.where((x == 0.0) | (y == 0.0), 0.0, _up(x * y))


def _frac(x: float) -> Fraction:
    return Fraction(x)


def _round_down(value: float, exact: Fraction) -> float:
    """Largest float <= exact, given value = fl(exact op) in round-to-nearest."""
    if math.isinf(value):
        return -_INF if value < 0 else float(np.finfo(np.float64).max)
    if _frac(value) <= exact:
        return value
    return float(_down(value))


def _round_up(value: float, exact: Fraction) -> float:
    if math.isinf(value):
        return _INF if value > 0 else -float(np.finfo(np.float64).max)
    if _frac(value) >= exact:
        return value
    return float(_up(value))


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with outward-rounded endpoints."""

    lo: float
    hi: float

    def __post_init__(self):
        lo = float(self.lo)
        hi = float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise IntervalDomainError("NaN endpoint")
        if lo > hi:
            raise IntervalDomainError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    # --- constructors -------------------------------------------------
    @staticmethod
    def point(x: float) -> "Interval":
        return Interval(x, x)

    @staticmethod
    def from_fraction(fr: Fraction) -> "Interval":
        x = float(fr)
        return Interval(_round_down(x, fr), _round_up(x, fr))

    @staticmethod
    def hull(items: Iterable["Interval"]) -> "Interval":
        items = list(items)
        return Interval(min(iv.lo for iv in items), max(iv.hi for iv in items))

    @staticmethod
    def pi() -> "Interval":
        # math.pi < pi < nextafter(math.pi, inf)
        return Interval(math.pi, float(_up(math.pi)))

    # --- basic queries ------------------------------------------------
    @property
    def width(self) -> float:
        return float(_up(self.hi - self.lo))

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def mag(self) -> float:
        """sup |x| over the interval."""
        return max(abs(self.lo), abs(self.hi))

    def contains(self, x: Union[float, Fraction]) -> bool:
        if isinstance(x, Fraction):
            return _frac(self.lo) <= x <= _frac(self.hi)
        return self.lo <= x <= self.hi

    def is_subset(self, other: "Interval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def is_interior(self, other: "Interval") -> bool:
        return other.lo < self.lo and self.hi < other.hi

    def intersect(self, other: "Interval") -> "Interval":
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            raise IntervalDomainError("empty intersection")
        return Interval(lo, hi)

    # --- arithmetic ---------------------------------------------------
    def _coerce(self, other) -> "Interval":
        if isinstance(other, Interval):
            return other
        if isinstance(other, (int, float)):
            return Interval.point(float(other))
        if isinstance(other, Fraction):
            return Interval.from_fraction(other)
        return NotImplemented

    def _finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        lo = self.lo + b.lo
        hi = self.hi + b.hi
        if not (self._finite() and b._finite()):
            return Interval(float(_down(lo)) if math.isfinite(lo) else lo,
                            float(_up(hi)) if math.isfinite(hi) else hi)
        return Interval(_round_down(lo, _frac(self.lo) + _frac(b.lo)),
                        _round_up(hi, _frac(self.hi) + _frac(b.hi)))

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return self + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        pairs = [(self.lo, b.lo), (self.lo, b.hi), (self.hi, b.lo), (self.hi, b.hi)]
        if not (self._finite() and b._finite()):
            vals = [x * y for x, y in pairs if not math.isnan(x * y)]
            lo = min(vals)
            hi = max(vals)
            return Interval(float(_down(lo)) if math.isfinite(lo) else lo,
                            float(_up(hi)) if math.isfinite(hi) else hi)
        exacts = [_frac(x) * _frac(y) for x, y in pairs]
        vals = [x * y for x, y in pairs]
        lo_i = min(range(4), key=lambda k: exacts[k])
        hi_i = max(range(4), key=lambda k: exacts[k])
        return Interval(_round_down(vals[lo_i], exacts[lo_i]),
                        _round_up(vals[hi_i], exacts[hi_i]))

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        if b.lo <= 0.0 <= b.hi:
            raise IntervalDomainError("division by interval containing zero")
        pairs = [(self.lo, b.lo), (self.lo, b.hi), (self.hi, b.lo), (self.hi, b.hi)]
        exacts = [_frac(x) / _frac(y) for x, y in pairs]
        vals = [x / y for x, y in pairs]
        lo_i = min(range(4), key=lambda k: exacts[k])
        hi_i = max(range(4), key=lambda k: exacts[k])
        return Interval(_round_down(vals[lo_i], exacts[lo_i]),
                        _round_up(vals[hi_i], exacts[hi_i]))

    def __rtruediv__(self, other):
        a = self._coerce(other)
        return a / self

    def sqr(self) -> "Interval":
        """Enclosure of {x^2 : x in self}; tighter than self*self."""
        lo_m, hi_m = self.lo, self.hi
        if lo_m <= 0.0 <= hi_m:
            m = max(-lo_m, hi_m)
            return Interval(0.0, _round_up(m * m, _frac(m) * _frac(m)))
        a = min(abs(lo_m), abs(hi_m))
        bmax = max(abs(lo_m), abs(hi_m))
        return Interval(_round_down(a * a, _frac(a) ** 2),
                        _round_up(bmax * bmax, _frac(bmax) ** 2))

    def sqrt(self) -> "Interval":
        if self.lo < 0.0:
            raise IntervalDomainError("sqrt of interval with negative lower endpoint")
        if math.isinf(self.hi):
            return Interval(max(float(_down(math.sqrt(self.lo))), 0.0), _INF)
        rlo = math.sqrt(self.lo)
        rhi = math.sqrt(self.hi)
        # float sqrt is correctly rounded; certify direction rationally
        if _frac(rlo) ** 2 > _frac(self.lo):
            rlo = float(_down(rlo))
        if _frac(rhi) ** 2 < _frac(self.hi):
            rhi = float(_up(rhi))
        return Interval(max(rlo, 0.0), rhi)

    def scale(self, factor: float) -> "Interval":
        """Multiply by an exact float factor."""
        return self * Interval.point(factor)

    # --- serialization ------------------------------------------------
    def to_hex(self) -> tuple[str, str]:
        return (self.lo.hex(), self.hi.hex())

    @staticmethod
    def from_hex(pair: Sequence[str]) -> "Interval":
        return Interval(float.fromhex(pair[0]), float.fromhex(pair[1]))

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"


def sqrt_iv(a: Interval) -> Interval:
    return a.sqrt()


# =====================================================================
# Vectorized interval arrays
# =====================================================================

class IntervalArray:
    """Dense array of intervals, stored as a pair of float64 arrays.

    Array operations nudge every endpoint one ulp outward instead of doing
    exactness checks; this keeps them vectorized while preserving the
    enclosure property.  Reductions use pairwise halving so that each
    partial sum is individually nudged.
    """

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi, validate: bool = True):
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        if lo.shape != hi.shape:
            raise ValueError("shape mismatch")
        if validate:
            if np.isnan(lo).any() or np.isnan(hi).any():
                raise IntervalDomainError("NaN endpoint in IntervalArray")
            if (lo > hi).any():
                raise IntervalDomainError("empty component interval")
        self.lo = lo
        self.hi = hi

    # --- constructors -------------------------------------------------
    @staticmethod
    def from_point(arr) -> "IntervalArray":
        a = np.asarray(arr, dtype=np.float64)
        return IntervalArray(a.copy(), a.copy())

    @staticmethod
    def zeros(shape) -> "IntervalArray":
        return IntervalArray(np.zeros(shape), np.zeros(shape), validate=False)

    @staticmethod
    def from_fractions(fracs, shape=None) -> "IntervalArray":
        flat = list(fracs)
        lo = np.empty(len(flat))
        hi = np.empty(len(flat))
        for k, fr in enumerate(flat):
            if isinstance(fr, Fraction):
                x = float(fr)
                lo[k] = _round_down(x, fr)
                hi[k] = _round_up(x, fr)
            else:
                lo[k] = hi[k] = float(fr)
        if shape is not None:
            lo = lo.reshape(shape)
            hi = hi.reshape(shape)
        return IntervalArray(lo, hi, validate=False)

    @staticmethod
    def from_scalar(iv: Interval, shape=()) -> "IntervalArray":
        return IntervalArray(np.full(shape, iv.lo), np.full(shape, iv.hi), validate=False)

    # --- structure ----------------------------------------------------
    @property
    def shape(self):
        return self.lo.shape

    @property
    def ndim(self):
        return self.lo.ndim

    def __len__(self):
        return len(self.lo)

    def __getitem__(self, idx) -> "IntervalArray":
        return IntervalArray(self.lo[idx], self.hi[idx], validate=False)

    def item(self, *idx) -> Interval:
        if idx:
            return Interval(float(self.lo[idx]), float(self.hi[idx]))
        return Interval(float(self.lo), float(self.hi))

    def reshape(self, *shape) -> "IntervalArray":
        return IntervalArray(self.lo.reshape(*shape), self.hi.reshape(*shape), validate=False)

    def copy(self) -> "IntervalArray":
        return IntervalArray(self.lo.copy(), self.hi.copy(), validate=False)

    def transpose(self, *axes) -> "IntervalArray":
        return IntervalArray(self.lo.transpose(*axes), self.hi.transpose(*axes), validate=False)

    @property
    def T(self) -> "IntervalArray":
        return self.transpose()

    # --- queries --------------------------------------------------
    def mid(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def rad(self) -> np.ndarray:
        return _up(0.5 * _up(self.hi - self.lo))

    def mag(self) -> np.ndarray:
        """Componentwise sup |x|."""
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def width(self) -> np.ndarray:
        return _up(self.hi - self.lo)

    def contains(self, arr) -> bool:
        a = np.asarray(arr, dtype=np.float64)
        return bool((self.lo <= a).all() and (a <= self.hi).all())

    def encloses(self, other: "IntervalArray") -> bool:
        return bool((self.lo <= other.lo).all() and (other.hi <= self.hi).all())

    def interior_contains(self, other: "IntervalArray") -> bool:
        return bool((self.lo < other.lo).all() and (other.hi < self.hi).all())

    def intersect(self, other: "IntervalArray") -> "IntervalArray":
        lo = np.maximum(self.lo, other.lo)
        hi = np.minimum(self.hi, other.hi)
        if (lo > hi).any():
            raise IntervalDomainError("empty intersection")
        return IntervalArray(lo, hi, validate=False)

    def hull_with(self, other: "IntervalArray") -> "IntervalArray":
        return IntervalArray(np.minimum(self.lo, other.lo),
                             np.maximum(self.hi, other.hi), validate=False)

    # --- arithmetic -----------------------------------------------
    def _coerce(self, other):
        if isinstance(other, IntervalArray):
            return other
        if isinstance(other, Interval):
            return IntervalArray(np.float64(other.lo), np.float64(other.hi), validate=False)
        if isinstance(other, (int, float)):
            x = np.float64(other)
            return IntervalArray(x, x, validate=False)
        if isinstance(other, np.ndarray):
            return IntervalArray.from_point(other)
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return IntervalArray(_add_down(self.lo, b.lo), _add_up(self.hi, b.hi),
                             validate=False)

    __radd__ = __add__

    def __neg__(self):
        return IntervalArray(-self.hi, -self.lo, validate=False)

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return IntervalArray(_add_down(self.lo, -b.hi), _add_up(self.hi, -b.lo),
                             validate=False)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        ll = _mul_down(self.lo, b.lo)
        lh = _mul_down(self.lo, b.hi)
        hl = _mul_down(self.hi, b.lo)
        hh = _mul_down(self.hi, b.hi)
        lo = np.minimum(np.minimum(ll, lh), np.minimum(hl, hh))
        uu = _mul_up(self.lo, b.lo)
        uh = _mul_up(self.lo, b.hi)
        hu = _mul_up(self.hi, b.lo)
        uhh = _mul_up(self.hi, b.hi)
        hi = np.maximum(np.maximum(uu, uh), np.maximum(hu, uhh))
        return IntervalArray(lo, hi, validate=False)

    __rmul__ = __mul__

    def sqr(self) -> "IntervalArray":
        m = self.mag()
        small = np.minimum(np.abs(self.lo), np.abs(self.hi))
        straddles = (self.lo <= 0.0) & (self.hi >= 0.0)
        lo = np.where(straddles, 0.0, _mul_down(small, small))
        hi = _mul_up(m, m)
        return IntervalArray(lo, hi, validate=False)

    def divide_scalar(self, d: Interval) -> "IntervalArray":
        if d.lo <= 0.0 <= d.hi:
            raise IntervalDomainError("division by interval containing zero")
        inv = Interval(1.0, 1.0) / d
        return self * inv

    def sqrt(self) -> "IntervalArray":
        if (self.lo < 0.0).any():
            raise IntervalDomainError("sqrt of interval with negative lower endpoint")
        lo = np.maximum(_down(np.sqrt(self.lo)), 0.0)
        hi = _up(np.sqrt(self.hi))
        return IntervalArray(lo, hi, validate=False)

    def scale_outward(self, factor: float) -> "IntervalArray":
        """Multiply endpoints by factor >= 0 (epsilon-inflation helper)."""
        if factor < 0:
            raise ValueError("factor must be nonnegative")
        return IntervalArray(np.minimum(_down(self.lo * factor), self.lo * factor),
                             np.maximum(_up(self.hi * factor), self.hi * factor),
                             validate=False)

    # --- reductions -----------------------------------------------
    def sum(self, axis: int = 0) -> "IntervalArray":
        """Enclosure of the componentwise sum along `axis` (pairwise, nudged)."""
        lo = np.moveaxis(self.lo, axis, 0)
        hi = np.moveaxis(self.hi, axis, 0)
        while lo.shape[0] > 1:
            n = lo.shape[0]
            m = n // 2
            nlo = _add_down(lo[:m], lo[m:2 * m])
            nhi = _add_up(hi[:m], hi[m:2 * m])
            if n % 2:
                nlo = np.concatenate([nlo, lo[2 * m:]], axis=0)
                nhi = np.concatenate([nhi, hi[2 * m:]], axis=0)
            lo, hi = nlo, nhi
        return IntervalArray(lo[0], hi[0], validate=False)

    def total(self) -> Interval:
        flat = self.reshape(-1)
        s = flat.sum(axis=0)
        return Interval(float(s.lo), float(s.hi))


def tensordot_int(a: IntervalArray, b: IntervalArray, axes,
                  block_elems: int = 6_000_000) -> IntervalArray:
    """Interval tensordot: contract `a` and `b` over the given axis pairs.

    axes = (axes_a, axes_b) as in numpy.tensordot.  Contraction is done by
    broadcasting a blocked outer product and pairwise-summing the contracted
    axis, so the result is a valid enclosure for any summation order.
    """
    ax_a, ax_b = axes
    if isinstance(ax_a, int):
        ax_a = (ax_a,)
    if isinstance(ax_b, int):
        ax_b = (ax_b,)
    free_a = [d for d in range(a.ndim) if d not in ax_a]
    free_b = [d for d in range(b.ndim) if d not in ax_b]
    k = int(np.prod([a.shape[d] for d in ax_a], dtype=np.int64)) if ax_a else 1
    m = int(np.prod([a.shape[d] for d in free_a], dtype=np.int64)) if free_a else 1
    n = int(np.prod([b.shape[d] for d in free_b], dtype=np.int64)) if free_b else 1

    A = a.transpose(*(free_a + list(ax_a))).reshape(m, k)
    B = b.transpose(*(list(ax_b) + free_b)).reshape(k, n)

    out_lo = np.empty((m, n))
    out_hi = np.empty((m, n))
    chunk = max(1, min(n, block_elems // max(1, m * k)))
    for j0 in range(0, n, chunk):
        j1 = min(n, j0 + chunk)
        prod = A.reshape(m, k, 1) * B[:, j0:j1].reshape(1, k, j1 - j0)
        s = prod.sum(axis=1)
        out_lo[:, j0:j1] = s.lo
        out_hi[:, j0:j1] = s.hi
    shape = tuple(a.shape[d] for d in free_a) + tuple(b.shape[d] for d in free_b)
    return IntervalArray(out_lo, out_hi, validate=False).reshape(shape)


def int_matmul(a: IntervalArray, b: IntervalArray) -> IntervalArray:
    return tensordot_int(a, b, (a.ndim - 1, 0))


def int_matvec(a: IntervalArray, x: IntervalArray) -> IntervalArray:
    return tensordot_int(a, x, (1, 0))


def int_dot(x: IntervalArray, y: IntervalArray) -> Interval:
    return (x * y).total()


def quad_form_sup(x: IntervalArray, m: IntervalArray) -> Interval:
    """Enclosure of x^T M x over the box x (valid, possibly pessimistic)."""
    return int_dot(x, int_matvec(m, x))


def identity_int(n: int) -> IntervalArray:
    eye = np.eye(n)
    return IntervalArray(eye.copy(), eye.copy(), validate=False)
