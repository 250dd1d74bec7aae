import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from veriell.interval import (
    Interval,
    IntervalArray,
    IntervalDomainError,
    int_matmul,
    int_matvec,
    tensordot_int,
)


def test_exact_endpoint_arithmetic():
    assert (Interval(1, 2) + Interval(3, 4)) == Interval(4, 6)
    assert (Interval(-1, 2) * Interval(3, 4)) == Interval(-4, 8)
    assert (-Interval(1, 2)) == Interval(-2, -1)


def test_division_contains_exact_rational():
    t = Interval(1, 1) / Interval(10, 10)
    assert t.contains(Fraction(1, 10))
    assert t.width <= 2 * math.ulp(0.1)


def test_division_by_zero_interval_raises():
    with pytest.raises(IntervalDomainError):
        Interval(1, 1) / Interval(-1, 1)


def test_sqrt_fixtures():
    assert Interval(4, 9).sqrt() == Interval(2, 3)
    assert Interval(0, 0).sqrt() == Interval(0, 0)
    r = Interval(2, 2).sqrt()
    # contains sqrt(2) to rational precision; width <= 2 ulp
    s = Fraction(665857, 470832)  # > sqrt(2)
    assert r.lo <= float(s) and r.hi >= 1.4142135623730950
    assert r.width <= 2 * math.ulp(1.5)


def test_sqrt_negative_raises():
    with pytest.raises(IntervalDomainError):
        Interval(-1, 1).sqrt()


def test_nan_and_empty_rejected():
    with pytest.raises(IntervalDomainError):
        Interval(float("nan"), 1.0)
    with pytest.raises(IntervalDomainError):
        Interval(2.0, 1.0)


def test_hex_roundtrip_bit_exact():
    iv = Interval(-1.2345678912345e-7, 9.87654321e12)
    assert Interval.from_hex(iv.to_hex()) == iv


def test_sqr_tighter_than_mul():
    a = Interval(-2, 3)
    s = a.sqr()
    assert s.lo == 0.0 and s.contains(9.0)
    assert s.hi <= (a * a).hi


def test_width_control_point_operands():
    a = Interval.point(1.1)
    b = Interval.point(2.3)
    for op in (lambda: a + b, lambda: a * b, lambda: a / b, lambda: (a - b)):
        r = op()
        assert r.width <= 2 * math.ulp(max(abs(r.lo), abs(r.hi), 1e-300))


def _contains_frac(iv: Interval, fr: Fraction) -> bool:
    return Fraction(iv.lo) <= fr <= Fraction(iv.hi)


def test_containment_fuzz_small():
    # exact-rational oracle on a quick sample; the full 1e6 run is in the
    # acceptance suite
    rng = np.random.default_rng(42)
    xs = rng.uniform(-50, 50, size=2000)
    ys = rng.uniform(-50, 50, size=2000)
    for x, y in zip(xs, ys):
        a = Interval.point(x)
        b = Interval.point(y)
        fx, fy = Fraction(float(x)), Fraction(float(y))
        assert _contains_frac(a + b, fx + fy)
        assert _contains_frac(a * b, fx * fy)
        assert _contains_frac(a - b, fx - fy)
        if y != 0.0:
            assert _contains_frac(a / b, fx / fy)


finite = st.floats(min_value=-1e8, max_value=1e8, allow_nan=False)


@st.composite
def nested_pair(draw):
    lo = draw(finite)
    hi = draw(finite)
    lo, hi = min(lo, hi), max(lo, hi)
    pad_l = draw(st.floats(min_value=0, max_value=1e6))
    pad_r = draw(st.floats(min_value=0, max_value=1e6))
    return Interval(lo, hi), Interval(lo - pad_l, hi + pad_r)


@settings(max_examples=300, deadline=None)
@given(nested_pair(), nested_pair())
def test_inclusion_monotonicity(ab, cd):
    a, a2 = ab
    b, b2 = cd
    assert (a + b).is_subset(a2 + b2)
    assert (a - b).is_subset(a2 - b2)
    assert (a * b).is_subset(a2 * b2)
    if not (b2.lo <= 0.0 <= b2.hi):
        assert (a / b).is_subset(a2 / b2)


# --- array layer ----------------------------------------------------

def test_array_ops_match_scalar():
    rng = np.random.default_rng(3)
    lo = rng.uniform(-5, 5, size=(4, 3))
    hi = lo + rng.uniform(0, 2, size=(4, 3))
    a = IntervalArray(lo, hi)
    b = IntervalArray(lo * 0.5 - 1, hi * 0.5 + 1)
    prod = a * b
    for i in range(4):
        for j in range(3):
            ref = a.item(i, j) * b.item(i, j)
            assert prod.lo[i, j] <= ref.lo and ref.hi <= prod.hi[i, j]


def test_array_sum_encloses_exact():
    rng = np.random.default_rng(4)
    vals = rng.uniform(-1, 1, size=257)
    arr = IntervalArray.from_point(vals)
    s = arr.sum(axis=0)
    exact = sum(Fraction(float(v)) for v in vals)
    assert Fraction(float(s.lo)) <= exact <= Fraction(float(s.hi))


def test_structural_zeros_preserved():
    z = IntervalArray.zeros((3, 3))
    a = IntervalArray.from_point(np.eye(3))
    assert (int_matmul(z, a).lo == 0.0).all()
    assert (int_matmul(z, a).hi == 0.0).all()
    assert ((z + z).lo == 0.0).all()
    assert ((z * a).hi == 0.0).all()


def test_tensordot_matches_manual():
    rng = np.random.default_rng(5)
    a = IntervalArray.from_point(rng.standard_normal((3, 4)))
    x = IntervalArray(rng.uniform(-1, 0, 4), rng.uniform(0, 1, 4))
    out = int_matvec(a, x)
    for i in range(3):
        acc = Interval.point(0.0)
        for k in range(4):
            acc = acc + a.item(i, k) * x.item(k)
        assert out.lo[i] <= acc.lo + 1e-300 and acc.hi <= out.hi[i] + 1e-300


def test_tensordot_multiaxis():
    rng = np.random.default_rng(6)
    a = IntervalArray.from_point(rng.standard_normal((2, 3, 4)))
    b = IntervalArray.from_point(rng.standard_normal((3, 4, 5)))
    out = tensordot_int(a, b, ((1, 2), (0, 1)))
    ref = np.tensordot(a.mid(), b.mid(), ((1, 2), (0, 1)))
    assert out.shape == (2, 5)
    assert (out.lo <= ref + 1e-12).all() and (ref - 1e-12 <= out.hi).all()


def test_interior_and_intersect():
    a = IntervalArray(np.array([0.0, 1.0]), np.array([2.0, 3.0]))
    b = IntervalArray(np.array([0.5, 1.5]), np.array([1.5, 2.5]))
    assert a.interior_contains(b)
    c = a.intersect(b)
    assert (c.lo == b.lo).all() and (c.hi == b.hi).all()
