from fractions import Fraction

import numpy as np
import pytest

from veriell.interval import Interval, IntervalArray
from veriell.legendre import (
    LegPoly2D,
    SpectralFn,
    basis_eval,
    fn_norms,
    gram_matrices,
    linf_upper,
    load_vector,
    mass_2d,
    shifted_legendre_eval,
    stiffness_2d,
    weighted_gram,
)


# --- independent symbolic oracle (Rodrigues route, exact rationals) ----

from _oracles import (
    poly_mul as _poly_mul,
    poly_diff as _poly_diff,
    poly_int01 as _poly_int01,
    poly_eval as _poly_eval,
    shifted_legendre_poly as _shifted_legendre_poly,
    psi_poly as _psi_poly,
)


def test_shifted_legendre_values():
    assert shifted_legendre_eval(0, Interval.point(0.3)).contains(1.0)
    p1 = shifted_legendre_eval(1, Interval.point(0.75))
    assert p1.contains(Fraction(1, 2))
    p2 = shifted_legendre_eval(2, Interval.point(0.5))
    assert p2.contains(Fraction(-1, 2))
    # cross-check against the Rodrigues oracle for several degrees/points
    for i in (3, 4, 7):
        poly = _shifted_legendre_poly(i)
        for x in (Fraction(1, 3), Fraction(4, 5)):
            val = shifted_legendre_eval(i, Interval.point(float(x)))
            exact = _poly_eval(poly, Fraction(float(x)))
            assert Fraction(val.lo) <= exact <= Fraction(val.hi)


def test_basis_values():
    for i in (1, 2, 5, 8):
        assert basis_eval(i, Interval.point(0.0)).contains(0.0)
        assert basis_eval(i, Interval.point(1.0)).contains(0.0)
    assert basis_eval(1, Interval.point(0.5)).contains(Fraction(1, 4))
    assert basis_eval(2, Interval.point(0.25)).contains(Fraction(-3, 32))
    for i in (3, 6):
        poly = _psi_poly(i)
        x = Fraction(2, 7)
        val = basis_eval(i, Interval.point(float(x)))
        exact = _poly_eval(poly, Fraction(float(x)))
        assert Fraction(val.lo) <= exact <= Fraction(val.hi)


def test_basis_eval_domain_error():
    from veriell.interval import IntervalDomainError
    with pytest.raises(IntervalDomainError):
        basis_eval(1, Interval(-0.1, 0.5))


def test_basis_eval_width_shrinks_under_subdivision():
    widths = []
    lo, hi = 0.25, 0.75
    for _ in range(8):
        w = basis_eval(3, Interval(lo, hi)).width
        widths.append(w)
        mid = 0.5 * (lo + hi)
        lo, hi = (lo + mid) / 2, (mid + hi) / 2  # nested shrink around center
    assert widths[-1] < 1e-2 * widths[0]
    assert all(widths[k + 1] <= widths[k] * 0.75 for k in range(len(widths) - 1))


def test_gram_closed_forms():
    stiff, mass = gram_matrices(6)
    for i in range(1, 7):
        assert stiff.item(i - 1, i - 1).contains(Fraction(1, 2 * i + 1))
        for j in range(1, 7):
            if i != j:
                assert stiff.item(i - 1, j - 1).contains(Fraction(0))
    assert mass.item(0, 0).contains(Fraction(1, 30))
    assert mass.item(1, 1).contains(Fraction(1, 210))
    assert mass.item(0, 1).contains(Fraction(0))


def test_gram_vs_rodrigues_oracle():
    n = 6
    stiff, mass = gram_matrices(n)
    psis = [_psi_poly(i) for i in range(1, n + 1)]
    dpsis = [_poly_diff(p) for p in psis]
    for i in range(n):
        for j in range(n):
            s_exact = _poly_int01(_poly_mul(dpsis[i], dpsis[j]))
            m_exact = _poly_int01(_poly_mul(psis[i], psis[j]))
            assert stiff.item(i, j).contains(s_exact)
            assert mass.item(i, j).contains(m_exact)


def test_weighted_gram_fixtures():
    zero = SpectralFn.zero(2)
    wg0 = weighted_gram(zero.to_legendre(), 2, factor=2.0)
    assert (wg0.lo == 0.0).all() and (wg0.hi == 0.0).all()

    u = SpectralFn.from_point(2, np.array([[1.0, 0.0], [0.0, 0.0]]))
    wg = weighted_gram(u.to_legendre(), 2, factor=2.0)
    assert wg.item(0, 0).contains(Fraction(1, 9800))
    # symmetry for a point function
    asym = np.max(np.abs(wg.mid() - wg.mid().T))
    assert asym < 1e-15


def test_weighted_gram_vs_oracle_entry():
    # (2 u psi_k psi_l, psi_i psi_j) against the Rodrigues oracle
    n = 3
    coeffs = np.zeros((n, n))
    coeffs[0, 1] = 0.75
    coeffs[2, 0] = -0.5
    u = SpectralFn.from_point(n, coeffs)
    wg = weighted_gram(u.to_legendre(), n, factor=2.0)
    psis = [_psi_poly(i) for i in range(1, n + 1)]
    fr = Fraction
    c01 = fr(3, 4)
    c20 = fr(-1, 2)
    for (i, j, k, l) in [(0, 0, 0, 0), (1, 0, 0, 2), (2, 2, 1, 1)]:
        sx = _poly_int01(_poly_mul(_poly_mul(psis[0], psis[i]), psis[k]))
        sy = _poly_int01(_poly_mul(_poly_mul(psis[1], psis[j]), psis[l]))
        tx = _poly_int01(_poly_mul(_poly_mul(psis[2], psis[i]), psis[k]))
        ty = _poly_int01(_poly_mul(_poly_mul(psis[0], psis[j]), psis[l]))
        exact = 2 * (c01 * sx * sy + c20 * tx * ty)
        assert wg.item(i * n + j, k * n + l).contains(exact)


def test_fn_norms_zero():
    nm = fn_norms(SpectralFn.zero(3))
    for vv in (nm.h10, nm.l2, nm.l4, nm.linf):
        assert vv.contains(0.0)
        assert vv.width <= 1e-300


def test_fn_norms_psi11():
    u = SpectralFn.from_point(3, np.diag([1.0, 0, 0]))
    nm = fn_norms(u)
    assert nm.h10.sqr().contains(Fraction(1, 45))
    assert nm.linf.hi >= 1.0 / 16 - 1e-12
    assert nm.linf.hi <= 1.0 / 16 + 1e-3
    # L4^4 = (int psi1^4)^2 = (1/630)^2
    assert (nm.l4.sqr().sqr()).contains(Fraction(1, 630) ** 2)


def test_parseval_consistency_random():
    rng = np.random.default_rng(21)
    n = 4
    psis = [_psi_poly(i) for i in range(1, n + 1)]
    dpsis = [_poly_diff(p) for p in psis]
    stiff_tab = [[_poly_int01(_poly_mul(dpsis[a], dpsis[b])) for b in range(n)]
                 for a in range(n)]
    mass_tab = [[_poly_int01(_poly_mul(psis[a], psis[b])) for b in range(n)]
                for a in range(n)]
    for _ in range(20):
        c = rng.integers(-3, 4, size=(n, n)).astype(float)
        u = SpectralFn.from_point(n, c)
        q = fn_norms(u, with_linf=False).h10.sqr()
        # oracle: sum c_ab c_cd [ (psi_a',psi_c')(psi_b,psi_d) + (psi_a,psi_c)(psi_b',psi_d') ]
        exact = Fraction(0)
        for a in range(n):
            for b in range(n):
                if c[a, b] == 0:
                    continue
                for d1 in range(n):
                    for d2 in range(n):
                        if c[d1, d2] == 0:
                            continue
                        term = (stiff_tab[a][d1] * mass_tab[b][d2]
                                + mass_tab[a][d1] * stiff_tab[b][d2])
                        term *= Fraction(float(c[a, b])) * Fraction(float(c[d1, d2]))
                        exact += term
        assert Fraction(q.lo) <= exact <= Fraction(q.hi)


def test_product_degree_growth_exact():
    u = SpectralFn.from_point(2, np.array([[1.0, 0.5], [0.0, -2.0]]))
    leg = u.to_legendre()
    assert leg.coeffs.shape == (4, 4)
    sq = leg.square()
    assert sq.coeffs.shape == (7, 7)  # exact degree sum, no truncation
    cube = sq.mul(leg)
    assert cube.coeffs.shape == (10, 10)


def test_load_vector_oracle():
    u = SpectralFn.from_point(2, np.array([[1.0, 0.0], [0.0, 0.0]]))
    p = u.square()
    load = load_vector(p, 2)
    # ((psi1 psi1)^2, psi1 psi1) = (int psi1^3)^2 = (1/140)^2
    assert load.item(0).contains(Fraction(1, 140) ** 2)


def test_linf_upper_point_function():
    u = SpectralFn.from_point(2, np.array([[1.0, 0.0], [0.0, 0.0]]))
    ub = linf_upper(u)
    assert 1.0 / 16 - 1e-12 <= ub <= 1.0 / 16 + 1e-3


def test_csv_json_roundtrip(tmp_path):
    rng = np.random.default_rng(22)
    lo = rng.standard_normal((3, 3))
    hi = lo + np.abs(rng.standard_normal((3, 3))) * 1e-5
    u = SpectralFn(3, IntervalArray(lo, hi))
    path = tmp_path / "fn.csv"
    u.to_csv(path)
    v = SpectralFn.from_csv(path)
    assert (v.coeffs.lo == u.coeffs.lo).all() and (v.coeffs.hi == u.coeffs.hi).all()
    w = SpectralFn.from_json_obj(u.to_json_obj())
    assert (w.coeffs.lo == u.coeffs.lo).all() and (w.coeffs.hi == u.coeffs.hi).all()


def test_mass_2d_tensor_identity():
    m2 = mass_2d(3)
    _, mass = gram_matrices(3)
    for i in range(3):
        for j in range(3):
            ref = mass.item(i, i) * mass.item(j, j)
            got = m2.item(i * 3 + j, i * 3 + j)
            assert got.lo <= ref.hi and ref.lo <= got.hi
