from fractions import Fraction

import mpmath
import numpy as np
import pytest

from veriell.interval import Interval, IntervalArray, identity_int
from veriell.legendre import gram_matrices
from veriell.linalg import (
    CachedSolver,
    InconclusiveError,
    eig_bounds_sym,
    gen_eig_bounds,
    interval_cholesky,
    krawczyk_solve,
    spectral_norm_ub,
    two_by_two_norm_ub,
    verified_solve,
)


def test_solve_identity():
    n = 5
    b = IntervalArray.from_point(np.arange(1.0, n + 1))
    enc = verified_solve(identity_int(n), b)
    assert enc.unique
    assert enc.certificate == "proved-unique-in-box"
    assert enc.box.contains(np.arange(1.0, n + 1))
    assert np.max(enc.box.width()) < 1e-14


def test_solve_diagonal():
    a = IntervalArray.from_point(np.diag([2.0, 4.0]))
    b = IntervalArray.from_point(np.array([2.0, 8.0]))
    enc = verified_solve(a, b)
    assert enc.box.contains(np.array([1.0, 2.0]))
    assert np.max(enc.box.width()) <= 1e-14


def _fraction_gauss_solve(a, b):
    n = len(b)
    m = [[Fraction(float(a[i, j])) for j in range(n)] + [Fraction(float(b[i]))]
         for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(m[r][col]))
        m[col], m[piv] = m[piv], m[col]
        for r in range(n):
            if r != col and m[r][col]:
                factor = m[r][col] / m[col][col]
                m[r] = [x - factor * y for x, y in zip(m[r], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


def test_solve_random_vs_rational_oracle():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((20, 20)) + 20.0 * np.eye(20)
    b = rng.standard_normal(20)
    enc = verified_solve(IntervalArray.from_point(a), IntervalArray.from_point(b))
    exact = _fraction_gauss_solve(a, b)
    for i, fr in enumerate(exact):
        assert Fraction(float(enc.box.lo[i])) <= fr <= Fraction(float(enc.box.hi[i]))


def test_solve_inconclusive_on_singular():
    a = IntervalArray.from_point(np.array([[1.0, 1.0], [1.0, 1.0]]))
    b = IntervalArray.from_point(np.array([1.0, 1.0]))
    with pytest.raises(InconclusiveError):
        verified_solve(a, b)


def test_solve_dimension_error_is_not_inconclusive():
    a = IntervalArray.from_point(np.ones((2, 3)))
    b = IntervalArray.from_point(np.ones(2))
    with pytest.raises(ValueError):
        verified_solve(a, b)


def test_cached_solver_matches():
    rng = np.random.default_rng(12)
    a = rng.standard_normal((12, 12)) + 10 * np.eye(12)
    ai = IntervalArray.from_point(a)
    solver = CachedSolver(ai)
    b = IntervalArray.from_point(rng.standard_normal(12))
    x1 = solver.solve(b)
    x2 = verified_solve(ai, b).box
    assert (np.maximum(x1.lo, x2.lo) <= np.minimum(x1.hi, x2.hi)).all()


# --- Krawczyk --------------------------------------------------------

def test_krawczyk_scalar_quadratic():
    def f(x):
        return x * x - IntervalArray.from_point(np.array([4.0]))

    def jac(x):
        return (x * 2.0).reshape(1, 1)

    enc = krawczyk_solve(f, jac, np.array([2.1]))
    assert enc.unique
    assert enc.box.contains(np.array([2.0]))
    assert float(enc.box.width()[0]) < 1e-10


def test_krawczyk_affine_matches_verified_solve():
    rng = np.random.default_rng(13)
    a = rng.standard_normal((6, 6)) + 6 * np.eye(6)
    b = rng.standard_normal(6)
    ai = IntervalArray.from_point(a)
    bi = IntervalArray.from_point(b)

    def f(x):
        from veriell.interval import int_matvec
        return int_matvec(ai, x) - bi

    def jac(x):
        return ai

    enc = krawczyk_solve(f, jac, np.linalg.solve(a, b) + 1e-8)
    ref = verified_solve(ai, bi).box
    assert (np.maximum(enc.box.lo, ref.lo) <= np.minimum(enc.box.hi, ref.hi)).all()


def test_krawczyk_failure_diagnostics():
    # midpoint Jacobian singular at the seed
    def f(x):
        return x * x

    def jac(x):
        return (x * 2.0).reshape(1, 1)

    with pytest.raises(InconclusiveError):
        krawczyk_solve(f, jac, np.array([0.0]))


# --- norm and eigenvalue bounds --------------------------------------

def test_spectral_norm_identity_and_diag():
    eye = IntervalArray.from_point(np.eye(3))
    bound = spectral_norm_ub(eye)
    assert 1.0 <= bound.hi <= 1.0 + 1e-12
    d = IntervalArray.from_point(np.diag([3.0, 4.0]))
    bound = spectral_norm_ub(d)
    assert 4.0 <= bound.hi <= 4.0 * (1 + 1e-10)


def _mp_svd_max(a):
    mpmath.mp.dps = 40
    s = mpmath.svd_r(mpmath.matrix(a.tolist()), compute_uv=False)
    return max(float(x) for x in s)


def test_spectral_norm_sharp_vs_svd_oracle():
    rng = np.random.default_rng(14)
    a = rng.standard_normal((5, 5))
    bound = spectral_norm_ub(IntervalArray.from_point(a), sharp=True)
    oracle = _mp_svd_max(a)
    assert bound.hi >= oracle * (1 - 1e-13)
    assert bound.hi <= 1.01 * oracle


def test_two_by_two_norm():
    eye = IntervalArray.from_point(np.eye(2))
    assert abs(two_by_two_norm_ub(eye).hi - 1.0) < 1e-12
    d = IntervalArray.from_point(np.diag([3.0, 4.0]))
    assert abs(two_by_two_norm_ub(d).hi - 4.0) < 1e-10


def test_interval_cholesky_spd_and_failure():
    a = np.array([[4.0, 1.0], [1.0, 3.0]])
    interval_cholesky(IntervalArray.from_point(a))  # SPD: no exception
    with pytest.raises(InconclusiveError):
        interval_cholesky(IntervalArray.from_point(np.array([[1.0, 2.0], [2.0, 1.0]])))


def test_gen_eig_identity():
    eye = identity_int(4)
    eb = gen_eig_bounds(eye, eye)
    assert eb.lam_min >= 1 - 1e-12
    assert eb.lam_max <= 1 + 1e-12


def test_gen_eig_diag_fixture():
    a = IntervalArray.from_point(np.diag([2.0, 8.0]))
    b = IntervalArray.from_point(np.diag([1.0, 2.0]))
    eb = gen_eig_bounds(a, b)
    assert eb.intervals.lo[0] <= 2.0 <= eb.intervals.hi[0]
    assert eb.intervals.lo[1] <= 4.0 <= eb.intervals.hi[1]


def _mp_pencil_eigs(a, b):
    mpmath.mp.dps = 40
    am = mpmath.matrix(a.tolist())
    bm = mpmath.matrix(b.tolist())
    low = mpmath.cholesky(bm)
    n = am.rows
    linv = low ** -1
    c = linv * am * linv.T
    c = (c + c.T) / 2
    evals, _ = mpmath.eigsy(c)
    return sorted(float(x) for x in evals)


def test_gen_eig_legendre_pencil_vs_oracle():
    stiff, mass = gram_matrices(5)
    eb = gen_eig_bounds(mass, stiff)
    oracle = _mp_pencil_eigs(mass.mid(), stiff.mid())
    for k, lam in enumerate(oracle):
        assert eb.intervals.lo[k] <= lam <= eb.intervals.hi[k]


def test_eig_bounds_vs_oracle_random():
    rng = np.random.default_rng(15)
    for _ in range(20):
        a = rng.standard_normal((6, 6))
        a = (a + a.T) / 2
        eb = eig_bounds_sym(IntervalArray.from_point(a))
        mpmath.mp.dps = 30
        evals, _ = mpmath.eigsy(mpmath.matrix(a.tolist()))
        oracle = sorted(float(x) for x in evals)
        assert eb.lam_max >= oracle[-1] - 1e-12
        assert eb.lam_min <= oracle[0] + 1e-12
