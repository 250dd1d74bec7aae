import numpy as np
import pytest

from veriell.blocks import PolyNonlinearity
from veriell.interval import IntervalArray
from veriell.surrogate import (
    block_solve,
    boxes_intersect,
    build_surrogate,
    build_surrogate_operators,
    direct_solve,
    surrogate_fixed_point,
)
from veriell.verify import enclose_approx, galerkin_approx


@pytest.fixture(scope="module")
def emden_ops():
    f = PolyNonlinearity.emden()
    space = build_surrogate(6, 12)
    u0 = galerkin_approx(f, 6)
    uhat = enclose_approx(u0, f)
    return build_surrogate_operators(uhat, f, space)


def test_block_identity_random_rhs(emden_ops):
    """Explicit 2x2 inverse formulas reproduce direct verified solves."""
    rng = np.random.default_rng(7)
    for _ in range(3):
        g = IntervalArray.from_point(rng.standard_normal(12 * 12))
        ph_b, pc_b = block_solve(emden_ops, g)
        ph_d, pc_d = direct_solve(emden_ops, g)
        assert boxes_intersect(ph_b, ph_d)
        assert boxes_intersect(pc_b, pc_d)


def test_surrogate_soundness_single_instance():
    run = surrogate_fixed_point(PolyNonlinearity.emden(), 6, 12)
    assert run.certificate.status == "verified-unique"
    assert run.contained
    # the enclosure is meaningful: alpha within a factor ~2 of the true tail
    assert run.tail_norm.hi <= run.certificate.alpha.hi <= 4 * run.tail_norm.hi


def test_surrogate_alpha_bounds_truth():
    run = surrogate_fixed_point(PolyNonlinearity.from_list([0.0, 0.0, 1.25]), 6, 12)
    assert run.certificate.verified
    assert run.contained
