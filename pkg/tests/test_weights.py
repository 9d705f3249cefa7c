import numpy as np
import pytest
from hypothesis import given, strategies as st

from blidkit.errors import InputError, WeightError
from blidkit.grids import GridSpec
from blidkit.weights import (WeightFunction, build_weight, check_equivalent, check_Q_class, const_weight,
                             disk_offsets, lambda_bounds_local, poly_abs, scaled)


def test_const_weight_bounds_are_one():
    lb = lambda_bounds_local(const_weight(1.0), [0.3], [1], 0.5j, 3.0)
    assert lb.lambda1 == lb.lambda2 == 1.0


def test_eta_zero_degenerates():
    lb = lambda_bounds_local(poly_abs(), [4.0], [1], 0, 0.0)
    assert lb.lambda1 == lb.lambda2 == 1.0


def test_poly_abs_known_bounds():
    # disk |t| <= 1 around 0: ratio (1+|t|)/1 ranges over [1, 2]
    lb = lambda_bounds_local(poly_abs(), [0.0], [1], 0, 1.0)
    assert lb.lambda1 == pytest.approx(1.0)
    assert lb.lambda2 == pytest.approx(2.0)


def test_negative_eta_rejected():
    with pytest.raises(InputError):
        lambda_bounds_local(poly_abs(), [0.0], [1], 0, -1.0)


def test_positivity_asserted():
    bad = WeightFunction("bad", lambda z: -np.ones(z.shape[0]))
    with pytest.raises(WeightError):
        bad(np.zeros(1))


def test_registry_and_unknown():
    assert build_weight("const", {"c": 2})(np.zeros(1)) == 2
    with pytest.raises(InputError):
        build_weight("nope")
    with pytest.raises(InputError):
        build_weight("const", {"bogus": 1})


def test_q_class_const_passes():
    rep = check_Q_class(const_weight(1.0), [1], [0, 1, 10], GridSpec(radius=10, points=100))
    assert rep.passed
    for row in rep.details["table"]:
        assert row["lambda1"] == row["lambda2"] == 1.0


def test_q_class_poly_abs_bounds():
    rep = check_Q_class(poly_abs(), [1], [1.0], GridSpec(radius=10, points=200))
    row = rep.details["table"][0]
    assert rep.passed
    assert row["lambda2"] <= 2.0 and row["lambda1"] >= 0.5


def test_q_class_recip_poly_fails_by_growth():
    rep = check_Q_class(build_weight("recip_poly"), [1], [1.0], GridSpec(radius=10, points=200))
    assert not rep.passed


def test_q_class_rejects_bad_etas():
    with pytest.raises(InputError):
        check_Q_class(poly_abs(), [1], [])


def test_equivalence_scaling():
    L = poly_abs()
    rep = check_equivalent(L, scaled(L, 3.0), GridSpec(radius=10, points=100))
    assert rep.details["theta1"] == pytest.approx(3.0) and rep.details["theta2"] == pytest.approx(3.0)
    assert rep.passed


def test_equivalence_shifted_poly():
    rep = check_equivalent(poly_abs(), poly_abs(c0=2.0), GridSpec(radius=10, points=200))
    assert rep.details["theta1"] >= 1.0 and rep.details["theta2"] <= 2.0 and rep.passed


def test_equivalence_exponential_fails():
    rep = check_equivalent(const_weight(1.0), build_weight("exp_abs"), GridSpec(radius=20, points=200))
    assert not rep.passed


def test_disk_offsets_nested_under_doubling():
    small = set(np.round(disk_offsets(4, 8), 12))
    big = set(np.round(disk_offsets(8, 16), 12))
    assert small <= big


finite = st.floats(-5, 5, allow_nan=False)


@given(st.builds(complex, finite, finite), st.floats(0.01, 1.5))
def test_lambda_monotone_in_eta(z, eta):
    L = poly_abs()
    a = lambda_bounds_local(L, [z], [1], 0, eta, radii=16, angles=32)
    # doubling eta with doubled radii and angles samples a superset of the smaller disk
    b = lambda_bounds_local(L, [z], [1], 0, 2 * eta, radii=32, angles=64)
    assert a.lambda1 <= 1 <= a.lambda2
    assert b.lambda2 >= a.lambda2 - 1e-12 and b.lambda1 <= a.lambda1 + 1e-12


@given(st.builds(complex, finite, finite))
def test_refinement_never_shrinks_bounds(z):
    L = poly_abs(p=2.0)
    coarse = lambda_bounds_local(L, [z], [1], 0, 1.0, radii=8, angles=16)
    fine = lambda_bounds_local(L, [z], [1], 0, 1.0, radii=16, angles=32)
    assert fine.lambda2 >= coarse.lambda2 - 1e-12 and fine.lambda1 <= coarse.lambda1 + 1e-12
