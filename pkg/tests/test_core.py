import numpy as np
import pytest
from hypothesis import given, strategies as st

from blidkit.core import (as_direction, as_point, build_fixture, canonical_product, canonical_tail_bound,
                          exp_linear, fixture_names, gauss_square, linear_combination, list_fixtures,
                          make_slice, parse_complex, polynomial, register_fixture, sin_linear)
from blidkit.errors import FixtureError, InputError

finite = st.floats(-3, 3, allow_nan=False)
cplx = st.builds(complex, finite, finite)


def test_parse_complex_forms():
    assert parse_complex(2) == 2
    assert parse_complex("1+2j") == 1 + 2j
    assert parse_complex([0.5, -1]) == 0.5 - 1j
    with pytest.raises(InputError):
        parse_complex("abc")


def test_direction_rejects_zero_and_wrong_length():
    with pytest.raises(InputError):
        as_direction([0, 0])
    with pytest.raises(InputError):
        as_direction([1, 0], 3)
    assert as_direction([3, 4j]).norm == pytest.approx(5.0)


def test_as_point_checks_dimension():
    with pytest.raises(InputError):
        as_point([1, 2], 3)


def test_exp_linear_closed_form():
    F = exp_linear([1, 1])
    assert F.evaluate([0.3, 0.2]) == pytest.approx(np.exp(0.5))
    # directional derivative along (1,1) is 2^m F
    assert F.exact_directional_derivative([0.3, 0.2], [1, 1], 3) == pytest.approx(8 * np.exp(0.5))


def test_sin_linear_values():
    F = sin_linear([1])
    z = np.array([[0.0], [np.pi / 2], [1j]])
    assert np.allclose(F.evaluate(z), [0, 1, 1j * np.sinh(1)])


def test_polynomial_oracle_matches_finite_expansion():
    F = polynomial({"3,1": 1, "1,2": -2, "0,0": 5})
    z = [1 + 1j, -0.5]
    assert F.evaluate(z) == pytest.approx((1 + 1j) ** 3 * -0.5 - 2 * (1 + 1j) * 0.25 + 5)
    # sympy-derived derivatives of z1^3 z2 - 2 z1 z2^2 + 5 along (1,-1)
    expected = {1: -0.5 - 7j, 2: -11 - 19j, 3: -33 - 18j, 4: -24, 5: 0}
    for m, v in expected.items():
        assert F.exact_directional_derivative(z, [1, -1], m) == pytest.approx(v, abs=1e-12)


def test_polynomial_rejects_mixed_lengths():
    with pytest.raises(FixtureError):
        polynomial({"1": 1, "1,1": 2})


def test_gauss_square_oracle():
    F = gauss_square(2)
    z = [0.5 + 1j / 3, 0]
    # sympy: d^4/dt^4 exp((z1+t)^2) at t=0
    assert F.exact_directional_derivative(z, [1, 0], 4) == pytest.approx(12.100171239672065 + 25.445891168202298j)


def test_canonical_product_vanishes_at_generated_zeros():
    F = canonical_product(genus=1, scale=2.0, exponent=1.0, factors=50)
    assert abs(F.evaluate([2.0])) < 1e-12
    assert abs(F.evaluate([6.0])) < 1e-12
    assert abs(F.evaluate([1.0])) > 1e-3


def test_canonical_product_divergent_sequence_rejected():
    with pytest.raises(FixtureError):
        canonical_product(genus=0, exponent=1.0)


def test_canonical_tail_bound_small_inside_and_infinite_far_out():
    F = canonical_product(genus=1, scale=1.0, exponent=1.0, factors=200)
    assert canonical_tail_bound(F, 1.0) < 0.02
    assert canonical_tail_bound(F, 150.0) == float("inf")


def test_canonical_product_truncation_agrees_with_sine_product():
    # prod_{k} (1 - z^2/k^2) with symmetric zeros = sin(pi z)/(pi z)
    ks = np.arange(1, 4001)
    F = canonical_product(genus=0, zeros=np.concatenate([ks, -ks]).tolist())
    z = 0.37 + 0.2j
    assert F.evaluate([z]) == pytest.approx(np.sin(np.pi * z) / (np.pi * z), rel=1e-3)


def test_registry_contents_and_custom_entries():
    names = fixture_names()
    for name in ("exp_linear", "sin_linear", "gauss_square", "polynomial"):
        assert name in names
    assert all(r["kind"] == "built-in" for r in list_fixtures())
    register_fixture("quad", "polynomial", {"coeffs": [[[2], 1], [[0], -1]]})
    rows = {r["name"]: r for r in list_fixtures()}
    assert rows["quad"]["kind"] == "custom"
    assert build_fixture("quad").evaluate([3.0]) == pytest.approx(8.0)
    with pytest.raises(FixtureError):
        register_fixture("sin_linear", "polynomial", {"coeffs": [[[1], 1]]})


def test_unknown_fixture():
    with pytest.raises(FixtureError):
        build_fixture("nope")


def test_separable_and_composite():
    F = build_fixture("separable_product", {"factors": [{"kind": "exp", "a": 1}, {"kind": "sin", "a": 2}]})
    assert F.evaluate([0.1, 0.2]) == pytest.approx(np.exp(0.1) * np.sin(0.4))
    G = build_fixture("composite_sum", {"factor": {"kind": "cos", "a": 1}, "n": 3})
    assert G.evaluate([0.1, 0.2, 0.3]) == pytest.approx(np.cos(0.6))


@given(cplx, cplx, cplx)
def test_slice_is_restriction(z1, z2, t):
    F = sin_linear([1, 2])
    g = make_slice(F, [z1, z2], [1, 1j])
    assert g(t) == pytest.approx(F.evaluate([z1 + t, z2 + 1j * t]))


@given(cplx, cplx)
def test_linear_combination_is_pointwise(z1, z2):
    F, G = exp_linear([1, 0]), sin_linear([0, 1])
    H = linear_combination([(2, F), (-1j, G)])
    assert H.evaluate([z1, z2]) == pytest.approx(2 * F.evaluate([z1, z2]) - 1j * G.evaluate([z1, z2]))


def test_vectorised_evaluation_shape():
    F = exp_linear([1, 1])
    pts = np.zeros((3, 4, 2), dtype=complex)
    assert F.evaluate(pts).shape == (3, 4)
