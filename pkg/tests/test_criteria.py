import math

import numpy as np
import pytest

from blidkit import criteria as C
from blidkit.core import exp_linear, gauss_square, polynomial, sin_linear
from blidkit.errors import InputError
from blidkit.grids import GridSpec
from blidkit.report import FAIL, INDETERMINATE, PASS
from blidkit.weights import const_weight

ONE, TWO = const_weight(1.0), const_weight(2.0)
EXP = exp_linear([1, 1])
SIN = sin_linear([1])
CONST = polynomial({"0": 5})
GAUSS = gauss_square(1)
SMALL = GridSpec(radius=10, points=48)


def test_circle_extreme_refines_between_samples():
    # |cos(theta - 0.001)| peaks between two of 8 angular samples
    fn = lambda t: np.abs(np.real(t * np.exp(-0.1234j)))
    val, where = C.circle_extreme(fn, 0j, 1.0, "max", angles=8)
    assert val == pytest.approx(1.0, abs=1e-9)


def test_local_derivative_exp_and_constant():
    rep = C.local_derivative_check(EXP, TWO, [1, 1], 0, 1.0, 2.0, SMALL)
    assert rep.constant == pytest.approx(math.e, rel=1e-9) and rep.verdict == PASS
    assert C.local_derivative_check(CONST, ONE, [1], 0, 1.0, 2.0, SMALL).constant == pytest.approx(1.0)


def test_local_derivative_first_order_exp():
    # d/db of e^{2t} keeps the same ratio
    rep = C.local_derivative_check(EXP, TWO, [1, 1], 1, 1.0, 2.0, GridSpec(radius=3, points=8))
    assert rep.constant == pytest.approx(math.e, rel=1e-8)


def test_local_derivative_validation():
    with pytest.raises(InputError):
        C.local_derivative_check(EXP, TWO, [1, 1], 0, 2.0, 1.0)
    with pytest.raises(InputError):
        C.local_derivative_check(EXP, TWO, [1, 1], -1, 1.0, 2.0)


def test_max_modulus_examples():
    assert C.max_modulus_check(EXP, TWO, [1, 1], zgrid=SMALL).constant == pytest.approx(math.e, rel=1e-9)
    assert C.max_modulus_check(CONST, ONE, [1], zgrid=SMALL).constant == pytest.approx(1.0)
    tr = C.with_trend(C.max_modulus_check, GAUSS, ONE, [1], zgrid=GridSpec(radius=4, points=48))
    assert tr["trend"] == "growing"


def test_hayman_examples():
    assert C.hayman_check(SIN, ONE, [1], 1, SMALL).constant == pytest.approx(1.0, rel=1e-9)
    assert C.hayman_check(CONST, ONE, [1], 0, SMALL).constant == 0.0
    # |f''/f'| ~ 2|z| for e^{z^2}: the constant roughly doubles with the grid radius
    tr = C.with_trend(C.hayman_check, GAUSS, ONE, [1], 1, zgrid=GridSpec(radius=4, points=48))
    assert tr["doubled"].constant > 1.8 * tr["report"].constant


def test_hayman_rejects_negative_N():
    with pytest.raises(InputError):
        C.hayman_check(SIN, ONE, [1], -1)


def test_min_max_examples():
    rep = C.min_max_check(EXP, TWO, [1, 1], 1.0, SMALL)
    assert rep.constant == pytest.approx(math.e ** 2, rel=1e-9)
    assert C.min_max_check(CONST, ONE, [1], 1.0, SMALL).constant == pytest.approx(1.0)
    tr = C.with_trend(C.min_max_check, GAUSS, ONE, [1], 1.0, zgrid=GridSpec(radius=4, points=48))
    assert tr["trend"] == "growing"


def test_min_max_skips_circles_through_zeros():
    rep = C.min_max_check(SIN, ONE, [1], 1.0, GridSpec(radius=4, points=64, kind="real"))
    assert rep.details["skipped"] > 0


def test_min_max_all_skipped_is_indeterminate():
    grid = GridSpec.of_points([[np.pi + 0.5], [0.5]])
    rep = C.min_max_check(SIN, ONE, [1], 0.5, grid)
    assert rep.verdict == INDETERMINATE


def test_log_derivative_real_axis_anchor():
    rep = C.log_derivative_check(SIN, ONE, [1], 0.5, GridSpec(radius=10, points=128, kind="real"))
    assert rep.constant == pytest.approx(1 / math.tan(0.5), rel=1e-6)


def test_log_derivative_complex_plane_sup():
    # off the real axis the sup of |cot t| outside the disks is coth(0.5), reached at k*pi +- 0.5i
    rep = C.log_derivative_check(SIN, ONE, [1], 0.5, GridSpec(radius=10, points=128))
    assert rep.constant == pytest.approx(1 / math.tanh(0.5), rel=1e-6)


def test_log_derivative_exp_and_constant():
    assert C.log_derivative_check(EXP, TWO, [1, 1], 0.5, SMALL).constant == pytest.approx(1.0, abs=1e-9)
    assert C.log_derivative_check(CONST, ONE, [1], 0.5, SMALL).constant == 0.0


def test_log_derivative_identically_zero_slice_skipped():
    F = polynomial({"1,0": 1})
    rep = C.log_derivative_check(F, ONE, [0, 1], 0.5, GridSpec.of_points([[0, 1], [1, 1]]))
    assert rep.details["skipped"] == 1 and rep.notes


def test_value_distribution_examples():
    assert C.value_distribution_check(SIN, ONE, [1], [0], 1.0, SMALL).constant == 1
    assert C.value_distribution_check(SIN, ONE, [1], [0], 4.0, GridSpec(radius=10, points=96)).constant == 3
    rep = C.value_distribution_check(CONST, ONE, [1], [7], 1.0, SMALL)
    assert rep.constant == 0 and rep.verdict == PASS


def test_value_distribution_identically_w_skipped():
    rep = C.value_distribution_check(CONST, ONE, [1], [5, 7], 1.0, GridSpec(radius=2, points=8))
    assert rep.details["skipped"] == 8 and rep.constant == 0
    rep = C.value_distribution_check(CONST, ONE, [1], [5], 1.0, GridSpec(radius=2, points=8))
    assert rep.verdict == INDETERMINATE


def test_growth_profile():
    assert C.growth_profile(SIN, [1], [0], 50)["type"] == pytest.approx(1.0, rel=0.05)
    assert C.growth_profile(EXP, [1, 1], [0, 0], 50)["type"] == pytest.approx(2.0, rel=0.05)
    assert C.growth_profile(CONST, [1], [0], 50)["type"] == pytest.approx(0.0, abs=1e-12)


def test_growth_profile_truncates_on_overflow():
    prof = C.growth_profile(GAUSS, [1], [0], 50)
    assert prof["notes"] and "overflow" in prof["notes"][0]
    assert prof["table"][-1][0] < 50


def test_constants_monotone_under_refinement():
    coarse, fine = GridSpec(radius=6, points=32), GridSpec(radius=6, points=64)
    for check, args in [(C.max_modulus_check, (SIN, ONE, [1])), (C.hayman_check, (GAUSS, ONE, [1], 1))]:
        assert check(*args, zgrid=fine).constant >= check(*args, zgrid=coarse).constant


def test_witnesses_reproduce_constants():
    grid = GridSpec(radius=6, points=32)
    rep = C.max_modulus_check(SIN, ONE, [1], 1.0, 2.0, grid)
    w = rep.witness
    assert C.circle_ratio(SIN, ONE, [1], w["z0"], w["t0"], 0, 1.0, 2.0) == pytest.approx(rep.constant, rel=1e-9)
    rep = C.hayman_check(GAUSS, ONE, [1], 2, grid)
    assert C.hayman_ratio(GAUSS, ONE, [1], rep.witness["z"], 2) == pytest.approx(rep.constant, rel=1e-9)
    rep = C.log_derivative_check(SIN, ONE, [1], 0.5, grid)
    w = rep.witness
    assert C.log_derivative_ratio(SIN, ONE, [1], w["z0"], w["t"]) == pytest.approx(rep.constant, rel=1e-9)
    rep = C.min_max_check(SIN, ONE, [1], 1.0, grid)
    w = rep.witness
    assert C.min_max_ratio(SIN, ONE, [1], w["z0"], w["t0"], 1.0) == pytest.approx(rep.constant, rel=1e-9)


def test_ceiling_turns_pass_into_fail():
    rep = C.max_modulus_check(GAUSS, ONE, [1], zgrid=GridSpec(radius=8, points=32), ceiling=10.0)
    assert rep.verdict == FAIL


def test_samples_table_covers_grid():
    rep = C.hayman_check(SIN, ONE, [1], 1, GridSpec(radius=3, points=10))
    assert len(rep.samples) == 10
