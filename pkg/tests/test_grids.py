import numpy as np
import pytest

from blidkit.errors import InputError
from blidkit.grids import GridSpec, disk_points


def test_points_inside_polydisc():
    z = GridSpec(radius=3, points=100).points_for(2)
    assert z.shape == (100, 2) and np.all(np.abs(z) <= 3 + 1e-12)


def test_real_grid_is_real():
    z = GridSpec(radius=5, points=50, kind="real").points_for(1)
    assert np.all(z.imag == 0) and np.all(np.abs(z) <= 5)


def test_seed_reproducible_and_prefix_property():
    a = GridSpec(points=64, seed=3).points_for(2)
    b = GridSpec(points=64, seed=3).points_for(2)
    c = GridSpec(points=128, seed=3).points_for(2)
    assert np.array_equal(a, b)
    assert np.array_equal(c[:64], a)
    assert not np.array_equal(GridSpec(points=64, seed=4).points_for(2), a)


def test_explicit_grid_roundtrip():
    g = GridSpec.of_points([[0, 1j], [2, 3]])
    again = GridSpec.from_dict(g.to_dict())
    assert np.array_equal(again.points_for(2), g.points_for(2))


@pytest.mark.parametrize("bad", [{"radius": -1}, {"radius": 0}, {"points": 0}, {"kind": "cube"},
                                 {"per_slice": 0}, {"radius": float("nan")}])
def test_validation(bad):
    with pytest.raises(InputError):
        GridSpec(**bad)


def test_doubled_and_refined():
    g = GridSpec(radius=4, points=10)
    assert g.doubled().radius == 8 and g.refined().points == 20


def test_per_slice_samples_stay_in_region():
    z0, t0 = GridSpec(radius=5, points=20, per_slice=4).samples(2, [1, 1])
    pts = z0 + t0[:, None] * np.array([1, 1])
    assert np.all(np.abs(pts) <= 5 + 1e-9)


def test_disk_points():
    t = disk_points(200, 2.0, 0)
    assert np.all(np.abs(t) <= 2.0)
