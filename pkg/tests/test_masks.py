import math

import numpy as np
import pytest

from twistedhom import DomainError
from twistedhom.masks import PhaseMask, builtin_bitmaps


def test_uniform():
    m = PhaseMask.uniform(0.7)
    assert m.phase(1.0, 2.0) == 0.7
    assert m.phase(np.zeros((3, 4)), 0.0).shape == (3, 4)


def test_sector_membership():
    m = PhaseMask.sector(0.25)
    assert m.phase(1.0, 1.0) == math.pi
    assert m.phase(-1.0, 1.0) == 0.0
    assert m.phase(1.0, -1e-9) == 0.0
    assert m.phase(1.0, 0.0) == math.pi
    rotated = PhaseMask.sector(0.25, step=1.0, start=math.pi, base=0.5)
    assert rotated.phase(-1.0, -1.0) == 1.5
    assert rotated.phase(1.0, 1.0) == 0.5


@pytest.mark.parametrize("frac", [-0.1, 1.1])
def test_sector_rejects_fraction(frac):
    with pytest.raises(DomainError):
        PhaseMask.sector(frac)


def test_checkerboard_parity():
    m = PhaseMask.checkerboard(1.0, step=2.0, origin=(0.0, 0.0))
    assert m.phase(0.5, 0.5) == 0.0
    assert m.phase(1.5, 0.5) == 2.0
    assert m.phase(-0.5, 0.5) == 2.0
    assert m.phase(-0.5, -0.5) == 0.0
    with pytest.raises(DomainError):
        PhaseMask.checkerboard(0.0)


def test_raster_orientation_and_centres(backend):
    data = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
    m = PhaseMask.raster(data, pitch=1.0, center=(10.0, 20.0))
    # row 0 is the top row (largest y)
    assert m.phase(9.0, 20.5) == 1.0
    assert m.phase(11.0, 19.5) == 6.0
    assert m.phase(10.0, 20.0) == pytest.approx(3.5)
    assert m.phase(20.0, 20.0) == 0.0


def test_raster_is_read_only_copy():
    data = np.zeros((2, 2))
    m = PhaseMask.raster(data, 1.0)
    data[0, 0] = 9.0
    assert m.data[0, 0] == 0.0
    with pytest.raises(ValueError):
        m.data[0, 0] = 1.0


@pytest.mark.parametrize("bad", [np.zeros(3), np.zeros((0, 2)), np.array([[np.nan]])])
def test_raster_validation(bad):
    with pytest.raises(DomainError):
        PhaseMask.raster(bad, 1.0)


def test_from_levels_mapping():
    m = PhaseMask.from_levels(np.array([[0, 255], [51, 102]]), 1.0)
    assert np.allclose(m.data, [[0.0, math.pi], [0.2 * math.pi, 0.4 * math.pi]])
    assert m.levels.dtype == np.uint8
    m = PhaseMask.from_levels(np.array([[0, 15]]), 1.0, maxval=15, phi_max=2.0)
    assert m.levels is None and m.data[0, 1] == 2.0
    with pytest.raises(DomainError):
        PhaseMask.from_levels(np.array([[300]]), 1.0)


def test_from_bitmap():
    m = PhaseMask.from_bitmap(np.array([[True, False]]), 1.0, step=1.5)
    assert m.data.tolist() == [[1.5, 0.0]]


def test_shifted_applies_everywhere():
    m = PhaseMask.raster(np.ones((2, 2)), 1.0).shifted(0.25).shifted(0.25)
    assert m.phase(0.5, 0.5) == pytest.approx(1.5)
    assert m.phase(50.0, 50.0) == pytest.approx(0.5)
    assert PhaseMask.sector(0.5).shifted(1.0).phase(0.0, 1.0) == pytest.approx(math.pi + 1.0)


def test_describe_is_stable():
    a = PhaseMask.from_levels(np.arange(6).reshape(2, 3), 1e-5)
    b = PhaseMask.from_levels(np.arange(6).reshape(2, 3), 1e-5)
    c = PhaseMask.from_levels(np.arange(6).reshape(2, 3)[::-1], 1e-5)
    assert a.describe() == b.describe() != c.describe()
    assert a.describe().startswith("raster(3x2,")
    assert PhaseMask.sector(0.25).describe() == "sector(base=0.0,fraction=0.25,start=0.0,step=3.141592653589793)"


def test_unknown_kind_and_nonfinite_param():
    with pytest.raises(DomainError):
        PhaseMask("spiral")
    with pytest.raises(DomainError):
        PhaseMask.uniform(math.inf)


def test_builtin_bitmaps():
    maps = builtin_bitmaps(50, 40, cell=4)
    assert set(maps) == {"checkerboard", "quadrant", "half", "cross", "rings"}
    for bits in maps.values():
        assert bits.shape == (40, 50) and bits.dtype == bool
        assert 0 < bits.sum() < bits.size
    cb = maps["checkerboard"]
    assert not cb[0, 0] and cb[0, 4] and cb[4, 0] and not cb[4, 4]
    assert maps["half"][0].all() and not maps["half"][-1].any()
    assert maps["quadrant"][0, -1] and not maps["quadrant"][0, 0]
