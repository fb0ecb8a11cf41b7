import math

import numpy as np
import pytest

from twistedhom import FormatError
from twistedhom.imaging import ScalarImage, SensorGrid
from twistedhom.io import (
    INVALID_TOKEN,
    encode_pgm,
    format_value,
    image_csv,
    image_pgm,
    mask_levels,
    read_image_csv,
    read_mask_pgm,
    read_pgm,
    read_sidecar,
    sidecar_text,
    write_image,
    write_mask_pgm,
)
from twistedhom.masks import PhaseMask

GRID = SensorGrid(3, 2, 1e-5)


def test_p2_with_comments():
    data = b"P2\n# made by hand\n3 2 # width height\n15\n0 1 2\n# mid-raster comment\n3 4 15\n"
    levels, maxval = read_pgm(data)
    assert maxval == 15
    assert levels.tolist() == [[0, 1, 2], [3, 4, 15]]


def test_p5_binary_body_may_contain_whitespace_bytes():
    body = bytes([10, 32, 9, 35, 0, 255])
    levels, maxval = read_pgm(b"P5\n#c\n3 2\n255\n" + body)
    assert levels.tolist() == [[10, 32, 9], [35, 0, 255]]


@pytest.mark.parametrize("plain", [False, True])
def test_round_trip(plain):
    lv = np.random.default_rng(0).integers(0, 256, (7, 11)).astype(np.uint8)
    back, maxval = read_pgm(encode_pgm(lv, plain))
    assert maxval == 255 and np.array_equal(back, lv)


@pytest.mark.parametrize("data", [
    b"P6\n1 1\n255\n\x00",
    b"P5\n2 2\n255\n\x00\x00",
    b"P2\n2 1\n255\n1\n",
    b"P2\n1 1\n255\n256\n",
    b"P2\n1 1\n300\n1\n",
    b"P2\n0 1\n255\n",
    b"P2\nx 1\n255\n1\n",
    b"P2\n2",
    b"P2\n1 1\n255\nabc\n",
    b"",
])
def test_malformed_pgm(data):
    with pytest.raises(FormatError):
        read_pgm(data)


def test_encode_rejects_bad_levels():
    with pytest.raises(FormatError):
        encode_pgm(np.array([[256]]))
    with pytest.raises(FormatError):
        encode_pgm(np.zeros(3))


def test_mask_pgm_round_trip(tmp_path):
    lv = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
    mask = PhaseMask.from_levels(lv, 1e-5)
    path = tmp_path / "m.pgm"
    write_mask_pgm(mask, path)
    back = read_mask_pgm(path.read_bytes(), 1e-5)
    assert np.array_equal(mask_levels(back), lv)
    assert np.allclose(back.data, math.pi * lv / 255)
    with pytest.raises(FormatError):
        mask_levels(PhaseMask.sector(0.5))


def test_mask_levels_from_phases():
    mask = PhaseMask.raster(np.array([[0.0, math.pi]]), 1e-5, phi_max=math.pi)
    assert mask_levels(mask).tolist() == [[0, 255]]


def test_read_mask_honours_maxval():
    mask = read_mask_pgm(b"P2\n2 1\n3\n0 3\n", 1e-5, phi_max=2.0)
    assert mask.data.tolist() == [[0.0, 2.0]]


def test_format_value():
    assert format_value(-0.0) == "0"
    assert format_value(0.1) == "0.1"
    assert format_value(1 / 3) == "0.333333333"
    assert format_value(1.23456789e-20) == "1.23456789e-20"


def _image(valid=None):
    vals = np.array([[0.0, -1.5, 2.0], [1e-9, 3.25, -0.0]])
    return ScalarImage(vals, "dimensionless", GRID, valid=valid, metadata={"state": "s", "m": "1", "extra": "x"})


def test_csv_and_invalid_token(tmp_path):
    valid = np.array([[True, True, False], [True, True, True]])
    img = _image(valid)
    text = image_csv(img).decode()
    assert text == f"0,-1.5,{INVALID_TOKEN}\n1e-09,3.25,0\n"
    path = tmp_path / "a.csv"
    write_image(img, path, "csv")
    vals, ok = read_image_csv(path)
    assert np.array_equal(ok, valid)
    assert np.allclose(vals, img.values)


def test_pgm_scaling():
    img = _image()
    levels, _ = read_pgm(image_pgm(img))
    assert levels.min() == 0 and levels.max() == 255
    assert levels[0, 1] == 0 and levels[1, 1] == 255
    flat = ScalarImage(np.ones(GRID.shape), "density", GRID)
    assert read_pgm(image_pgm(flat))[0].max() == 0


def test_sidecar_order_and_content(tmp_path):
    img = _image()
    text = sidecar_text(img, {"floor": 0.001, "engine": "e"}).decode()
    keys = [ln.split("=")[0] for ln in text.splitlines()]
    assert keys[:11] == ["state", "m", "mask", "window", "floor", "scale_min", "scale_max",
                         "I1_re", "I1_im", "I2_re", "I2_im"]
    assert "units" in keys and "extra" in keys and "engine" in keys
    path = tmp_path / "b.pgm"
    write_image(img, path, "pgm", {"floor": "0.001"})
    meta = read_sidecar(str(path) + ".meta.txt")
    assert meta["scale_min"] == "-1.5" and meta["scale_max"] == "3.25"
    assert meta["mask"] == "none" and meta["floor"] == "0.001"


def test_write_errors(tmp_path):
    with pytest.raises(FormatError):
        write_image(_image(), tmp_path / "x.tiff", "tiff")
    with pytest.raises(FormatError):
        write_image(_image(), tmp_path / "missing" / "x.csv", "csv")
    with pytest.raises(FormatError):
        sidecar_text(_image(), {"state": "a\nb"})
    with pytest.raises(FormatError):
        read_sidecar(tmp_path / "nope")
