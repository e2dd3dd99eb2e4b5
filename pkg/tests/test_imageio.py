"""Tests for pseudocell.imageio module."""

import json
import tempfile

import numpy as np
import pytest
import tifffile

from pseudocell.errors import InputError
from pseudocell.imageio import (
    encode_pfm,
    read_gray_image,
    read_pfm,
    read_target_maps,
    read_volume,
    write_pfm,
    write_png,
    write_target_maps,
)
from pseudocell.model import TargetMaps


def test_pfm_header_and_row_order(tmp_path: "tempfile.TemporaryDirectory") -> None:
    img = np.array([[0.0, 0.25, 0.5], [0.75, 1.0, 2.0]])
    payload = encode_pfm(img)
    assert payload.startswith(b"Pf\n3 2\n-1.0\n")
    # bottom row is stored first
    first = np.frombuffer(payload[len(b"Pf\n3 2\n-1.0\n") :][:12], dtype="<f4")
    assert first.tolist() == [0.75, 1.0, 2.0]

    path = tmp_path / "a.pfm"
    write_pfm(img, str(path))
    assert np.array_equal(read_pfm(str(path)), img)


def test_pfm_color(tmp_path: "tempfile.TemporaryDirectory") -> None:
    rgb = np.zeros((4, 5, 3))
    rgb[0, 0] = (1.0, 0.5, 0.25)
    path = tmp_path / "c.pfm"
    write_pfm(rgb, str(path))
    out = read_pfm(str(path))
    assert out.shape == (4, 5, 3)
    assert out[0, 0].tolist() == [1.0, 0.5, 0.25]


def test_pfm_big_endian(tmp_path: "tempfile.TemporaryDirectory") -> None:
    path = tmp_path / "be.pfm"
    data = np.array([[1.5, -2.0]], dtype=">f4")
    path.write_bytes(b"Pf\n2 1\n1.0\n" + data.tobytes())
    assert read_pfm(str(path)).tolist() == [[1.5, -2.0]]


def test_pfm_truncated(tmp_path: "tempfile.TemporaryDirectory") -> None:
    path = tmp_path / "bad.pfm"
    path.write_bytes(b"Pf\n4 4\n-1.0\n" + b"\x00" * 10)
    with pytest.raises(InputError):
        read_pfm(str(path))
    path.write_bytes(b"P6\n4 4\n255\n")
    with pytest.raises(InputError):
        read_pfm(str(path))


def test_png_16bit_roundtrip(tmp_path: "tempfile.TemporaryDirectory") -> None:
    codes = np.array([[0, 1, 65535], [1000, 32768, 7]], dtype=np.float64)
    path = tmp_path / "g.png"
    write_png(codes / 65535.0, str(path), bitdepth=16)
    assert np.array_equal(read_gray_image(str(path)), codes / 65535.0)


def test_png_rejects_color_input(tmp_path: "tempfile.TemporaryDirectory") -> None:
    path = tmp_path / "rgb.png"
    write_png(np.zeros((3, 3, 3)), str(path))
    with pytest.raises(InputError):
        read_gray_image(str(path))


def test_tiff_read_and_volume(tmp_path: "tempfile.TemporaryDirectory") -> None:
    stack = np.arange(2 * 3 * 4, dtype=np.uint8).reshape(2, 3, 4)
    path = tmp_path / "stack.tif"
    tifffile.imwrite(str(path), stack)
    vol = read_volume(str(path))
    assert (vol.depth, vol.height, vol.width) == (2, 3, 4)
    assert np.array_equal(vol.data, stack / 255.0)


def test_volume_from_directory(tmp_path: "tempfile.TemporaryDirectory") -> None:
    for z in range(3):
        write_pfm(np.full((2, 2), float(z)), str(tmp_path / f"s{z}.pfm"))
    vol = read_volume(str(tmp_path))
    assert vol.depth == 3
    assert vol.slice(2).tolist() == [[2.0, 2.0], [2.0, 2.0]]


def test_unsupported_and_missing(tmp_path: "tempfile.TemporaryDirectory") -> None:
    with pytest.raises(InputError):
        read_gray_image(str(tmp_path / "missing.png"))
    other = tmp_path / "x.bmp"
    other.write_bytes(b"BM")
    with pytest.raises(InputError):
        read_gray_image(str(other))


def test_target_maps_sidecar(tmp_path: "tempfile.TemporaryDirectory") -> None:
    maps = TargetMaps(np.full((4, 4), 0.5), np.full((4, 4), 0.25), np.zeros((4, 4)), 128)
    path = tmp_path / "img_maps.pfm"
    write_target_maps(maps, str(path), image_id=7)

    meta = json.loads((tmp_path / "img_maps.json").read_text())
    assert meta == {"reference_side": 128, "image_id": 7}

    back = read_target_maps(str(path))
    assert back.reference_side == 128
    assert np.array_equal(back.heatmap, maps.heatmap)
    assert np.array_equal(back.height_map, maps.height_map)
    assert np.array_equal(back.width_map, maps.width_map)
