"""Tests for pseudocell.codec module."""

import math

import numpy as np
import pytest

from pseudocell.codec import (
    Blob,
    blob_centroid,
    box_kernel,
    connected_components,
    decode_detections,
    ellipse_mask,
    encode_centroid_heatmap,
    encode_size_maps,
    encode_targets,
    render_ellipse_map,
    round_half_up,
    threshold_heatmap,
)
from pseudocell.errors import InputError
from pseudocell.model import CellAnnotation, TargetMaps
from pseudocell.synth import SynthSpec, generate_synthetic


def test_round_half_up() -> None:
    assert round_half_up(2.5) == 3
    assert round_half_up(3.5) == 4
    assert round_half_up(-0.5) == 0
    assert round_half_up(1.49) == 1


def test_render_ellipse_map() -> None:
    small = render_ellipse_map([CellAnnotation(10, 10, 2, 2)], 20, 20)
    assert small.sum() == 5
    assert small[10, 10] == 1.0 and small[9, 10] == 1.0 and small[10, 11] == 1.0
    assert small[9, 9] == 0.0

    assert render_ellipse_map([], 8, 8).sum() == 0
    disk = render_ellipse_map([CellAnnotation(192, 192, 30, 30)], 384, 384)
    assert abs(disk.sum() - math.pi * 15**2) <= 30


def test_render_clips_at_border() -> None:
    out = render_ellipse_map([CellAnnotation(0, 0, 10, 10)], 16, 16)
    assert out[0, 0] == 1.0
    assert out.shape == (16, 16)


def test_box_kernel() -> None:
    assert box_kernel(30, 30) == (20, 20)
    assert box_kernel(1, 1) == (1, 1)
    assert box_kernel(40, 20) == (26, 13)
    with pytest.raises(InputError):
        box_kernel(0, 5)


def test_heatmap_peak() -> None:
    heatmap = encode_centroid_heatmap([CellAnnotation(192, 192, 30, 30)], 384, 384)
    assert heatmap[192, 192] == pytest.approx(1.0)
    assert heatmap.min() >= 0.0 and heatmap.max() <= 1.0
    assert encode_centroid_heatmap([], 16, 16).sum() == 0.0


def test_heatmap_peak_exceeds_threshold_for_small_cells() -> None:
    for w in range(8, 61, 4):
        for h in range(8, 61, 4):
            heatmap = encode_centroid_heatmap([CellAnnotation(100.0, 100.0, w, h)], 200, 200)
            assert heatmap.max() > 0.75, (w, h)


def test_size_maps() -> None:
    width_map, height_map = encode_size_maps([CellAnnotation(100, 150, 40, 20)], 384, 384)
    covered = width_map > 0
    assert covered.sum() == 20 * 10
    ys, xs = np.nonzero(covered)
    assert (xs.min(), xs.max(), ys.min(), ys.max()) == (90, 109, 145, 154)
    assert width_map[150, 100] == pytest.approx(40 / 384)
    assert height_map[150, 100] == pytest.approx(20 / 384)

    _, full = encode_size_maps([CellAnnotation(192, 192, 10, 384)], 384, 384)
    assert full.max() == 1.0

    empty_w, empty_h = encode_size_maps([], 8, 8)
    assert empty_w.sum() == 0 and empty_h.sum() == 0


def test_size_maps_last_writer_wins() -> None:
    cells = [CellAnnotation(20, 20, 16, 16), CellAnnotation(22, 20, 32, 16)]
    width_map, _ = encode_size_maps(cells, 64, 64)
    assert width_map[20, 20] == pytest.approx(32 / 384)


def test_threshold_is_strict() -> None:
    heatmap = np.array([[0.75, 0.76, 0.0]])
    assert threshold_heatmap(heatmap).tolist() == [[False, True, False]]
    assert not threshold_heatmap(np.zeros((4, 4))).any()
    values = np.random.default_rng(0).random((32, 32))
    assert np.all(threshold_heatmap(values, 0.6) >= threshold_heatmap(values, 0.8))


def test_connected_components() -> None:
    diagonal = np.zeros((4, 4), dtype=bool)
    diagonal[0, 0] = diagonal[1, 1] = True
    assert len(connected_components(diagonal)) == 1

    assert connected_components(np.zeros((4, 4), dtype=bool)) == []

    square = np.zeros((10, 10), dtype=bool)
    square[2:7, 3:8] = True
    blobs = connected_components(square)
    assert len(blobs) == 1 and blobs[0].m00 == 25


def test_blob_centroid_examples() -> None:
    block = np.zeros((10, 16), dtype=bool)
    block[4:7, 9:12] = True
    assert blob_centroid(connected_components(block)[0]) == (10.0, 5.0)

    assert blob_centroid(Blob(np.array([7]), np.array([2]))) == (7.0, 2.0)

    cx, cy = blob_centroid(Blob(np.array([0, 1, 0]), np.array([0, 0, 1])))
    assert cx == pytest.approx(1 / 3) and cy == pytest.approx(1 / 3)

    with pytest.raises(InputError):
        blob_centroid(Blob(np.array([], dtype=int), np.array([], dtype=int)))


def test_blob_centroid_matches_coordinate_mean() -> None:
    rng = np.random.default_rng(1234)
    for _ in range(1000):
        cell = CellAnnotation(
            float(rng.uniform(10, 54)),
            float(rng.uniform(10, 54)),
            float(rng.uniform(4, 20)),
            float(rng.uniform(4, 20)),
        )
        binary = ellipse_mask(cell, 64, 64)
        blobs = connected_components(binary)
        assert len(blobs) == 1
        ys, xs = np.nonzero(binary)
        cx, cy = blob_centroid(blobs[0])
        assert abs(cx - xs.mean()) < 1e-9
        assert abs(cy - ys.mean()) < 1e-9


def test_decode_single_cell() -> None:
    maps = encode_targets([CellAnnotation(100, 150, 40, 20)], 384, 384)
    detections = decode_detections(maps, 384, 384)
    assert len(detections) == 1
    det = detections[0]
    cx, cy = det.center
    assert abs(cx - 100) <= 1 and abs(cy - 150) <= 1
    assert det.w == pytest.approx(40) and det.h == pytest.approx(20)
    assert det.score == pytest.approx(1.0)


def test_decode_empty_and_two_cells() -> None:
    empty = TargetMaps(np.zeros((32, 32)), np.zeros((32, 32)), np.zeros((32, 32)))
    assert decode_detections(empty, 384, 384) == []

    cells = [CellAnnotation(60, 60, 30, 24), CellAnnotation(250, 300, 40, 40)]
    assert len(decode_detections(encode_targets(cells, 384, 384), 384, 384)) == 2


def test_decode_scales_by_image_size() -> None:
    maps = encode_targets([CellAnnotation(64, 64, 32, 16)], 128, 128, reference_side=128)
    det = decode_detections(maps, 256, 512)[0]
    assert det.w == pytest.approx(32 / 128 * 512)
    assert det.h == pytest.approx(16 / 128 * 256)


def test_round_trip_on_synthetic_images() -> None:
    spec = SynthSpec(n_min=1, n_max=10, size_min=10, size_max=60)
    total = recovered = false_detections = 0
    for seed in range(200):
        _, cells = generate_synthetic(SynthSpec(**{**spec.to_dict(), "seed": seed}))
        detections = decode_detections(encode_targets(cells, 384, 384), 384, 384)
        unmatched = list(detections)
        for cell in cells:
            total += 1
            for det in unmatched:
                dx, dy = det.center
                if (
                    math.hypot(dx - cell.cx, dy - cell.cy) <= 2.0
                    and abs(det.w - cell.w) <= 0.15 * cell.w
                    and abs(det.h - cell.h) <= 0.15 * cell.h
                ):
                    recovered += 1
                    unmatched.remove(det)
                    break
        false_detections += len(unmatched)
    assert recovered >= 0.99 * total
    assert false_detections == 0
