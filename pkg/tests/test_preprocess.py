"""Tests for pseudocell.preprocess module."""

import numpy as np

from pseudocell.preprocess import edge_map, median_filter3, minmax_scale, preprocess


def test_median_filter3() -> None:
    constant = np.full((6, 6), 0.3)
    assert np.array_equal(median_filter3(constant), constant)

    spike = np.zeros((7, 7))
    spike[3, 3] = 1.0
    assert median_filter3(spike)[3, 3] == 0.0
    assert not median_filter3(np.zeros((5, 5))).any()


def test_median_filter3_keeps_values() -> None:
    img = np.random.default_rng(0).integers(0, 8, (12, 12)).astype(float)
    assert set(np.unique(median_filter3(img))) <= set(np.unique(img))


def test_median_filter3_replicates_edges() -> None:
    img = np.zeros((5, 5))
    img[0, :] = 1.0
    # top row: 6 of 9 replicated neighbours are ones
    assert np.all(median_filter3(img)[0] == 1.0)


def test_minmax_scale() -> None:
    out = minmax_scale(np.array([[2.0, 4.0, 6.0]]))
    assert out.tolist() == [[0.0, 0.5, 1.0]]
    assert not minmax_scale(np.full((3, 3), 7.0)).any()

    img = np.random.default_rng(1).normal(size=(8, 8))
    scaled = minmax_scale(img)
    assert scaled.min() == 0.0 and scaled.max() == 1.0
    assert np.array_equal(minmax_scale(scaled), scaled)


def test_preprocess_and_edges() -> None:
    img = np.zeros((16, 16))
    img[4:12, 4:12] = 5.0
    out = preprocess(img)
    assert out.min() == 0.0 and out.max() == 1.0

    edges = edge_map(out)
    assert edges.shape == (16, 16)
    assert edges.max() == 1.0
    assert edges[8, 8] == 0.0
    assert edges[0, 0] == 0.0
