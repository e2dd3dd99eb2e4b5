"""Tests for pseudocell.context module."""

import json
import tempfile

import numpy as np
import pytest
from scipy.special import expit

from pseudocell.context import (
    ContextWeights,
    context_block_forward,
    forward_volume,
    load_context_weights,
    slice_triplets,
    views_2d,
)
from pseudocell.errors import InputError
from pseudocell.model import VolumeStack


def _random_weights(rng: np.random.Generator) -> ContextWeights:
    return ContextWeights(
        rng.normal(0, 0.3, (10, 3, 3)),
        rng.normal(0, 0.1, 10),
        rng.normal(0, 0.3, 10),
        float(rng.normal(0, 0.1)),
    )


def test_slice_triplets_clamp() -> None:
    single = VolumeStack(np.ones((1, 4, 4)))
    triplets = slice_triplets(single)
    assert len(triplets) == 1
    assert all(np.array_equal(s, single.slice(0)) for s in triplets[0])

    vol = VolumeStack(np.arange(3 * 2 * 2, dtype=float).reshape(3, 2, 2))
    triplets = slice_triplets(vol)
    assert len(triplets) == 3
    prev, mid, nxt = triplets[1]
    assert np.array_equal(prev, vol.slice(0))
    assert np.array_equal(mid, vol.slice(1))
    assert np.array_equal(nxt, vol.slice(2))
    assert np.array_equal(triplets[0][0], vol.slice(0))
    assert np.array_equal(triplets[2][2], vol.slice(2))


def test_zero_weights() -> None:
    zero = np.zeros((5, 5))
    out = context_block_forward((zero, zero, zero), ContextWeights.zeros())
    assert out.shape == (5, 5, 3)
    assert np.all(out[..., 0] == 0.5)
    assert np.all(out[..., 1] == 0.0)
    assert np.all(out[..., 2] == 0.5)

    img = np.random.default_rng(3).random((6, 7))
    out = context_block_forward(views_2d(img), ContextWeights.zeros())
    assert np.allclose(out[..., 0], expit(img))
    assert np.array_equal(out[..., 1], img)
    assert np.allclose(out[..., 2], expit(img))


def test_middle_channel_is_identity() -> None:
    rng = np.random.default_rng(7)
    for _ in range(100):
        weights = _random_weights(rng)
        triplet = (rng.random((9, 8)), rng.random((9, 8)), rng.random((9, 8)))
        out = context_block_forward(triplet, weights)
        assert np.array_equal(out[..., 1], triplet[1])
        assert np.all((out[..., 0] > 0.0) & (out[..., 0] < 1.0))
        assert np.all((out[..., 2] > 0.0) & (out[..., 2] < 1.0))


def test_single_filter_matches_manual_correlation() -> None:
    kernels = np.zeros((10, 3, 3))
    kernels[0] = np.arange(9, dtype=float).reshape(3, 3)
    fuse = np.zeros(10)
    fuse[0] = 1.0
    weights = ContextWeights(kernels, np.zeros(10), fuse, 0.0)

    prev = np.zeros((5, 5))
    prev[2, 2] = 1.0
    mid = np.ones((5, 5))
    out = context_block_forward((prev, mid, np.zeros((5, 5))), weights)
    # correlating a unit impulse yields the flipped kernel around it
    expected = np.zeros((5, 5))
    expected[1:4, 1:4] = kernels[0][::-1, ::-1]
    assert np.allclose(out[..., 0], expit(expected * mid + mid))
    assert np.allclose(out[..., 2], expit(mid))


def test_errors() -> None:
    with pytest.raises(InputError):
        context_block_forward(
            (np.zeros((4, 4)), np.zeros((4, 5)), np.zeros((4, 4))), ContextWeights.zeros()
        )
    with pytest.raises(InputError):
        ContextWeights(np.zeros((9, 3, 3)), np.zeros(10), np.zeros(10), 0.0)
    with pytest.raises(InputError):
        ContextWeights(np.zeros((10, 3, 3)), np.zeros(10), np.zeros(11), 0.0)


def test_weights_json(tmp_path: "tempfile.TemporaryDirectory") -> None:
    weights = _random_weights(np.random.default_rng(11))
    path = tmp_path / "w.json"
    path.write_text(json.dumps(weights.to_dict()))
    loaded = load_context_weights(str(path))
    assert np.array_equal(loaded.kernels, weights.kernels)
    assert np.array_equal(loaded.fuse_kernel, weights.fuse_kernel)
    assert loaded.fuse_bias == weights.fuse_bias

    nested = {
        "conv3x3": {"kernels": np.zeros((10, 3, 3, 1)).tolist(), "biases": [0.0] * 10},
        "conv1x1": {"kernel": np.zeros((1, 1, 10)).tolist(), "bias": 0.0},
    }
    assert ContextWeights.from_json(json.dumps(nested)).kernels.shape == (10, 3, 3)

    with pytest.raises(InputError):
        ContextWeights.from_json('{"conv3x3": {}}')


def test_forward_volume() -> None:
    vol = VolumeStack(np.random.default_rng(5).random((4, 6, 6)))
    weights = _random_weights(np.random.default_rng(6))
    outputs = forward_volume(vol, weights, workers=2)
    assert len(outputs) == 4
    for z, out in enumerate(outputs):
        assert np.array_equal(out[..., 1], vol.slice(z))
