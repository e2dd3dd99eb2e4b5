#!/usr/bin/env python3
# -*- coding:UTF-8 -*-
#
# Copyright (C) 2026 Junbo Zheng. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

"""2.5D context front-end: adjacent-slice triplets and the ContextBlock forward pass.

For a triplet ``(prev, mid, next)`` the block produces three channels::

    [ sigmoid(conv1x1(conv3x3(prev)) * mid + mid),
      mid,
      sigmoid(conv1x1(conv3x3(next)) * mid + mid) ]

Both neighbour branches share one set of weights. Convolutions are
cross-correlations with stride 1 and zero padding, so dimensions are kept.
"""

import json
import logging
import os
from dataclasses import dataclass
from typing import Any, List, Mapping, Tuple

import numpy as np
from scipy import ndimage
from scipy.special import expit

from pseudocell.constants import CONTEXT_FILTERS
from pseudocell.dataset import run_pool
from pseudocell.errors import InputError
from pseudocell.model import GrayImage, RgbImage, VolumeStack, as_gray_image, require_same_shape

logger = logging.getLogger(__name__)

Triplet = Tuple[GrayImage, GrayImage, GrayImage]


def _finite(arr: np.ndarray, name: str) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise InputError(f"context weights: {name} contains non-finite values")
    return arr


@dataclass(frozen=True)
class ContextWeights:
    """Ten 3x3 filters with biases, fused by one 1x1 filter over ten channels."""

    kernels: np.ndarray
    biases: np.ndarray
    fuse_kernel: np.ndarray
    fuse_bias: float = 0.0

    def __post_init__(self) -> None:
        kernels = np.asarray(self.kernels, dtype=np.float64)
        if kernels.shape == (CONTEXT_FILTERS, 3, 3, 1):
            kernels = kernels[..., 0]
        if kernels.shape != (CONTEXT_FILTERS, 3, 3):
            raise InputError(
                f"context weights: conv3x3 kernels must be ({CONTEXT_FILTERS}, 3, 3), "
                f"got {kernels.shape}"
            )
        biases = np.asarray(self.biases, dtype=np.float64)
        if biases.shape != (CONTEXT_FILTERS,):
            raise InputError(
                f"context weights: conv3x3 biases must be ({CONTEXT_FILTERS},), got {biases.shape}"
            )
        fuse = np.asarray(self.fuse_kernel, dtype=np.float64)
        if fuse.shape == (1, 1, CONTEXT_FILTERS):
            fuse = fuse.reshape(CONTEXT_FILTERS)
        if fuse.shape != (CONTEXT_FILTERS,):
            raise InputError(
                f"context weights: conv1x1 kernel must be ({CONTEXT_FILTERS},), got {fuse.shape}"
            )
        fuse_bias = float(self.fuse_bias)
        if not np.isfinite(fuse_bias):
            raise InputError("context weights: conv1x1 bias is not finite")
        object.__setattr__(self, "kernels", _finite(kernels, "conv3x3 kernels"))
        object.__setattr__(self, "biases", _finite(biases, "conv3x3 biases"))
        object.__setattr__(self, "fuse_kernel", _finite(fuse, "conv1x1 kernel"))
        object.__setattr__(self, "fuse_bias", fuse_bias)

    @classmethod
    def zeros(cls) -> "ContextWeights":
        return cls(
            np.zeros((CONTEXT_FILTERS, 3, 3)),
            np.zeros(CONTEXT_FILTERS),
            np.zeros(CONTEXT_FILTERS),
            0.0,
        )

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any], path: str = "<weights>") -> "ContextWeights":
        try:
            conv3x3 = doc["conv3x3"]
            conv1x1 = doc["conv1x1"]
            return cls(
                np.asarray(conv3x3["kernels"], dtype=np.float64),
                np.asarray(conv3x3["biases"], dtype=np.float64),
                np.asarray(conv1x1["kernel"], dtype=np.float64),
                float(conv1x1["bias"]),
            )
        except InputError as e:
            raise InputError(f"{path}: {e}")
        except (KeyError, TypeError) as e:
            raise InputError(f"{path}: malformed context weights ({e!r})")
        except ValueError as e:
            raise InputError(f"{path}: non-numeric context weights ({e})")

    @classmethod
    def from_json(cls, text: str, path: str = "<weights>") -> "ContextWeights":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise InputError(f"{path}: invalid JSON: {e}")
        if not isinstance(doc, dict):
            raise InputError(f"{path}: expected a JSON object")
        return cls.from_dict(doc, path)

    def to_dict(self) -> dict:
        return {
            "conv3x3": {"kernels": self.kernels.tolist(), "biases": self.biases.tolist()},
            "conv1x1": {"kernel": self.fuse_kernel.tolist(), "bias": self.fuse_bias},
        }


def load_context_weights(path: str) -> ContextWeights:
    if not os.path.isfile(path):
        raise InputError(f"{path}: no such weights file")
    with open(path, "r", encoding="utf-8") as f:
        return ContextWeights.from_json(f.read(), path)


def slice_triplets(vol: VolumeStack) -> List[Triplet]:
    """One ``(S(z-1), S(z), S(z+1))`` per slice, neighbours clamped at the ends."""
    if vol.depth < 1:
        raise InputError("volume is empty")
    last = vol.depth - 1
    return [
        (vol.slice(max(z - 1, 0)), vol.slice(z), vol.slice(min(z + 1, last)))
        for z in range(vol.depth)
    ]


def views_2d(img: GrayImage) -> Triplet:
    img = as_gray_image(img)
    return (img, img, img)


def _context_response(neighbour: GrayImage, weights: ContextWeights) -> np.ndarray:
    # conv3x3 then conv1x1, both linear, so fuse per filter
    out = np.full(neighbour.shape, weights.fuse_bias, dtype=np.float64)
    for k in range(CONTEXT_FILTERS):
        feature = ndimage.correlate(neighbour, weights.kernels[k], mode="constant", cval=0.0)
        out += weights.fuse_kernel[k] * (feature + weights.biases[k])
    return out


def context_block_forward(triplet: Triplet, weights: ContextWeights) -> RgbImage:
    prev, mid, nxt = (as_gray_image(s, f"slice {i}") for i, s in enumerate(triplet))
    require_same_shape(prev, mid, "context triplet")
    require_same_shape(nxt, mid, "context triplet")

    out = np.empty(mid.shape + (3,), dtype=np.float64)
    out[..., 0] = expit(_context_response(prev, weights) * mid + mid)
    out[..., 1] = mid
    out[..., 2] = expit(_context_response(nxt, weights) * mid + mid)
    return out


def forward_volume(
    vol: VolumeStack, weights: ContextWeights, workers: int = 1
) -> List[RgbImage]:
    """Context block output for every slice of ``vol``, in depth order."""
    triplets = slice_triplets(vol)
    logger.debug("context forward over %d slices with %d workers", len(triplets), workers)
    return run_pool(lambda t: context_block_forward(t, weights), triplets, workers)
