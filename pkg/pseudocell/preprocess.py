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

"""Image preprocessing applied before masking and pseudo-colorization."""

import numpy as np
from scipy import ndimage

from pseudocell.model import GrayImage, as_gray_image


def median_filter3(img: GrayImage) -> GrayImage:
    """3x3 median with edge replication."""
    return ndimage.median_filter(as_gray_image(img), size=3, mode="nearest")


def minmax_scale(img: GrayImage) -> GrayImage:
    """Scale to [0, 1]; a constant image maps to all zeros."""
    img = as_gray_image(img)
    lo, hi = float(img.min()), float(img.max())
    if hi <= lo:
        return np.zeros_like(img)
    return (img - lo) / (hi - lo)


def preprocess(img: GrayImage) -> GrayImage:
    return minmax_scale(median_filter3(img))


def edge_map(img: GrayImage) -> GrayImage:
    """Min-max scaled Sobel gradient magnitude."""
    img = as_gray_image(img)
    gx = ndimage.sobel(img, axis=1, mode="nearest")
    gy = ndimage.sobel(img, axis=0, mode="nearest")
    return minmax_scale(np.hypot(gx, gy))
