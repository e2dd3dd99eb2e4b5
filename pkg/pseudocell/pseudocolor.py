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

"""Pseudo-colorization of gray images and perceived-brightness analysis."""

import functools
import logging
import os
from dataclasses import dataclass
from typing import Sequence, Union

import matplotlib
import numpy as np

from pseudocell.constants import COLORMAP_NAMES, HSP_WEIGHTS, LUT_SIZE
from pseudocell.dataset import atomic_write_text
from pseudocell.errors import InputError
from pseudocell.model import GrayImage, RgbImage, as_gray_image

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Colormap:
    """A named 256-entry RGB lookup table."""

    name: str
    lut: np.ndarray

    def __post_init__(self) -> None:
        lut = np.asarray(self.lut, dtype=np.float64)
        if lut.shape != (LUT_SIZE, 3):
            raise InputError(f"colormap {self.name}: LUT must be ({LUT_SIZE}, 3), got {lut.shape}")
        if not np.all(np.isfinite(lut)) or lut.min() < 0.0 or lut.max() > 1.0:
            raise InputError(f"colormap {self.name}: LUT components must lie in [0, 1]")
        lut.setflags(write=False)
        object.__setattr__(self, "lut", lut)


@functools.lru_cache(maxsize=None)
def _builtin_lut(name: str) -> np.ndarray:
    cmap = matplotlib.colormaps[name].resampled(LUT_SIZE)
    rgba = np.asarray(cmap(np.arange(LUT_SIZE)), dtype=np.float64)
    return np.clip(rgba[:, :3], 0.0, 1.0)


def load_colormap(name: str) -> Colormap:
    """Return one of the built-in colormaps, or a LUT CSV given by path."""
    if name in COLORMAP_NAMES:
        return Colormap(name, _builtin_lut(name))
    if name.lower().endswith(".csv") and os.path.isfile(name):
        return read_lut_csv(name)
    raise InputError(
        f"unknown colormap {name!r}, expected one of {', '.join(COLORMAP_NAMES)} or a LUT CSV"
    )


def read_lut_csv(path: str, name: str = "") -> Colormap:
    """Read 256 rows of ``r,g,b``."""
    try:
        lut = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except (OSError, ValueError) as e:
        raise InputError(f"{path}: unreadable LUT CSV: {e}")
    return Colormap(name or os.path.splitext(os.path.basename(path))[0], lut)


def write_lut_csv(cmap: Colormap, path: str) -> None:
    # repr() round-trips a double exactly
    lines = [",".join(repr(float(v)) for v in row) for row in cmap.lut]
    atomic_write_text(path, "\n".join(lines) + "\n")


def lut_indices(img: GrayImage) -> np.ndarray:
    return np.floor(img * (LUT_SIZE - 1) + 0.5).astype(np.intp)


def apply_colormap(img: GrayImage, cmap: Colormap) -> RgbImage:
    """Map every pixel v to ``lut[round(v * 255)]``."""
    img = as_gray_image(img)
    if img.min() < 0.0 or img.max() > 1.0:
        raise InputError("pseudo-colorization needs pixel values in [0, 1]")
    return cmap.lut[lut_indices(img)]


def perceived_brightness(
    rgb: Union[Sequence[float], np.ndarray]
) -> Union[float, np.ndarray]:
    """HSP brightness sqrt(0.299 R^2 + 0.587 G^2 + 0.114 B^2).

    Accepts one (R, G, B) triple or any array whose last axis holds RGB.
    """
    arr = np.asarray(rgb, dtype=np.float64)
    if arr.shape[-1] != 3:
        raise InputError(f"expected RGB components on the last axis, got shape {arr.shape}")
    brightness = np.clip(np.sqrt(np.square(arr) @ np.asarray(HSP_WEIGHTS)), 0.0, 1.0)
    if brightness.ndim == 0:
        return float(brightness)
    return brightness


def brightness_curve(cmap: Colormap) -> np.ndarray:
    return np.asarray(perceived_brightness(cmap.lut))


def colormap_strip(cmap: Colormap, height: int = 32) -> RgbImage:
    """A (height, 256, 3) gradient strip of the colormap, low to high."""
    return np.repeat(cmap.lut[np.newaxis, :, :], height, axis=0)


def write_brightness_csv(cmap: Colormap, path: str) -> None:
    curve = brightness_curve(cmap)
    lines = ["index,brightness"] + [f"{i},{float(b)!r}" for i, b in enumerate(curve)]
    atomic_write_text(path, "\n".join(lines) + "\n")
