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

"""Domain types shared by every module.

Rasters are plain float64 numpy arrays: a gray image is ``(H, W)``, a color
image ``(H, W, 3)``. Coordinates follow the raster: x is the column index,
y the row index, origin at the center of the top-left pixel.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from pseudocell.constants import REFERENCE_SIDE
from pseudocell.errors import InputError

GrayImage = NDArray[np.float64]
RgbImage = NDArray[np.float64]
Box = Tuple[float, float, float, float]


def as_gray_image(data: ArrayLike, name: str = "image") -> GrayImage:
    """Validate a 2-D finite raster and return it as float64."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise InputError(f"{name}: expected a 2-D gray raster, got shape {arr.shape}")
    if arr.size == 0:
        raise InputError(f"{name}: empty raster")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name}: raster contains non-finite values")
    return arr


def as_rgb_image(data: ArrayLike, name: str = "image") -> RgbImage:
    """Validate an (H, W, 3) raster with channels in [0, 1]."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InputError(f"{name}: expected an (H, W, 3) raster, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InputError(f"{name}: empty raster")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name}: raster contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise InputError(f"{name}: color channels must lie in [0, 1]")
    return arr


def require_same_shape(a: np.ndarray, b: np.ndarray, what: str = "inputs") -> None:
    if a.shape != b.shape:
        raise InputError(f"{what}: dimension mismatch {a.shape} vs {b.shape}")


@dataclass(frozen=True)
class CellAnnotation:
    """Centroid and extent of one cell, in pixels."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for key in ("cx", "cy", "w", "h"):
            if not math.isfinite(getattr(self, key)):
                raise InputError(f"cell {key} must be finite")
        if self.w <= 0 or self.h <= 0:
            raise InputError(f"cell w and h must be > 0, got w={self.w} h={self.h}")

    @property
    def area(self) -> float:
        return self.w * self.h

    def box(self) -> Box:
        return (self.cx - self.w / 2.0, self.cy - self.h / 2.0, self.w, self.h)

    def inside(self, height: int, width: int) -> bool:
        return 0.0 <= self.cx <= width - 1 and 0.0 <= self.cy <= height - 1


@dataclass(frozen=True)
class Detection:
    """Top-left corner box with a confidence score."""

    x_min: float
    y_min: float
    w: float
    h: float
    score: float = 1.0

    def __post_init__(self) -> None:
        for key in ("x_min", "y_min", "w", "h", "score"):
            if not math.isfinite(getattr(self, key)):
                raise InputError(f"detection {key} must be finite")
        if self.w < 0 or self.h < 0:
            raise InputError(f"detection extents must be >= 0, got w={self.w} h={self.h}")
        if not 0.0 <= self.score <= 1.0:
            raise InputError(f"detection score must lie in [0, 1], got {self.score}")

    @property
    def area(self) -> float:
        return self.w * self.h

    def box(self) -> Box:
        return (self.x_min, self.y_min, self.w, self.h)

    @property
    def center(self) -> Tuple[float, float]:
        return (self.x_min + self.w / 2.0, self.y_min + self.h / 2.0)


@dataclass(frozen=True)
class TargetMaps:
    """Centroid heatmap plus height and width maps of one image."""

    heatmap: GrayImage
    height_map: GrayImage
    width_map: GrayImage
    reference_side: int = REFERENCE_SIDE

    def __post_init__(self) -> None:
        heatmap = as_gray_image(self.heatmap, "heatmap")
        height_map = as_gray_image(self.height_map, "height_map")
        width_map = as_gray_image(self.width_map, "width_map")
        require_same_shape(heatmap, height_map, "target maps")
        require_same_shape(heatmap, width_map, "target maps")
        if heatmap.min() < 0.0 or heatmap.max() > 1.0:
            raise InputError("heatmap values must lie in [0, 1]")
        if height_map.min() < 0.0 or width_map.min() < 0.0:
            raise InputError("size map values must be >= 0")
        if self.reference_side <= 0:
            raise InputError("reference_side must be > 0")
        object.__setattr__(self, "heatmap", heatmap)
        object.__setattr__(self, "height_map", height_map)
        object.__setattr__(self, "width_map", width_map)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.heatmap.shape[0], self.heatmap.shape[1])

    def stacked(self) -> np.ndarray:
        return np.stack([self.heatmap, self.height_map, self.width_map], axis=-1)

    @classmethod
    def from_stacked(
        cls, data: np.ndarray, reference_side: int = REFERENCE_SIDE
    ) -> "TargetMaps":
        if data.ndim != 3 or data.shape[2] != 3:
            raise InputError(f"target maps need 3 channels, got shape {data.shape}")
        return cls(data[..., 0], data[..., 1], data[..., 2], reference_side)


@dataclass(frozen=True)
class VolumeStack:
    """Depth-major stack of equally sized gray slices."""

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[np.newaxis]
        if arr.ndim != 3:
            raise InputError(f"volume must be (D, H, W), got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise InputError("volume is empty")
        if not np.all(np.isfinite(arr)):
            raise InputError("volume contains non-finite values")
        object.__setattr__(self, "data", arr)

    @property
    def depth(self) -> int:
        return int(self.data.shape[0])

    @property
    def height(self) -> int:
        return int(self.data.shape[1])

    @property
    def width(self) -> int:
        return int(self.data.shape[2])

    def slice(self, z: int) -> GrayImage:
        return self.data[z]

    @classmethod
    def from_slices(cls, slices: List[np.ndarray]) -> "VolumeStack":
        if not slices:
            raise InputError("volume is empty")
        first = slices[0].shape
        for z, s in enumerate(slices):
            if s.shape != first:
                raise InputError(f"slice {z}: shape {s.shape} differs from {first}")
        return cls(np.stack(slices))


@dataclass(frozen=True)
class ImageInfo:
    id: int
    path: str
    height: int
    width: int

    def __post_init__(self) -> None:
        if self.height <= 0 or self.width <= 0:
            raise InputError(f"image {self.id}: height and width must be > 0")


@dataclass(frozen=True)
class AnnotationSet:
    """Images and their cells, grouped by image id."""

    images: Dict[int, ImageInfo] = field(default_factory=dict)
    cells: Dict[int, List[CellAnnotation]] = field(default_factory=dict)

    def cells_for(self, image_id: int) -> List[CellAnnotation]:
        return self.cells.get(image_id, [])

    def __len__(self) -> int:
        return sum(len(v) for v in self.cells.values())
