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

"""Centroid heatmap and size map targets: encoding and decoding.

Encoding approximates every cell by an ellipse, smooths each ellipse with
a normalized box filter sized ``(w // 1.5, h // 1.5)`` and composites the
smoothed maps by pixelwise maximum. Width and height, relative to the
reference side, are written into rectangles covering the central half of
each cell. Decoding thresholds the heatmap, labels 8-connected blobs,
takes their moment centroids and looks the sizes up at the centroid.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from pseudocell.constants import HEATMAP_THRESHOLD, KERNEL_DIVISOR, REFERENCE_SIDE
from pseudocell.errors import InputError
from pseudocell.model import CellAnnotation, Detection, GrayImage, TargetMaps, as_gray_image

logger = logging.getLogger(__name__)

_EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def _ellipse_window(
    cell: CellAnnotation, height: int, width: int, pad: int = 0
) -> Optional[Tuple[Tuple[slice, slice], np.ndarray]]:
    """Bounding window of the cell ellipse grown by ``pad``, clipped to the image."""
    half_w, half_h = cell.w / 2.0, cell.h / 2.0
    x0 = max(0, math.floor(cell.cx - half_w) - pad)
    x1 = min(width, math.ceil(cell.cx + half_w) + 1 + pad)
    y0 = max(0, math.floor(cell.cy - half_h) - pad)
    y1 = min(height, math.ceil(cell.cy + half_h) + 1 + pad)
    if x0 >= x1 or y0 >= y1:
        return None
    yy, xx = np.ogrid[y0:y1, x0:x1]
    inside = ((xx - cell.cx) / half_w) ** 2 + ((yy - cell.cy) / half_h) ** 2 <= 1.0
    return (slice(y0, y1), slice(x0, x1)), inside


def ellipse_mask(cell: CellAnnotation, height: int, width: int, grow: float = 0.0) -> np.ndarray:
    """Boolean raster of one cell ellipse, optionally with both axes grown by ``grow``."""
    if grow:
        cell = CellAnnotation(cell.cx, cell.cy, cell.w + 2 * grow, cell.h + 2 * grow)
    out = np.zeros((height, width), dtype=bool)
    window = _ellipse_window(cell, height, width)
    if window is not None:
        sl, inside = window
        out[sl] = inside
    return out


def render_ellipse_map(cells: Sequence[CellAnnotation], height: int, width: int) -> GrayImage:
    out = np.zeros((height, width), dtype=bool)
    for cell in cells:
        window = _ellipse_window(cell, height, width)
        if window is not None:
            sl, inside = window
            out[sl] |= inside
    return out.astype(np.float64)


def box_kernel(w: float, h: float) -> Tuple[int, int]:
    """Box filter size ``(w // 1.5, h // 1.5)``, each side at least 1."""
    if w <= 0 or h <= 0:
        raise InputError(f"kernel needs w, h > 0, got w={w} h={h}")
    return max(1, int(w // KERNEL_DIVISOR)), max(1, int(h // KERNEL_DIVISOR))


def encode_centroid_heatmap(
    cells: Sequence[CellAnnotation], height: int, width: int
) -> GrayImage:
    heatmap = np.zeros((height, width), dtype=np.float64)
    for cell in cells:
        kw, kh = box_kernel(cell.w, cell.h)
        window = _ellipse_window(cell, height, width, pad=max(kw, kh))
        if window is None:
            continue
        sl, inside = window
        # clipped window borders act as the zero padding at image borders
        smoothed = ndimage.uniform_filter(
            inside.astype(np.float64), size=(kh, kw), mode="constant", cval=0.0
        )
        np.maximum(heatmap[sl], smoothed, out=heatmap[sl])
    return np.clip(heatmap, 0.0, 1.0)


def _rect_span(center: float, extent: float, limit: int) -> Tuple[int, int]:
    lo = math.ceil(center - extent / 4.0)
    hi = math.ceil(center + extent / 4.0)
    nearest = round_half_up(center)
    lo, hi = min(lo, nearest), max(hi, nearest + 1)
    return max(0, lo), min(limit, hi)


def encode_size_maps(
    cells: Sequence[CellAnnotation],
    height: int,
    width: int,
    reference_side: int = REFERENCE_SIDE,
) -> Tuple[GrayImage, GrayImage]:
    """Return ``(width_map, height_map)``; later cells overwrite earlier ones."""
    if reference_side <= 0:
        raise InputError(f"reference side must be > 0, got {reference_side}")
    width_map = np.zeros((height, width), dtype=np.float64)
    height_map = np.zeros((height, width), dtype=np.float64)
    for cell in cells:
        x0, x1 = _rect_span(cell.cx, cell.w, width)
        y0, y1 = _rect_span(cell.cy, cell.h, height)
        if x0 >= x1 or y0 >= y1:
            continue
        width_map[y0:y1, x0:x1] = cell.w / reference_side
        height_map[y0:y1, x0:x1] = cell.h / reference_side
    return width_map, height_map


def encode_targets(
    cells: Sequence[CellAnnotation],
    height: int,
    width: int,
    reference_side: int = REFERENCE_SIDE,
) -> TargetMaps:
    heatmap = encode_centroid_heatmap(cells, height, width)
    width_map, height_map = encode_size_maps(cells, height, width, reference_side)
    return TargetMaps(heatmap, height_map, width_map, reference_side)


def threshold_heatmap(heatmap: GrayImage, t: float = HEATMAP_THRESHOLD) -> np.ndarray:
    return as_gray_image(heatmap, "heatmap") > t


@dataclass(frozen=True)
class Blob:
    """Pixels of one 8-connected component and its raw image moments."""

    xs: np.ndarray
    ys: np.ndarray
    m00: float = field(init=False)
    m10: float = field(init=False)
    m01: float = field(init=False)

    def __post_init__(self) -> None:
        xs = np.asarray(self.xs, dtype=np.int64)
        ys = np.asarray(self.ys, dtype=np.int64)
        if xs.shape != ys.shape:
            raise InputError("blob coordinate arrays differ in length")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "m00", float(xs.size))
        object.__setattr__(self, "m10", float(xs.sum()))
        object.__setattr__(self, "m01", float(ys.sum()))

    def __len__(self) -> int:
        return int(self.xs.size)


def connected_components(binary: np.ndarray) -> List[Blob]:
    """8-connected components in raster-scan label order."""
    labels, count = ndimage.label(np.asarray(binary, dtype=bool), structure=_EIGHT_CONNECTED)
    blobs: List[Blob] = []
    for label, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None:
            continue
        ys, xs = np.nonzero(labels[sl] == label)
        blobs.append(Blob(xs + sl[1].start, ys + sl[0].start))
    return blobs


def blob_centroid(blob: Blob) -> Tuple[float, float]:
    """``(M10 / M00, M01 / M00)``."""
    if blob.m00 <= 0:
        raise InputError("centroid of an empty blob")
    return blob.m10 / blob.m00, blob.m01 / blob.m00


@dataclass(frozen=True)
class DecodeResult:
    detections: List[Detection]
    clamped: int = 0


def decode_maps(
    maps: TargetMaps,
    image_height: int,
    image_width: int,
    t: float = HEATMAP_THRESHOLD,
) -> DecodeResult:
    if image_height <= 0 or image_width <= 0:
        raise InputError(f"image size must be > 0, got {image_height}x{image_width}")

    map_height, map_width = maps.shape
    detections: List[Detection] = []
    clamped = 0
    for blob in connected_components(threshold_heatmap(maps.heatmap, t)):
        cx, cy = blob_centroid(blob)
        rx, ry = round_half_up(cx), round_half_up(cy)
        if not (0 <= rx < map_width and 0 <= ry < map_height):
            clamped += 1
            rx = min(max(rx, 0), map_width - 1)
            ry = min(max(ry, 0), map_height - 1)
        w = float(maps.width_map[ry, rx]) * image_width
        h = float(maps.height_map[ry, rx]) * image_height
        score = float(maps.heatmap[blob.ys, blob.xs].max())
        detections.append(Detection(cx - w / 2.0, cy - h / 2.0, w, h, score))

    if clamped:
        logger.warning("%d blob centroids fell outside the maps and were clamped", clamped)
    return DecodeResult(detections, clamped)


def decode_detections(
    maps: TargetMaps,
    image_height: int,
    image_width: int,
    t: float = HEATMAP_THRESHOLD,
) -> List[Detection]:
    return decode_maps(maps, image_height, image_width, t).detections
