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

"""Raster IO: gray PNG/TIFF/PFM readers, PFM and PNG writers, volumes."""

import io
import json
import logging
import os
import re
from typing import Any, Dict, Optional

import numpy as np
import png
import tifffile

from pseudocell.constants import REFERENCE_SIDE
from pseudocell.dataset import atomic_write_bytes, atomic_write_text, get_sorted_image_files
from pseudocell.errors import InputError
from pseudocell.model import GrayImage, TargetMaps, VolumeStack

logger = logging.getLogger(__name__)

_PFM_HEADER = re.compile(rb"^(P[Ff])\s+(\d+)\s+(\d+)\s+([-+0-9.eE]+)\s")


def _normalize_codes(arr: np.ndarray, path: str) -> np.ndarray:
    """Map integer codes onto [0, 1] by the dtype's max code value."""
    if arr.dtype == np.bool_:
        return arr.astype(np.float64)
    if np.issubdtype(arr.dtype, np.unsignedinteger):
        return arr.astype(np.float64) / float(np.iinfo(arr.dtype).max)
    if np.issubdtype(arr.dtype, np.floating):
        return arr.astype(np.float64)
    raise InputError(f"{path}: unsupported sample type {arr.dtype}")


def _read_png_gray(path: str) -> GrayImage:
    try:
        width, height, rows, info = png.Reader(filename=path).asDirect()
        if info["planes"] != 1:
            raise InputError(
                f"{path}: expected a single-channel PNG, got {info['planes']} planes"
            )
        data = np.array([np.asarray(row) for row in rows], dtype=np.float64)
    except png.Error as e:
        raise InputError(f"{path}: corrupt PNG: {e}")
    max_code = float(2 ** info["bitdepth"] - 1)
    return data.reshape(height, width) / max_code


def _read_tiff(path: str) -> np.ndarray:
    try:
        return tifffile.imread(path)
    except (OSError, ValueError) as e:
        raise InputError(f"{path}: corrupt TIFF: {e}")


def read_pfm(path: str) -> np.ndarray:
    """Read a Portable FloatMap as (H, W) or (H, W, 3) float64, top row first."""
    with open(path, "rb") as f:
        raw = f.read()

    match = _PFM_HEADER.match(raw)
    if match is None:
        raise InputError(f"{path}: corrupt PFM header")
    tag, width, height = match.group(1), int(match.group(2)), int(match.group(3))
    try:
        scale = float(match.group(4))
    except ValueError:
        raise InputError(f"{path}: corrupt PFM scale")
    if scale == 0.0 or width <= 0 or height <= 0:
        raise InputError(f"{path}: corrupt PFM header")

    channels = 3 if tag == b"PF" else 1
    dtype = "<f4" if scale < 0 else ">f4"
    expected = width * height * channels * 4
    payload = raw[match.end() : match.end() + expected]
    if len(payload) != expected:
        raise InputError(
            f"{path}: truncated PFM payload ({len(payload)} of {expected} bytes)"
        )

    data = np.frombuffer(payload, dtype=dtype).reshape(height, width, channels)
    # rows are stored bottom to top
    data = np.flipud(data).astype(np.float64)
    return data[..., 0] if channels == 1 else data


def encode_pfm(image: np.ndarray) -> bytes:
    arr = np.asarray(image)
    if arr.ndim == 2:
        tag = "Pf"
    elif arr.ndim == 3 and arr.shape[2] == 3:
        tag = "PF"
    else:
        raise InputError(f"PFM needs an (H, W) or (H, W, 3) raster, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("PFM raster contains non-finite values")
    height, width = arr.shape[:2]
    header = f"{tag}\n{width} {height}\n-1.0\n".encode("ascii")
    payload = np.ascontiguousarray(np.flipud(arr), dtype="<f4").tobytes()
    return header + payload


def write_pfm(image: np.ndarray, path: str) -> None:
    atomic_write_bytes(path, encode_pfm(image))


def write_png(image: np.ndarray, path: str, bitdepth: int = 8) -> None:
    """Write a gray or RGB raster with values in [0, 1] as PNG."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 3:
        greyscale = False
    elif arr.ndim == 2:
        greyscale = True
    else:
        raise InputError(f"PNG needs an (H, W) or (H, W, 3) raster, got {arr.shape}")
    if bitdepth not in (8, 16):
        raise InputError(f"PNG bit depth must be 8 or 16, got {bitdepth}")
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise InputError("PNG raster values must lie in [0, 1]")

    height, width = arr.shape[:2]
    max_code = 2**bitdepth - 1
    codes = np.floor(arr * max_code + 0.5).astype(np.int64).reshape(height, -1)
    writer = png.Writer(width=width, height=height, greyscale=greyscale, bitdepth=bitdepth)
    buffer = io.BytesIO()
    writer.write(buffer, codes.tolist())
    atomic_write_bytes(path, buffer.getvalue())


def read_gray_image(path: str) -> GrayImage:
    """Read a single-channel PNG, TIFF or PFM into a float64 raster.

    Integer samples are divided by their max code value (255 or 65535);
    float samples are kept verbatim.
    """
    if not os.path.isfile(path):
        raise InputError(f"{path}: no such file")

    suffix = os.path.splitext(path)[1].lower()
    if suffix == ".png":
        return _read_png_gray(path)
    if suffix in (".tif", ".tiff"):
        arr = np.squeeze(_read_tiff(path))
        if arr.ndim != 2:
            raise InputError(f"{path}: expected a single-channel TIFF, got shape {arr.shape}")
        return _normalize_codes(arr, path)
    if suffix == ".pfm":
        arr = read_pfm(path)
        if arr.ndim != 2:
            raise InputError(f"{path}: expected a gray PFM (Pf), got a color PFM")
        return arr
    raise InputError(f"{path}: unsupported image format {suffix!r}")


def read_volume(path: str) -> VolumeStack:
    """Read a multi-page TIFF stack or a directory of gray slices."""
    if os.path.isdir(path):
        files = get_sorted_image_files(path)
        if not files:
            raise InputError(f"{path}: no slices found")
        logger.debug("reading %d slices from %s", len(files), path)
        return VolumeStack.from_slices(
            [read_gray_image(os.path.join(path, f)) for f in files]
        )

    suffix = os.path.splitext(path)[1].lower()
    if suffix in (".tif", ".tiff"):
        arr = np.squeeze(_read_tiff(path))
        if arr.ndim not in (2, 3):
            raise InputError(f"{path}: expected a (D, H, W) stack, got shape {arr.shape}")
        return VolumeStack(_normalize_codes(arr, path))
    return VolumeStack(read_gray_image(path))


def sidecar_path(path: str) -> str:
    return os.path.splitext(path)[0] + ".json"


def write_target_maps(maps: TargetMaps, path: str, image_id: Optional[int] = None) -> None:
    """One 3-channel PFM (heatmap, height_map, width_map) plus a JSON sidecar."""
    write_pfm(maps.stacked(), path)
    meta: Dict[str, Any] = {"reference_side": maps.reference_side}
    if image_id is not None:
        meta["image_id"] = image_id
    atomic_write_text(sidecar_path(path), json.dumps(meta, indent=2) + "\n")


def read_sidecar(path: str) -> Dict[str, Any]:
    meta_path = sidecar_path(path)
    if not os.path.isfile(meta_path):
        return {}
    try:
        with open(meta_path, "r", encoding="utf-8") as f:
            meta = json.load(f)
    except json.JSONDecodeError as e:
        raise InputError(f"{meta_path}: invalid JSON: {e}")
    if not isinstance(meta, dict):
        raise InputError(f"{meta_path}: expected a JSON object")
    return meta


def read_target_maps(path: str, reference_side: Optional[int] = None) -> TargetMaps:
    data = read_pfm(path)
    if data.ndim != 3:
        raise InputError(f"{path}: target maps must be a 3-channel PFM")
    if reference_side is None:
        meta = read_sidecar(path)
        reference_side = int(meta.get("reference_side", REFERENCE_SIDE))
    return TargetMaps.from_stacked(data, reference_side)
