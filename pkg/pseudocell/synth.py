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

"""Synthetic fluorescence-like images with known cell annotations.

Each cell is an ellipse with intensity ``peak * (1 - r^2)``, where ``r`` is
the normalized elliptic radius. Cells are composited by pixelwise maximum
on a zero background, then clamped Gaussian noise is added.
"""

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, List, Mapping, Tuple

import numpy as np

from pseudocell.annotations import write_annotations
from pseudocell.codec import ellipse_mask
from pseudocell.constants import REFERENCE_SIDE
from pseudocell.dataset import derive_seed, run_pool
from pseudocell.errors import InputError
from pseudocell.imageio import write_png
from pseudocell.model import AnnotationSet, CellAnnotation, GrayImage, ImageInfo

logger = logging.getLogger(__name__)

ANNOTATIONS_NAME = "annotations.json"


@dataclass(frozen=True)
class SynthSpec:
    side: int = REFERENCE_SIDE
    n_min: int = 1
    n_max: int = 10
    size_min: float = 10.0
    size_max: float = 60.0
    intensity_min: float = 0.5
    intensity_max: float = 1.0
    noise_sigma: float = 0.0
    allow_overlap: bool = False
    seed: int = 0
    max_retries: int = 1000
    margin: int = 2

    def __post_init__(self) -> None:
        if self.side <= 0:
            raise InputError(f"synth: side must be > 0, got {self.side}")
        if not 0 <= self.n_min <= self.n_max:
            raise InputError(f"synth: need 0 <= n_min <= n_max, got [{self.n_min}, {self.n_max}]")
        if not 0 < self.size_min <= self.size_max:
            raise InputError(
                f"synth: need 0 < size_min <= size_max, got [{self.size_min}, {self.size_max}]"
            )
        if self.size_max >= self.side:
            raise InputError(f"synth: size_max {self.size_max} does not fit side {self.side}")
        if not 0.0 <= self.intensity_min <= self.intensity_max <= 1.0:
            raise InputError(
                "synth: intensity range must satisfy 0 <= min <= max <= 1, "
                f"got [{self.intensity_min}, {self.intensity_max}]"
            )
        if self.noise_sigma < 0:
            raise InputError(f"synth: noise sigma must be >= 0, got {self.noise_sigma}")
        if self.max_retries < 1:
            raise InputError(f"synth: max_retries must be >= 1, got {self.max_retries}")
        if self.margin < 0:
            raise InputError(f"synth: margin must be >= 0, got {self.margin}")

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any], path: str = "<synth spec>") -> "SynthSpec":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise InputError(f"{path}: unknown synth spec keys {unknown}")
        try:
            return cls(**dict(doc))
        except TypeError as e:
            raise InputError(f"{path}: {e}")

    @classmethod
    def from_json(cls, path: str) -> "SynthSpec":
        if not os.path.isfile(path):
            raise InputError(f"{path}: no such synth spec")
        with open(path, "r", encoding="utf-8") as f:
            try:
                doc = json.load(f)
            except json.JSONDecodeError as e:
                raise InputError(f"{path}: invalid JSON: {e}")
        if not isinstance(doc, dict):
            raise InputError(f"{path}: expected a JSON object")
        return cls.from_dict(doc, path)

    def to_dict(self) -> dict:
        return asdict(self)


def _render_cell(image: np.ndarray, cell: CellAnnotation, peak: float) -> None:
    half_w, half_h = cell.w / 2.0, cell.h / 2.0
    side_y, side_x = image.shape
    x0, x1 = max(0, math.floor(cell.cx - half_w)), min(side_x, math.ceil(cell.cx + half_w) + 1)
    y0, y1 = max(0, math.floor(cell.cy - half_h)), min(side_y, math.ceil(cell.cy + half_h) + 1)
    yy, xx = np.ogrid[y0:y1, x0:x1]
    r2 = ((xx - cell.cx) / half_w) ** 2 + ((yy - cell.cy) / half_h) ** 2
    profile = np.where(r2 <= 1.0, peak * (1.0 - r2), 0.0)
    np.maximum(image[y0:y1, x0:x1], profile, out=image[y0:y1, x0:x1])


def _draw_cell(rng: np.random.Generator, spec: SynthSpec) -> CellAnnotation:
    w = float(rng.uniform(spec.size_min, spec.size_max))
    h = float(rng.uniform(spec.size_min, spec.size_max))
    # keep the whole ellipse on the raster
    cx = float(rng.uniform(w / 2.0, spec.side - 1 - w / 2.0))
    cy = float(rng.uniform(h / 2.0, spec.side - 1 - h / 2.0))
    return CellAnnotation(cx, cy, w, h)


def generate_synthetic(spec: SynthSpec) -> Tuple[GrayImage, List[CellAnnotation]]:
    """Deterministic for a given ``spec.seed``."""
    rng = np.random.default_rng(spec.seed)
    wanted = int(rng.integers(spec.n_min, spec.n_max + 1))

    image = np.zeros((spec.side, spec.side), dtype=np.float64)
    occupied = np.zeros((spec.side, spec.side), dtype=bool)
    cells: List[CellAnnotation] = []
    for _ in range(wanted):
        placed = False
        for _attempt in range(spec.max_retries):
            cell = _draw_cell(rng, spec)
            if not spec.allow_overlap:
                grown = ellipse_mask(cell, spec.side, spec.side, grow=spec.margin)
                if np.any(occupied & grown):
                    continue
                occupied |= ellipse_mask(cell, spec.side, spec.side)
            peak = float(rng.uniform(spec.intensity_min, spec.intensity_max))
            _render_cell(image, cell, peak)
            cells.append(cell)
            placed = True
            break
        if not placed:
            break

    if len(cells) < spec.n_min:
        raise InputError(
            f"synth: placed only {len(cells)} of at least {spec.n_min} cells "
            f"within {spec.max_retries} retries"
        )
    if len(cells) < wanted:
        logger.warning("synth seed %d: placed %d of %d drawn cells", spec.seed, len(cells), wanted)

    if spec.noise_sigma > 0:
        image = np.clip(image + rng.normal(0.0, spec.noise_sigma, image.shape), 0.0, 1.0)
    return image, cells


def synthetic_name(index: int) -> str:
    return f"synth_{index:04d}.png"


def write_synthetic_dataset(
    spec: SynthSpec, out_dir: str, count: int, workers: int = 1
) -> AnnotationSet:
    """Write ``count`` 16-bit PNGs and one annotations file into ``out_dir``.

    Every image gets its own seed derived from ``spec.seed`` and its file
    name, so a dataset of ``count`` images is a prefix of a larger one.
    """
    if count < 1:
        raise InputError(f"synth: count must be >= 1, got {count}")
    os.makedirs(out_dir, exist_ok=True)

    def make(index: int) -> Tuple[ImageInfo, List[CellAnnotation]]:
        name = synthetic_name(index)
        image, cells = generate_synthetic(replace(spec, seed=derive_seed(spec.seed, name)))
        write_png(image, os.path.join(out_dir, name), bitdepth=16)
        return ImageInfo(index + 1, name, spec.side, spec.side), cells

    results = run_pool(make, range(count), workers)
    annotations = AnnotationSet(
        {info.id: info for info, _ in results}, {info.id: cells for info, cells in results}
    )
    write_annotations(annotations, os.path.join(out_dir, ANNOTATIONS_NAME))
    logger.info("wrote %d synthetic images with %d cells to %s", count, len(annotations), out_dir)
    return annotations
