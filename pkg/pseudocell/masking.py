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

"""Padded and MAE-like masking schemes.

A padded mask tiles the image with square cells of side
``patch + 2 * padding`` anchored at the origin. Every full cell is masked
with probability ``mask_prob``; inside a masked cell only the central
``patch x patch`` square is masked, so masked squares of different cells
are always separated by at least ``2 * padding`` unmasked pixels. Partial
cells at the right and bottom border are never masked.

Random draws come from ``numpy.random.Philox`` keyed by the seed with the
cell position as counter, so a cell's draw does not depend on the image
size or on the order cells are visited.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from pseudocell.constants import (
    DEFAULT_MAE_GRID,
    DEFAULT_MAE_RATIO,
    DEFAULT_MASK_PROB,
    DEFAULT_PADDING,
    DEFAULT_PATCH,
)
from pseudocell.errors import InputError, InvariantError
from pseudocell.model import GrayImage, as_gray_image, require_same_shape

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class MaskSpec:
    patch: int = DEFAULT_PATCH
    padding: int = DEFAULT_PADDING
    mask_prob: float = DEFAULT_MASK_PROB
    fill_value: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.patch <= 0:
            raise InputError(f"mask patch must be > 0, got {self.patch}")
        if self.padding < 0:
            raise InputError(f"mask padding must be >= 0, got {self.padding}")
        if not 0.0 <= self.mask_prob <= 1.0:
            raise InputError(f"mask probability must lie in [0, 1], got {self.mask_prob}")
        if not math.isfinite(self.fill_value):
            raise InputError("mask fill value must be finite")

    @property
    def period(self) -> int:
        return self.patch + 2 * self.padding


@dataclass(frozen=True)
class MaskGrid:
    height: int
    width: int
    cells: np.ndarray
    realized_mask: np.ndarray
    scheme: str = "padded"
    fill_value: float = 0.0

    @property
    def masked_fraction(self) -> float:
        return float(self.realized_mask.mean())

    @property
    def masked_cells(self) -> int:
        return int(self.cells.sum())


def _cell_uniform(seed: int, row: int, col: int) -> float:
    bit_gen = np.random.Philox(key=seed & _MASK64, counter=(row << 64) | col)
    return float(np.random.Generator(bit_gen).random())


def cell_draws(seed: int, rows: int, cols: int) -> np.ndarray:
    """Uniform [0, 1) draw per cell, keyed by (seed, row, column)."""
    draws = np.empty((rows, cols), dtype=np.float64)
    for r in range(rows):
        for c in range(cols):
            draws[r, c] = _cell_uniform(seed, r, c)
    return draws


def build_padded_mask(height: int, width: int, spec: MaskSpec) -> MaskGrid:
    period = spec.period
    if height < period or width < period:
        raise InputError(
            f"image {height}x{width} is smaller than one mask cell ({period}x{period})"
        )

    rows, cols = height // period, width // period
    cells = cell_draws(spec.seed, rows, cols) < spec.mask_prob

    tile = np.zeros((period, period), dtype=bool)
    tile[spec.padding : spec.padding + spec.patch, spec.padding : spec.padding + spec.patch] = True

    realized = np.zeros((height, width), dtype=bool)
    realized[: rows * period, : cols * period] = np.kron(cells, tile).astype(bool)
    return MaskGrid(height, width, cells, realized, "padded", spec.fill_value)


def mae_cell_index(size: int, grid: int) -> np.ndarray:
    """Cell index of every pixel along one axis; remainder pixels go to the last cell."""
    base = size // grid
    return np.minimum(np.arange(size) // base, grid - 1)


def build_mae_mask(
    height: int,
    width: int,
    grid: int = DEFAULT_MAE_GRID,
    ratio: float = DEFAULT_MAE_RATIO,
    seed: int = 0,
    fill_value: float = 0.0,
) -> MaskGrid:
    """Mask exactly ``round(ratio * grid**2)`` cells chosen without replacement."""
    if grid < 1:
        raise InputError(f"MAE grid must be >= 1, got {grid}")
    if not 0.0 <= ratio <= 1.0:
        raise InputError(f"MAE ratio must lie in [0, 1], got {ratio}")
    if height < grid or width < grid:
        raise InputError(f"image {height}x{width} is smaller than the {grid}x{grid} grid")

    n_cells = grid * grid
    n_masked = int(math.floor(ratio * n_cells + 0.5))
    rng = np.random.Generator(np.random.Philox(key=seed & _MASK64))
    chosen = rng.choice(n_cells, size=n_masked, replace=False)

    cells = np.zeros(n_cells, dtype=bool)
    cells[chosen] = True
    cells = cells.reshape(grid, grid)

    realized = cells[np.ix_(mae_cell_index(height, grid), mae_cell_index(width, grid))]
    return MaskGrid(height, width, cells, realized, "mae", fill_value)


def apply_mask(img: GrayImage, mask: MaskGrid, fill: Optional[float] = None) -> GrayImage:
    """Copy of ``img`` with masked pixels set to ``fill`` (default: the mask's fill value)."""
    img = as_gray_image(img)
    require_same_shape(img, mask.realized_mask, "image and mask")
    out = img.copy()
    out[mask.realized_mask] = mask.fill_value if fill is None else fill
    return out


def expected_mask_ratio(height: int, width: int, spec: MaskSpec) -> float:
    """Expected masked-pixel fraction; partial border cells count as unmasked."""
    rows, cols = height // spec.period, width // spec.period
    return spec.mask_prob * spec.patch**2 * rows * cols / float(height * width)


def linear_mask_ratio(spec: MaskSpec) -> float:
    """Masked fraction along one axis, ``mask_prob * patch / period``."""
    return spec.mask_prob * spec.patch / float(spec.period)


def check_separation(mask: MaskGrid, spec: MaskSpec) -> None:
    """Raise if a masked pixel lies in a padding band or outside full cells."""
    period = spec.period
    rows, cols = mask.height // period, mask.width // period
    allowed = np.zeros((mask.height, mask.width), dtype=bool)
    tile = np.zeros((period, period), dtype=bool)
    tile[spec.padding : spec.padding + spec.patch, spec.padding : spec.padding + spec.patch] = True
    allowed[: rows * period, : cols * period] = np.kron(np.ones((rows, cols)), tile).astype(bool)
    stray = mask.realized_mask & ~allowed
    if stray.any():
        y, x = np.argwhere(stray)[0]
        raise InvariantError(f"masked pixel ({x}, {y}) lies outside every cell interior")
