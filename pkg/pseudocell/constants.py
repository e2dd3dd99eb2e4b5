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

from typing import Dict, Tuple

# Named colormaps from different colormap categories
COLORMAP_CATEGORIES: Dict[str, str] = {
    "rainbow": "spectral",
    "seismic": "diverging",
    "nipy_spectral": "pseudo-spectral",
    "viridis": "perceptually uniform sequential",
}
COLORMAP_NAMES: Tuple[str, ...] = tuple(COLORMAP_CATEGORIES)
DEFAULT_COLORMAP = "nipy_spectral"
LUT_SIZE = 256

# HSP perceived brightness weights for (R, G, B)
HSP_WEIGHTS: Tuple[float, float, float] = (0.299, 0.587, 0.114)

# Padded masking, sized for a 384 x 384 input
DEFAULT_PATCH = 12
DEFAULT_PADDING = DEFAULT_PATCH // 4
DEFAULT_MASK_PROB = 0.5

# MAE-like masking: 224 / 14 = 16 pixel patches
DEFAULT_MAE_GRID = 14
DEFAULT_MAE_RATIO = 0.75

MASKING_SCHEMES: Tuple[str, ...] = ("padded", "mae", "none")
TARGET_KINDS: Tuple[str, ...] = ("colormap", "gray", "edges")

REFERENCE_SIDE = 384
HEATMAP_THRESHOLD = 0.75
KERNEL_DIVISOR = 1.5

# Loss weights for (heatmap, height, width)
LOSS_WEIGHTS: Tuple[float, float, float] = (1.0, 0.5, 0.5)
HUBER_DELTA = 1.0

# SSIM stabilizers, multiplied by the dynamic range L
SSIM_K1 = 0.01
SSIM_K2 = 0.03

# COCO box evaluation
COCO_IOU_THRESHOLDS: Tuple[float, ...] = (
    0.50,
    0.55,
    0.60,
    0.65,
    0.70,
    0.75,
    0.80,
    0.85,
    0.90,
    0.95,
)
COCO_RECALL_POINTS = 101
COCO_MAX_DETS = 100
COCO_SMALL_AREA = 32.0**2
COCO_LARGE_AREA = 96.0**2

CONTEXT_FILTERS = 10

IMAGE_SUFFIXES: Tuple[str, ...] = (".png", ".tif", ".tiff", ".pfm")

ENV_WORKERS = "PSEUDOCELL_WORKERS"
