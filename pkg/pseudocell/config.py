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

"""Pipeline configuration: defaults, JSON config files and flag overrides.

Values resolve as defaults < config file < command-line flags.
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, Mapping, Optional

from pseudocell.constants import (
    COLORMAP_NAMES,
    DEFAULT_COLORMAP,
    DEFAULT_MAE_GRID,
    DEFAULT_MAE_RATIO,
    DEFAULT_MASK_PROB,
    DEFAULT_PADDING,
    DEFAULT_PATCH,
    HEATMAP_THRESHOLD,
    MASKING_SCHEMES,
    REFERENCE_SIDE,
    TARGET_KINDS,
)
from pseudocell.dataset import default_workers
from pseudocell.errors import InputError
from pseudocell.masking import MaskSpec

logger = logging.getLogger(__name__)

NO_COLORMAP = "none"


class DefaultPipelineParameters:
    colormap = DEFAULT_COLORMAP
    masking = "padded"
    patch = DEFAULT_PATCH
    padding = DEFAULT_PADDING
    mask_prob = DEFAULT_MASK_PROB
    fill_value = 0.0
    mae_grid = DEFAULT_MAE_GRID
    mae_ratio = DEFAULT_MAE_RATIO
    target = "colormap"
    threshold = HEATMAP_THRESHOLD
    reference_side = REFERENCE_SIDE
    input_dir = "."
    output_dir = "./out"
    seed = 0


@dataclass(frozen=True)
class PipelineConfig:
    colormap: str = DefaultPipelineParameters.colormap
    masking: str = DefaultPipelineParameters.masking
    patch: int = DefaultPipelineParameters.patch
    padding: int = DefaultPipelineParameters.padding
    mask_prob: float = DefaultPipelineParameters.mask_prob
    fill_value: float = DefaultPipelineParameters.fill_value
    mae_grid: int = DefaultPipelineParameters.mae_grid
    mae_ratio: float = DefaultPipelineParameters.mae_ratio
    target: str = DefaultPipelineParameters.target
    threshold: float = DefaultPipelineParameters.threshold
    reference_side: int = DefaultPipelineParameters.reference_side
    input_dir: str = DefaultPipelineParameters.input_dir
    output_dir: str = DefaultPipelineParameters.output_dir
    seed: int = DefaultPipelineParameters.seed
    workers: int = 1

    def __post_init__(self) -> None:
        if self.colormap == NO_COLORMAP and self.target == "colormap":
            # no colormap means plain autoencoding of the gray image
            object.__setattr__(self, "target", "gray")
        if self.colormap != NO_COLORMAP and self.colormap not in COLORMAP_NAMES:
            if not (self.colormap.lower().endswith(".csv") and os.path.isfile(self.colormap)):
                raise InputError(
                    f"config: unknown colormap {self.colormap!r}, expected one of "
                    f"{', '.join(COLORMAP_NAMES + (NO_COLORMAP,))} or a LUT CSV"
                )
        if self.masking not in MASKING_SCHEMES:
            raise InputError(
                f"config: masking must be one of {', '.join(MASKING_SCHEMES)}, got {self.masking!r}"
            )
        if self.target not in TARGET_KINDS:
            raise InputError(
                f"config: target must be one of {', '.join(TARGET_KINDS)}, got {self.target!r}"
            )
        if not 0.0 < self.threshold < 1.0:
            raise InputError(f"config: threshold must lie in (0, 1), got {self.threshold}")
        if self.reference_side <= 0:
            raise InputError(f"config: reference_side must be > 0, got {self.reference_side}")
        if self.mae_grid < 1:
            raise InputError(f"config: mae_grid must be >= 1, got {self.mae_grid}")
        if not 0.0 <= self.mae_ratio <= 1.0:
            raise InputError(f"config: mae_ratio must lie in [0, 1], got {self.mae_ratio}")
        if self.workers < 1:
            raise InputError(f"config: workers must be >= 1, got {self.workers}")
        self.mask_spec()

    def mask_spec(self, seed: Optional[int] = None) -> MaskSpec:
        return MaskSpec(
            patch=self.patch,
            padding=self.padding,
            mask_prob=self.mask_prob,
            fill_value=self.fill_value,
            seed=self.seed if seed is None else seed,
        )

    def require_input_dir(self) -> None:
        if not os.path.isdir(self.input_dir):
            raise InputError(f"config: input directory does not exist: {self.input_dir}")

    def with_overrides(self, **overrides: Any) -> "PipelineConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def load_config_file(path: str) -> Dict[str, Any]:
    if not os.path.isfile(path):
        raise InputError(f"{path}: no such config file")
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise InputError(f"{path}: invalid JSON: {e}")
    if not isinstance(doc, dict):
        raise InputError(f"{path}: expected a JSON object")
    known = {f.name for f in fields(PipelineConfig)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise InputError(f"{path}: unknown config keys {unknown}")
    return doc


def build_config(
    config_path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None
) -> PipelineConfig:
    """Resolve a PipelineConfig; ``None`` overrides leave lower layers alone."""
    values: Dict[str, Any] = {"workers": default_workers()}
    if config_path:
        values.update(load_config_file(config_path))
        logger.debug("loaded config %s", config_path)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return PipelineConfig(**values)
    except TypeError as e:
        raise InputError(f"config: {e}")
