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

"""Batch pipelines behind the sub-commands.

Every ``cmd_*`` function does its work and returns a JSON-serializable
summary; printing and exit codes are left to ``__main__``.
"""

import json
import logging
import os
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from pseudocell import __version__
from pseudocell.annotations import read_annotations, read_detections, write_detections
from pseudocell.cli.report import generate_eval_report, write_per_image_csv
from pseudocell.codec import decode_maps, encode_targets
from pseudocell.config import PipelineConfig
from pseudocell.constants import COLORMAP_NAMES, HEATMAP_THRESHOLD, REFERENCE_SIDE
from pseudocell.context import forward_volume, load_context_weights
from pseudocell.dataset import (
    atomic_write_text,
    contained_relpath,
    derive_seed,
    get_sorted_image_files,
    natural_sort_key,
    run_pool,
)
from pseudocell.errors import InputError
from pseudocell.imageio import (
    read_gray_image,
    read_pfm,
    read_sidecar,
    read_target_maps,
    read_volume,
    write_pfm,
    write_png,
    write_target_maps,
)
from pseudocell.masking import (
    MaskGrid,
    apply_mask,
    build_mae_mask,
    build_padded_mask,
    check_separation,
    expected_mask_ratio,
)
from pseudocell.metrics import coco_ap, miou_heatmap, mse, per_image_stats, ssim, ssim_color
from pseudocell.model import Detection
from pseudocell.preprocess import edge_map, preprocess
from pseudocell.pseudocolor import (
    apply_colormap,
    colormap_strip,
    load_colormap,
    write_brightness_csv,
    write_lut_csv,
)
from pseudocell.synth import SynthSpec, write_synthetic_dataset

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MAPS_SUFFIX = "_maps.pfm"


def _write_json(path: str, doc: Any) -> None:
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _stem(relpath: str) -> str:
    return os.path.splitext(relpath)[0]


# ============ Pre-training pairs ============


def build_mask(config: PipelineConfig, height: int, width: int, seed: int) -> Optional[MaskGrid]:
    if config.masking == "padded":
        spec = config.mask_spec(seed)
        mask = build_padded_mask(height, width, spec)
        check_separation(mask, spec)
        return mask
    if config.masking == "mae":
        return build_mae_mask(
            height, width, config.mae_grid, config.mae_ratio, seed, config.fill_value
        )
    return None


def _pretrain_one(config: PipelineConfig, relpath: str) -> Dict[str, Any]:
    seed = derive_seed(config.seed, relpath)
    image = preprocess(read_gray_image(os.path.join(config.input_dir, relpath)))
    height, width = image.shape

    mask = build_mask(config, height, width, seed)
    masked = image.copy() if mask is None else apply_mask(image, mask)

    if config.target == "colormap":
        target = apply_colormap(image, load_colormap(config.colormap))
    elif config.target == "edges":
        target = edge_map(image)
    else:
        target = image

    stem = _stem(relpath)
    input_rel = f"{stem}_input.pfm"
    target_rel = f"{stem}_target.pfm"
    write_pfm(masked, os.path.join(config.output_dir, input_rel))
    write_pfm(target, os.path.join(config.output_dir, target_rel))

    entry: Dict[str, Any] = {
        "source": relpath,
        "seed": seed,
        "input": input_rel,
        "target": target_rel,
        "height": height,
        "width": width,
        "masked_fraction": 0.0 if mask is None else mask.masked_fraction,
        "masked_cells": 0 if mask is None else mask.masked_cells,
    }
    if config.masking == "padded":
        entry["expected_ratio"] = expected_mask_ratio(height, width, config.mask_spec(seed))
    logger.debug("%s: seed %d, masked %.4f", relpath, seed, entry["masked_fraction"])
    return entry


def cmd_pretrain_gen(config: PipelineConfig) -> Dict[str, Any]:
    """Masked input and pseudo-colorized target PFMs for every input image."""
    config.require_input_dir()
    files = get_sorted_image_files(config.input_dir)
    if not files:
        raise InputError(f"no images found in {config.input_dir}")
    if config.target == "colormap":
        load_colormap(config.colormap)

    os.makedirs(config.output_dir, exist_ok=True)
    entries = run_pool(lambda rel: _pretrain_one(config, rel), files, config.workers)
    entries.sort(key=lambda e: natural_sort_key(e["source"]))

    manifest = {
        "version": __version__,
        "variant": {
            "colormap": config.colormap,
            "masking": config.masking,
            "target": config.target,
        },
        "config": {
            "patch": config.patch,
            "padding": config.padding,
            "mask_prob": config.mask_prob,
            "fill_value": config.fill_value,
            "mae_grid": config.mae_grid,
            "mae_ratio": config.mae_ratio,
            "seed": config.seed,
        },
        "images": entries,
    }
    manifest_path = os.path.join(config.output_dir, MANIFEST_NAME)
    _write_json(manifest_path, manifest)
    logger.info("wrote %d pre-training pairs to %s", len(entries), config.output_dir)

    fractions = [e["masked_fraction"] for e in entries]
    return {
        "images": len(entries),
        "manifest": manifest_path,
        "mean_masked_fraction": float(np.mean(fractions)),
    }


# ============ Target maps ============


def cmd_encode(
    annotations_path: str,
    output_dir: str,
    reference_side: int = REFERENCE_SIDE,
    workers: int = 1,
) -> Dict[str, Any]:
    annotations = read_annotations(annotations_path)

    names: Dict[int, str] = {}
    owners: Dict[str, int] = {}
    for image_id in sorted(annotations.images):
        stem = _stem(contained_relpath(annotations.images[image_id].path))
        rel = (stem or f"image_{image_id}") + MAPS_SUFFIX
        if rel in owners:
            raise InputError(
                f"{annotations_path}: images {owners[rel]} and {image_id} both map to {rel}"
            )
        owners[rel] = image_id
        names[image_id] = rel
    os.makedirs(output_dir, exist_ok=True)

    def encode_one(image_id: int) -> str:
        info = annotations.images[image_id]
        maps = encode_targets(
            annotations.cells_for(image_id), info.height, info.width, reference_side
        )
        write_target_maps(maps, os.path.join(output_dir, names[image_id]), image_id)
        return names[image_id]

    written = run_pool(encode_one, sorted(names), workers)
    logger.info("encoded %d target maps into %s", len(written), output_dir)
    return {"images": len(written), "cells": len(annotations), "maps": written}


def _find_maps(path: str) -> List[str]:
    if os.path.isfile(path):
        return [path]
    if not os.path.isdir(path):
        raise InputError(f"{path}: no such file or directory")
    found = [
        os.path.join(path, rel)
        for rel in get_sorted_image_files(path, (MAPS_SUFFIX,))
    ]
    if not found:
        raise InputError(f"{path}: no *{MAPS_SUFFIX} files found")
    return found


def cmd_decode(
    maps_path: str,
    output_path: str,
    threshold: float = HEATMAP_THRESHOLD,
    image_size: Optional[Tuple[int, int]] = None,
    reference_side: int = REFERENCE_SIDE,
) -> Dict[str, Any]:
    """Decode target maps into detections.

    Sizes scale by ``image_size`` (height, width) when given, else by each
    map's reference side, which inverts ``cmd_encode`` for any image size.
    ``reference_side`` stands in for maps whose sidecar does not record one.
    """
    if not 0.0 < threshold < 1.0:
        raise InputError(f"threshold must lie in (0, 1), got {threshold}")
    detections: Dict[int, List[Detection]] = {}
    clamped = 0
    for index, path in enumerate(_find_maps(maps_path), start=1):
        meta = read_sidecar(path)
        maps = read_target_maps(path, int(meta.get("reference_side", reference_side)))
        image_id = int(meta.get("image_id", index))
        if image_id in detections:
            raise InputError(f"{path}: duplicate image id {image_id}")
        height, width = image_size or (maps.reference_side, maps.reference_side)
        result = decode_maps(maps, height, width, threshold)
        detections[image_id] = result.detections
        clamped += result.clamped

    write_detections(detections, output_path)
    total = sum(len(v) for v in detections.values())
    logger.info("decoded %d detections from %d maps", total, len(detections))
    return {
        "images": len(detections),
        "detections": total,
        "clamped": clamped,
        "output": output_path,
    }


# ============ Evaluation ============


def cmd_eval(
    detections_path: str,
    annotations_path: str,
    csv_path: Optional[str] = None,
    report_path: Optional[str] = None,
) -> Dict[str, Any]:
    detections = read_detections(detections_path)
    annotations = read_annotations(annotations_path)
    truths = {image_id: annotations.cells_for(image_id) for image_id in annotations.images}

    result = coco_ap(detections, truths)
    rows = per_image_stats(detections, truths)
    if csv_path:
        write_per_image_csv(rows, csv_path)
    if report_path:
        generate_eval_report(result, rows, detections_path, annotations_path, report_path)
    return result.to_dict()


def cmd_eval_maps(
    pred_path: str,
    truth_path: str,
    heatmap: bool = False,
    threshold: float = HEATMAP_THRESHOLD,
) -> Dict[str, Any]:
    """SSIM and MSE of two PFM rasters, plus mIoU when they hold heatmaps."""
    pred = read_pfm(pred_path)
    truth = read_pfm(truth_path)
    if pred.shape != truth.shape:
        raise InputError(f"{pred_path} and {truth_path}: dimension mismatch")

    if pred.ndim == 3:
        summary: Dict[str, Any] = {"ssim": ssim_color(pred, truth)}
    else:
        summary = {"ssim": ssim(pred, truth)}
    summary["mse"] = mse(pred, truth)
    if heatmap:
        pred_map = pred[..., 0] if pred.ndim == 3 else pred
        truth_map = truth[..., 0] if truth.ndim == 3 else truth
        summary["miou"] = miou_heatmap(pred_map, truth_map, threshold)
    return summary


# ============ Synthesis and previews ============


def cmd_synth(
    spec: SynthSpec, output_dir: str, count: int, workers: int = 1
) -> Dict[str, Any]:
    annotations = write_synthetic_dataset(spec, output_dir, count, workers)
    return {"images": len(annotations.images), "cells": len(annotations), "output": output_dir}


def cmd_colormap_preview(name: str, output_dir: str, height: int = 32) -> Dict[str, Any]:
    cmap = load_colormap(name)
    strip_path = os.path.join(output_dir, f"{cmap.name}_strip.png")
    curve_path = os.path.join(output_dir, f"{cmap.name}_brightness.csv")
    write_png(colormap_strip(cmap, height), strip_path)
    write_brightness_csv(cmap, curve_path)
    return {"colormap": cmap.name, "strip": strip_path, "brightness": curve_path}


def cmd_colormap_export(output_dir: str) -> Dict[str, Any]:
    written = []
    for name in COLORMAP_NAMES:
        path = os.path.join(output_dir, f"{name}.csv")
        write_lut_csv(load_colormap(name), path)
        written.append(path)
    return {"luts": written}


def cmd_mask_preview(
    config: PipelineConfig,
    output_path: str,
    height: int,
    width: int,
    image_path: Optional[str] = None,
) -> Dict[str, Any]:
    """Write the mask as a PNG (white = masked); optionally the masked image too."""
    if image_path:
        image = preprocess(read_gray_image(image_path))
        height, width = image.shape
    mask = build_mask(config, height, width, config.seed)
    if mask is None:
        raise InputError("mask preview needs a masking scheme other than 'none'")

    write_png(mask.realized_mask.astype(np.float64), output_path)
    summary: Dict[str, Any] = {
        "scheme": mask.scheme,
        "height": height,
        "width": width,
        "masked_fraction": mask.masked_fraction,
        "masked_cells": mask.masked_cells,
        "mask": output_path,
    }
    if config.masking == "padded":
        summary["expected_ratio"] = expected_mask_ratio(height, width, config.mask_spec())
    if image_path:
        masked_path = _stem(output_path) + "_image.png"
        write_png(np.clip(apply_mask(image, mask), 0.0, 1.0), masked_path)
        summary["masked_image"] = masked_path
    return summary


def cmd_context_forward(
    volume_path: str, weights_path: str, output_dir: str, workers: int = 1
) -> Dict[str, Any]:
    """One 3-channel PFM per slice of the stack."""
    weights = load_context_weights(weights_path)
    volume = read_volume(volume_path)
    outputs = forward_volume(volume, weights, workers)

    os.makedirs(output_dir, exist_ok=True)
    written = []
    for z, raster in enumerate(outputs):
        path = os.path.join(output_dir, f"slice_{z:04d}.pfm")
        write_pfm(raster, path)
        written.append(path)
    logger.info("context block over %d slices written to %s", len(written), output_dir)
    return {"slices": len(written), "height": volume.height, "width": volume.width}
