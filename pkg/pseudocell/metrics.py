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

"""Evaluation metrics and training losses.

SSIM is the single global-statistics formula (no sliding window). Box AP
follows the COCO protocol: score-ordered greedy matching per image,
101-point interpolated precision, IoU thresholds 0.50:0.95:0.05, at most
100 detections per image, and size classes by ground-truth box area.
"""

import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from pseudocell.constants import (
    COCO_IOU_THRESHOLDS,
    COCO_LARGE_AREA,
    COCO_MAX_DETS,
    COCO_RECALL_POINTS,
    COCO_SMALL_AREA,
    HEATMAP_THRESHOLD,
    HUBER_DELTA,
    LOSS_WEIGHTS,
    SSIM_K1,
    SSIM_K2,
)
from pseudocell.errors import InputError
from pseudocell.model import (
    Box,
    CellAnnotation,
    Detection,
    GrayImage,
    RgbImage,
    TargetMaps,
    as_gray_image,
    require_same_shape,
)

ArrayOrFloat = Union[float, np.ndarray]

SIZE_RANGES: Dict[str, Tuple[float, float]] = {
    "all": (0.0, math.inf),
    "small": (0.0, COCO_SMALL_AREA),
    "medium": (COCO_SMALL_AREA, COCO_LARGE_AREA),
    "large": (COCO_LARGE_AREA, math.inf),
}


# ============ Reconstruction metrics ============


def ssim(x1: GrayImage, x2: GrayImage, L: float = 1.0) -> float:
    """Global SSIM of two gray rasters with dynamic range ``L``."""
    x1 = as_gray_image(x1, "x1")
    x2 = as_gray_image(x2, "x2")
    require_same_shape(x1, x2, "ssim")
    if L <= 0:
        raise InputError(f"dynamic range L must be > 0, got {L}")

    c1 = (SSIM_K1 * L) ** 2
    c2 = (SSIM_K2 * L) ** 2
    mu1, mu2 = float(x1.mean()), float(x2.mean())
    d1, d2 = x1 - mu1, x2 - mu2
    var1 = float(np.mean(d1 * d1))
    var2 = float(np.mean(d2 * d2))
    cov = float(np.mean(d1 * d2))

    numerator = (2.0 * mu1 * mu2 + c1) * (2.0 * cov + c2)
    denominator = (mu1 * mu1 + mu2 * mu2 + c1) * (var1 + var2 + c2)
    return numerator / denominator


def ssim_color(x1: RgbImage, x2: RgbImage, L: float = 1.0) -> float:
    """Mean of the per-channel SSIM scores."""
    a = np.asarray(x1, dtype=np.float64)
    b = np.asarray(x2, dtype=np.float64)
    if a.ndim != 3 or b.ndim != 3:
        raise InputError("ssim_color needs (H, W, C) rasters")
    require_same_shape(a, b, "ssim_color")
    return float(np.mean([ssim(a[..., c], b[..., c], L) for c in range(a.shape[2])]))


def mse(x1: np.ndarray, x2: np.ndarray) -> float:
    """Pixel-wise mean squared error."""
    a = np.asarray(x1, dtype=np.float64)
    b = np.asarray(x2, dtype=np.float64)
    require_same_shape(a, b, "mse")
    return float(np.mean((a - b) ** 2))


# ============ Heatmap mIoU ============


def _iou_counts(pred: np.ndarray, gt: np.ndarray) -> float:
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    total = tp + fp + fn
    # a class absent from both rasters counts as perfectly segmented
    return 1.0 if total == 0 else tp / total


def heatmap_iou_per_class(
    pred: GrayImage, gt: GrayImage, t: float = HEATMAP_THRESHOLD
) -> Tuple[float, float]:
    """IoU of (background, centroid blobs) after thresholding both maps."""
    pred = as_gray_image(pred, "pred")
    gt = as_gray_image(gt, "gt")
    require_same_shape(pred, gt, "miou_heatmap")
    p, g = pred > t, gt > t
    return _iou_counts(~p, ~g), _iou_counts(p, g)


def miou_heatmap(pred: GrayImage, gt: GrayImage, t: float = HEATMAP_THRESHOLD) -> float:
    background, blobs = heatmap_iou_per_class(pred, gt, t)
    return (background + blobs) / 2.0


# ============ Box AP ============


@dataclass(frozen=True)
class APReport:
    ap: float
    ap50: float
    ap75: float
    ap_small: Optional[float] = None
    ap_medium: Optional[float] = None
    ap_large: Optional[float] = None

    def to_dict(self) -> Dict[str, Optional[float]]:
        return asdict(self)


@dataclass(frozen=True)
class _ImageEval:
    scores: np.ndarray
    matched: np.ndarray  # (thresholds, detections)
    ignored: np.ndarray  # (thresholds, detections)
    n_truths: int


def box_iou(a: Box, b: Box) -> float:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    ix = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    inter = ix * iy
    union = aw * ah + bw * bh - inter
    return inter / union if union > 0 else 0.0


def _in_range(area: float, size_range: Tuple[float, float]) -> bool:
    lo, hi = size_range
    return lo <= area < hi


def _evaluate_image(
    detections: Sequence[Detection],
    truths: Sequence[CellAnnotation],
    size_range: Tuple[float, float],
    thresholds: Sequence[float],
    max_dets: Optional[int] = COCO_MAX_DETS,
) -> _ImageEval:
    # truths inside the size range are matched first
    gt_ignore_raw = [not _in_range(t.area, size_range) for t in truths]
    gt_order = sorted(range(len(truths)), key=lambda g: gt_ignore_raw[g])
    gts = [truths[g].box() for g in gt_order]
    gt_ignore = [gt_ignore_raw[g] for g in gt_order]

    det_order = sorted(range(len(detections)), key=lambda d: -detections[d].score)
    dets = [detections[d] for d in det_order[:max_dets]]

    ious = np.array([[box_iou(d.box(), g) for g in gts] for d in dets]).reshape(
        len(dets), len(gts)
    )
    matched = np.zeros((len(thresholds), len(dets)), dtype=bool)
    ignored = np.zeros((len(thresholds), len(dets)), dtype=bool)

    for ti, t in enumerate(thresholds):
        gt_taken = [False] * len(gts)
        for di, det in enumerate(dets):
            best = min(t, 1 - 1e-10)
            m = -1
            for gi in range(len(gts)):
                if gt_taken[gi]:
                    continue
                # already on a regular truth, the rest are ignored ones
                if m > -1 and not gt_ignore[m] and gt_ignore[gi]:
                    break
                if ious[di, gi] < best:
                    continue
                best = ious[di, gi]
                m = gi
            if m == -1:
                ignored[ti, di] = not _in_range(det.area, size_range)
                continue
            gt_taken[m] = True
            matched[ti, di] = True
            ignored[ti, di] = gt_ignore[m]

    return _ImageEval(
        scores=np.array([d.score for d in dets], dtype=np.float64),
        matched=matched,
        ignored=ignored,
        n_truths=len(gts) - sum(gt_ignore),
    )


def _average_precision(evals: Sequence[_ImageEval], ti: int) -> Optional[float]:
    n_truths = sum(e.n_truths for e in evals)
    if n_truths == 0:
        return None

    scores = np.concatenate([e.scores for e in evals])
    matched = np.concatenate([e.matched[ti] for e in evals])
    ignored = np.concatenate([e.ignored[ti] for e in evals])
    order = np.argsort(-scores, kind="mergesort")
    keep = order[~ignored[order]]

    tp_sum = np.cumsum(matched[keep]).astype(np.float64)
    fp_sum = np.cumsum(~matched[keep]).astype(np.float64)
    if tp_sum.size == 0:
        return 0.0

    recall = tp_sum / n_truths
    precision = tp_sum / (tp_sum + fp_sum)
    # precision envelope, non-increasing in recall
    precision = np.maximum.accumulate(precision[::-1])[::-1]

    recall_points = np.linspace(0.0, 1.0, COCO_RECALL_POINTS)
    inds = np.searchsorted(recall, recall_points, side="left")
    q = np.where(inds < precision.size, precision[np.minimum(inds, precision.size - 1)], 0.0)
    return float(np.mean(q))


def _check_ids(
    detections: Mapping[int, Sequence[Detection]],
    truths: Mapping[int, Sequence[CellAnnotation]],
) -> None:
    unknown = sorted(set(detections) - set(truths))
    if unknown:
        raise InputError(f"detections reference unknown image ids {unknown}")


def coco_ap(
    detections: Mapping[int, Sequence[Detection]],
    truths: Mapping[int, Sequence[CellAnnotation]],
) -> APReport:
    _check_ids(detections, truths)
    if sum(len(v) for v in truths.values()) == 0:
        raise InputError("no ground-truth boxes to evaluate")

    image_ids = sorted(truths)
    per_range: Dict[str, List[Optional[float]]] = {}
    for name, size_range in SIZE_RANGES.items():
        evals = [
            _evaluate_image(detections.get(i, []), truths[i], size_range, COCO_IOU_THRESHOLDS)
            for i in image_ids
        ]
        per_range[name] = [
            _average_precision(evals, ti) for ti in range(len(COCO_IOU_THRESHOLDS))
        ]

    def mean_ap(values: List[Optional[float]]) -> Optional[float]:
        if values[0] is None:
            return None
        return float(np.mean([v for v in values if v is not None]))

    overall = per_range["all"]
    return APReport(
        ap=mean_ap(overall) or 0.0,
        ap50=overall[0] or 0.0,
        ap75=overall[COCO_IOU_THRESHOLDS.index(0.75)] or 0.0,
        ap_small=mean_ap(per_range["small"]),
        ap_medium=mean_ap(per_range["medium"]),
        ap_large=mean_ap(per_range["large"]),
    )


def per_image_stats(
    detections: Mapping[int, Sequence[Detection]],
    truths: Mapping[int, Sequence[CellAnnotation]],
    iou_threshold: float = 0.5,
) -> List[Dict[str, int]]:
    """Per-image match counts at one IoU threshold, over every detection of an image."""
    _check_ids(detections, truths)
    rows: List[Dict[str, int]] = []
    for image_id in sorted(truths):
        dets = detections.get(image_id, [])
        ev = _evaluate_image(
            dets, truths[image_id], SIZE_RANGES["all"], [iou_threshold], max_dets=None
        )
        tp = int(ev.matched[0].sum())
        rows.append(
            {
                "image_id": image_id,
                "truths": len(truths[image_id]),
                "detections": len(dets),
                "tp": tp,
                "fp": int(ev.scores.size) - tp,
                "fn": len(truths[image_id]) - tp,
            }
        )
    return rows


# ============ Losses ============


def huber(y: ArrayOrFloat, y_hat: ArrayOrFloat, delta: float = HUBER_DELTA) -> ArrayOrFloat:
    """``0.5 d^2`` for ``|d| <= delta``, else ``delta * (|d| - 0.5 delta)``."""
    d = np.abs(np.asarray(y, dtype=np.float64) - np.asarray(y_hat, dtype=np.float64))
    loss = np.where(d <= delta, 0.5 * d * d, delta * (d - 0.5 * delta))
    if loss.ndim == 0:
        return float(loss)
    return loss


def huber_mean(y: np.ndarray, y_hat: np.ndarray, delta: float = HUBER_DELTA) -> float:
    a = np.asarray(y, dtype=np.float64)
    b = np.asarray(y_hat, dtype=np.float64)
    require_same_shape(a, b, "huber_mean")
    return float(np.mean(huber(a, b, delta)))


def total_loss(l_heatmap: float, l_height: float, l_width: float) -> float:
    w_heatmap, w_height, w_width = LOSS_WEIGHTS
    return w_heatmap * l_heatmap + w_height * l_height + w_width * l_width


def target_loss(pred: TargetMaps, truth: TargetMaps) -> float:
    """Weighted sum of the per-map mean Huber losses."""
    return total_loss(
        huber_mean(truth.heatmap, pred.heatmap),
        huber_mean(truth.height_map, pred.height_map),
        huber_mean(truth.width_map, pred.width_map),
    )
