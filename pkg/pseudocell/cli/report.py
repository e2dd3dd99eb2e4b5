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

"""Markdown and CSV reports for box evaluation."""

import csv
import io
import logging
from typing import Dict, List, Optional, Sequence

from pseudocell.dataset import atomic_write_text
from pseudocell.metrics import APReport

logger = logging.getLogger(__name__)

CSV_FIELDS = ("image_id", "truths", "detections", "tp", "fp", "fn")


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def write_per_image_csv(rows: Sequence[Dict[str, int]], output_file: str) -> None:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in CSV_FIELDS})
    atomic_write_text(output_file, buffer.getvalue())
    logger.info("per-image stats saved to: %s", output_file)


def generate_eval_report(
    report: APReport,
    rows: Sequence[Dict[str, int]],
    detections_path: str,
    annotations_path: str,
    output_file: Optional[str] = None,
) -> str:
    """Generate box evaluation report"""
    lines: List[str] = []
    lines.append("# Cell Detection Report")
    lines.append("")
    lines.append(f"**Detections**: `{detections_path}`")
    lines.append(f"**Annotations**: `{annotations_path}`")
    lines.append("")
    lines.append("---")
    lines.append("")

    lines.append("## Summary")
    lines.append("")
    lines.append("| Metric | Value |")
    lines.append("|--------|-------|")
    lines.append(f"| AP | {_fmt(report.ap)} |")
    lines.append(f"| AP50 | {_fmt(report.ap50)} |")
    lines.append(f"| AP75 | {_fmt(report.ap75)} |")
    lines.append(f"| AP small | {_fmt(report.ap_small)} |")
    lines.append(f"| AP medium | {_fmt(report.ap_medium)} |")
    lines.append(f"| AP large | {_fmt(report.ap_large)} |")
    lines.append("")

    total_tp = sum(r["tp"] for r in rows)
    total_fp = sum(r["fp"] for r in rows)
    total_fn = sum(r["fn"] for r in rows)
    lines.append("## Per Image (IoU 0.5)")
    lines.append("")
    lines.append("| Image | Truths | Detections | TP | FP | FN |")
    lines.append("|-------|--------|------------|----|----|----|")
    for r in rows:
        lines.append(
            f"| {r['image_id']} | {r['truths']} | {r['detections']} "
            f"| {r['tp']} | {r['fp']} | {r['fn']} |"
        )
    lines.append(f"| **Total** | | | {total_tp} | {total_fp} | {total_fn} |")
    lines.append("")

    if total_fp == 0 and total_fn == 0:
        lines.append("✅ **Every cell matched at IoU 0.5**")
        lines.append("")

    content = "\n".join(lines)
    if output_file:
        atomic_write_text(output_file, content)
        logger.info("report saved to: %s", output_file)
    return content
