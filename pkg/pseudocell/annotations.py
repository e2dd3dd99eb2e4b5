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

"""Annotation and detection JSON documents.

Annotations::

    {"images": [{"id": 1, "path": "a.png", "height": 384, "width": 384}],
     "annotations": [{"image_id": 1, "cx": 100.0, "cy": 150.0, "w": 40.0, "h": 20.0}]}

Detections, one object per image or a list of them::

    {"image_id": 1, "detections": [{"x_min": 80.0, "y_min": 140.0,
                                    "w": 40.0, "h": 20.0, "score": 0.97}]}
"""

import json
import logging
from typing import Any, Dict, List, Mapping, Sequence

from pseudocell.dataset import atomic_write_text
from pseudocell.errors import InputError
from pseudocell.model import AnnotationSet, CellAnnotation, Detection, ImageInfo

logger = logging.getLogger(__name__)


def _load_json(path: str) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file")
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON: {e}")


def _number(record: Mapping[str, Any], key: str, where: str) -> float:
    if key not in record:
        raise InputError(f"{where}: missing field {key!r}")
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{where}: field {key!r} must be a number")
    return float(value)


def _integer(record: Mapping[str, Any], key: str, where: str) -> int:
    if key not in record:
        raise InputError(f"{where}: missing field {key!r}")
    value = record[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise InputError(f"{where}: field {key!r} must be an integer")
    return value


def _list(doc: Mapping[str, Any], key: str, path: str) -> List[Any]:
    value = doc.get(key, [])
    if not isinstance(value, list):
        raise InputError(f"{path}: {key!r} must be a list")
    return value


def parse_annotations(doc: Any, path: str = "<annotations>") -> AnnotationSet:
    if not isinstance(doc, dict):
        raise InputError(f"{path}: expected a JSON object")

    images: Dict[int, ImageInfo] = {}
    for i, record in enumerate(_list(doc, "images", path)):
        where = f"{path}: images[{i}]"
        if not isinstance(record, dict):
            raise InputError(f"{where}: expected an object")
        image_id = _integer(record, "id", where)
        if image_id in images:
            raise InputError(f"{where}: duplicate image id {image_id}")
        image_path = record.get("path", "")
        if not isinstance(image_path, str):
            raise InputError(f"{where}: field 'path' must be a string")
        try:
            images[image_id] = ImageInfo(
                image_id,
                image_path,
                _integer(record, "height", where),
                _integer(record, "width", where),
            )
        except InputError as e:
            raise InputError(f"{where}: {e}")

    cells: Dict[int, List[CellAnnotation]] = {image_id: [] for image_id in images}
    for i, record in enumerate(_list(doc, "annotations", path)):
        where = f"{path}: annotations[{i}]"
        if not isinstance(record, dict):
            raise InputError(f"{where}: expected an object")
        image_id = _integer(record, "image_id", where)
        if image_id not in images:
            raise InputError(f"{where}: unknown image id {image_id}")
        try:
            cell = CellAnnotation(
                _number(record, "cx", where),
                _number(record, "cy", where),
                _number(record, "w", where),
                _number(record, "h", where),
            )
        except InputError as e:
            raise InputError(f"{where}: {e}")
        info = images[image_id]
        if not cell.inside(info.height, info.width):
            raise InputError(f"{where}: centroid outside image {image_id}")
        cells[image_id].append(cell)

    logger.debug("%s: %d images, %d cells", path, len(images), sum(map(len, cells.values())))
    return AnnotationSet(images, cells)


def read_annotations(path: str) -> AnnotationSet:
    return parse_annotations(_load_json(path), path)


def annotations_to_dict(annotations: AnnotationSet) -> Dict[str, Any]:
    return {
        "images": [
            {"id": info.id, "path": info.path, "height": info.height, "width": info.width}
            for info in sorted(annotations.images.values(), key=lambda i: i.id)
        ],
        "annotations": [
            {"image_id": image_id, "cx": c.cx, "cy": c.cy, "w": c.w, "h": c.h}
            for image_id in sorted(annotations.cells)
            for c in annotations.cells[image_id]
        ],
    }


def write_annotations(annotations: AnnotationSet, path: str) -> None:
    atomic_write_text(path, json.dumps(annotations_to_dict(annotations), indent=2) + "\n")


def parse_detections(doc: Any, path: str = "<detections>") -> Dict[int, List[Detection]]:
    records = doc if isinstance(doc, list) else [doc]
    result: Dict[int, List[Detection]] = {}
    for i, record in enumerate(records):
        where = f"{path}: [{i}]"
        if not isinstance(record, dict):
            raise InputError(f"{where}: expected an object")
        image_id = _integer(record, "image_id", where)
        if image_id in result:
            raise InputError(f"{where}: duplicate image id {image_id}")
        detections: List[Detection] = []
        for j, det in enumerate(_list(record, "detections", where)):
            det_where = f"{where}.detections[{j}]"
            if not isinstance(det, dict):
                raise InputError(f"{det_where}: expected an object")
            try:
                detections.append(
                    Detection(
                        _number(det, "x_min", det_where),
                        _number(det, "y_min", det_where),
                        _number(det, "w", det_where),
                        _number(det, "h", det_where),
                        _number(det, "score", det_where),
                    )
                )
            except InputError as e:
                raise InputError(f"{det_where}: {e}")
        result[image_id] = detections
    return result


def read_detections(path: str) -> Dict[int, List[Detection]]:
    return parse_detections(_load_json(path), path)


def detections_to_dict(image_id: int, detections: Sequence[Detection]) -> Dict[str, Any]:
    return {
        "image_id": image_id,
        "detections": [
            {"x_min": d.x_min, "y_min": d.y_min, "w": d.w, "h": d.h, "score": d.score}
            for d in detections
        ],
    }


def write_detections(detections: Mapping[int, Sequence[Detection]], path: str) -> None:
    """A single image is written as one object, several as a list."""
    docs = [detections_to_dict(k, detections[k]) for k in sorted(detections)]
    doc: Any = docs[0] if len(docs) == 1 else docs
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")
