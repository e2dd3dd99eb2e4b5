"""Tests for pseudocell.annotations module."""

import json
import tempfile

import pytest

from pseudocell.annotations import (
    parse_annotations,
    parse_detections,
    read_annotations,
    read_detections,
    write_annotations,
    write_detections,
)
from pseudocell.errors import InputError
from pseudocell.model import AnnotationSet, CellAnnotation, Detection, ImageInfo

DOC = {
    "images": [{"id": 1, "path": "a.png", "height": 64, "width": 48}],
    "annotations": [
        {"image_id": 1, "cx": 10.0, "cy": 12.0, "w": 8.0, "h": 6.0},
        {"image_id": 1, "cx": 30.5, "cy": 40.0, "w": 10.0, "h": 10.0},
    ],
}


def test_parse_annotations() -> None:
    annotations = parse_annotations(DOC)
    assert annotations.images[1] == ImageInfo(1, "a.png", 64, 48)
    assert annotations.cells_for(1) == [
        CellAnnotation(10.0, 12.0, 8.0, 6.0),
        CellAnnotation(30.5, 40.0, 10.0, 10.0),
    ]
    assert len(annotations) == 2


def test_parse_annotations_errors() -> None:
    bad_width = json.loads(json.dumps(DOC))
    bad_width["annotations"][1]["w"] = 0
    with pytest.raises(InputError, match=r"annotations\[1\]"):
        parse_annotations(bad_width)

    unknown_image = json.loads(json.dumps(DOC))
    unknown_image["annotations"][0]["image_id"] = 9
    with pytest.raises(InputError, match="unknown image id"):
        parse_annotations(unknown_image)

    not_a_list = {"images": DOC["images"], "annotations": "oops"}
    with pytest.raises(InputError):
        parse_annotations(not_a_list)


def test_parse_annotations_centroid_outside_image() -> None:
    doc = {
        "images": [{"id": 1, "path": "a.png", "height": 384, "width": 384}],
        "annotations": [{"image_id": 1, "cx": 5000, "cy": -20, "w": 10, "h": 10}],
    }
    with pytest.raises(InputError, match=r"annotations\[0\]: centroid outside image 1"):
        parse_annotations(doc)

    # last pixel row and column are still inside
    doc["annotations"][0].update(cx=383.0, cy=383.0)
    assert parse_annotations(doc).cells_for(1) == [CellAnnotation(383.0, 383.0, 10.0, 10.0)]


def test_annotations_file_roundtrip(tmp_path: "tempfile.TemporaryDirectory") -> None:
    annotations = AnnotationSet(
        {2: ImageInfo(2, "b.png", 32, 32)}, {2: [CellAnnotation(4.0, 5.0, 6.0, 7.0)]}
    )
    path = tmp_path / "ann.json"
    write_annotations(annotations, str(path))
    assert read_annotations(str(path)) == annotations


def test_detections_single_and_list(tmp_path: "tempfile.TemporaryDirectory") -> None:
    single = {"image_id": 1, "detections": [{"x_min": 1, "y_min": 2, "w": 3, "h": 4, "score": 0.9}]}
    assert parse_detections(single) == {1: [Detection(1.0, 2.0, 3.0, 4.0, 0.9)]}

    many = {1: [Detection(0.0, 0.0, 5.0, 5.0, 1.0)], 3: []}
    path = tmp_path / "det.json"
    write_detections(many, str(path))
    assert isinstance(json.loads(path.read_text()), list)
    assert read_detections(str(path)) == many


def test_detections_duplicate_image() -> None:
    doc = [{"image_id": 1, "detections": []}, {"image_id": 1, "detections": []}]
    with pytest.raises(InputError, match="duplicate"):
        parse_detections(doc)
