"""Tests for pseudocell.config module."""

import json
import tempfile

import pytest

from pseudocell.config import DefaultPipelineParameters, PipelineConfig, build_config
from pseudocell.errors import InputError


def test_defaults() -> None:
    config = PipelineConfig()
    assert config.colormap == DefaultPipelineParameters.colormap == "nipy_spectral"
    assert config.mask_spec().period == 18
    assert config.threshold == 0.75


def test_validation() -> None:
    with pytest.raises(InputError):
        PipelineConfig(threshold=1.0)
    with pytest.raises(InputError):
        PipelineConfig(colormap="jet")
    with pytest.raises(InputError):
        PipelineConfig(masking="random")
    with pytest.raises(InputError):
        PipelineConfig(patch=0)
    with pytest.raises(InputError):
        PipelineConfig(input_dir="/does/not/exist").require_input_dir()


def test_no_colormap_means_gray_target() -> None:
    assert PipelineConfig(colormap="none").target == "gray"
    assert PipelineConfig(colormap="none", target="edges").target == "edges"


def test_layering(tmp_path: "tempfile.TemporaryDirectory", monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("PSEUDOCELL_WORKERS", "3")
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"colormap": "viridis", "seed": 5, "patch": 16}))

    config = build_config(str(path), {"seed": 9, "patch": None})
    assert config.colormap == "viridis"
    assert config.seed == 9
    assert config.patch == 16
    assert config.workers == 3

    assert build_config().workers == 3


def test_bad_config_file(tmp_path: "tempfile.TemporaryDirectory") -> None:
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"colour": "viridis"}))
    with pytest.raises(InputError, match="unknown config keys"):
        build_config(str(path))
    path.write_text("[1, 2]")
    with pytest.raises(InputError):
        build_config(str(path))
    with pytest.raises(InputError):
        build_config(str(tmp_path / "missing.json"))
