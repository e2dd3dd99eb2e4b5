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

"""Dataset discovery, per-image seeds, atomic writes and the worker pool."""

import hashlib
import logging
import os
import re
import tempfile
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Sequence, TypeVar

from pseudocell.constants import ENV_WORKERS, IMAGE_SUFFIXES
from pseudocell.errors import InputError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def natural_sort_key(filename: str) -> List:
    filename = os.path.basename(filename)
    parts = re.split(r"(\d+)", filename)
    return [int(part) if part.isdigit() else part.lower() for part in parts]


def is_image_file(filename: str, suffixes: Sequence[str] = IMAGE_SUFFIXES) -> bool:
    return filename.lower().endswith(tuple(suffixes))


def get_sorted_image_files(
    directory: str, suffixes: Sequence[str] = IMAGE_SUFFIXES
) -> List[str]:
    """All image files below ``directory``, as posix paths relative to it."""
    if not os.path.isdir(directory):
        raise InputError(f"input directory does not exist: {directory}")

    image_files: List[str] = []
    for root, dirs, files in os.walk(directory):
        dirs.sort()
        for file in files:
            if is_image_file(file, suffixes):
                rel = os.path.relpath(os.path.join(root, file), directory)
                image_files.append(rel.replace(os.sep, "/"))

    image_files.sort(key=lambda p: (natural_sort_key(os.path.dirname(p)), natural_sort_key(p)))
    return image_files


def contained_relpath(path: str) -> str:
    """``path`` as a posix relative path that cannot leave the directory it is joined to.

    Drive letters, leading separators and ``.``/``..`` components are dropped.
    """
    drive_free = os.path.splitdrive(path)[1].replace("\\", "/")
    parts = [p for p in drive_free.split("/") if p not in ("", ".", "..")]
    return "/".join(parts)


def derive_seed(global_seed: int, relpath: str) -> int:
    """64-bit seed for one image, stable under dataset subsetting."""
    key = f"{global_seed}:{relpath.replace(os.sep, '/')}".encode("utf-8")
    digest = hashlib.sha256(key).digest()
    return int.from_bytes(digest[:8], "little")


def atomic_write_bytes(path: str, payload: bytes) -> None:
    """Write via a temp file in the same directory, then rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def default_workers() -> int:
    value = os.environ.get(ENV_WORKERS)
    if not value:
        return 1
    try:
        workers = int(value)
    except ValueError:
        raise InputError(f"{ENV_WORKERS} must be an integer, got {value!r}")
    if workers < 1:
        raise InputError(f"{ENV_WORKERS} must be >= 1, got {workers}")
    return workers


def run_pool(func: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """Map ``func`` over ``items`` with a bounded pool; results keep input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    logger.debug("processing %d items with %d workers", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
