"""Output storage: reports, generated corpora and carved files under an output root."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from typing import Any


@dataclass
class SaveResult:
    path: str
    size_bytes: int
    sha1: str


def output_path(base_dir: str, key: str) -> str:
    """Maps a slash-separated key below base_dir; keys may not climb out of it."""

    parts = [part for part in key.replace("\\", "/").split("/") if part not in ("", ".")]
    if not parts or ".." in parts:
        raise ValueError(f"invalid output key: {key!r}")
    return os.path.join(os.path.abspath(base_dir), *parts)


def save_bytes(base_dir: str, key: str, body: bytes) -> SaveResult:
    path = output_path(base_dir, key)
    directory = os.path.dirname(path)
    os.makedirs(directory, exist_ok=True)
    # write-then-rename so a crashed run never leaves a half-written file
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".partial-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(body)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return SaveResult(path, len(body), hashlib.sha1(body).hexdigest())


def save_text(base_dir: str, key: str, text: str) -> SaveResult:
    return save_bytes(base_dir, key, text.encode("utf-8"))


def dump_json(value: Any) -> str:
    """Stable JSON text: sorted keys, two-space indent, trailing newline."""

    return json.dumps(value, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def save_json(base_dir: str, key: str, value: Any) -> SaveResult:
    return save_text(base_dir, key, dump_json(value))


def split_output(path: str) -> tuple:
    """(directory, file name) of a user-supplied output file path."""

    absolute = os.path.abspath(path)
    return os.path.dirname(absolute), os.path.basename(absolute)


__all__ = [
    "SaveResult",
    "dump_json",
    "output_path",
    "save_bytes",
    "save_json",
    "save_text",
    "split_output",
]
