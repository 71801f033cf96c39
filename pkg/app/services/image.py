"""Read-only evidence inputs: extracted trees (directory or TAR) and raw images."""

from __future__ import annotations

import hashlib
import logging
import mmap
import os
import stat
import tarfile
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple, Union

from app.errors import EvidenceNotFoundError, EvidenceOpenError

logger = logging.getLogger(__name__)

_CHUNK = 1024 * 1024


@dataclass(frozen=True)
class TreeEntry:
    path: str
    size: int
    reader: Callable[[], bytes]


def _normalize(path: str) -> str:
    parts = [part for part in path.replace("\\", "/").split("/") if part not in ("", ".")]
    return "/" + "/".join(parts)


class EvidenceTree:
    def __init__(
        self,
        label: str,
        entries: Dict[str, TreeEntry],
        source: Optional[str] = None,
        case_fallback: bool = True,
    ) -> None:
        self.label = label
        self.source = source
        self.case_fallback = case_fallback
        self._entries = dict(sorted(entries.items()))
        self._folded: Dict[str, List[str]] = {}
        for path in self._entries:
            self._folded.setdefault(path.lower(), []).append(path)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, path: str) -> bool:
        return self.resolve(path) is not None

    def paths(self) -> List[str]:
        return list(self._entries)

    def resolve(self, path: str) -> Optional[str]:
        """Exact match first, then a unique case-insensitive match."""

        normalized = _normalize(path)
        if normalized in self._entries:
            return normalized
        if not self.case_fallback:
            return None
        candidates = self._folded.get(normalized.lower(), [])
        return candidates[0] if len(candidates) == 1 else None

    def size(self, path: str) -> int:
        return self._entry(path).size

    def read(self, path: str) -> bytes:
        return self._entry(path).reader()

    def _entry(self, path: str) -> TreeEntry:
        resolved = self.resolve(path)
        if resolved is None:
            raise EvidenceNotFoundError(path)
        return self._entries[resolved]

    def list_dir(self, dir_path: str) -> List[str]:
        """Direct file children of a directory, case-insensitive when exact fails."""

        prefix = _normalize(dir_path).rstrip("/") + "/"
        exact = [p for p in self._entries if p.startswith(prefix) and "/" not in p[len(prefix) :]]
        if exact or not self.case_fallback:
            return exact
        lowered = prefix.lower()
        return [
            p
            for p in self._entries
            if p.lower().startswith(lowered) and "/" not in p[len(prefix) :]
        ]

    def listing(self) -> List[Tuple[str, int, str]]:
        return [
            (path, entry.size, hashlib.md5(entry.reader()).hexdigest())
            for path, entry in self._entries.items()
        ]

    def digest(self) -> str:
        """SHA1 over the sorted (path, size, MD5) listing."""

        sha1 = hashlib.sha1()
        for path, size, md5 in self.listing():
            sha1.update(f"{path}\t{size}\t{md5}\n".encode("utf-8"))
        return sha1.hexdigest()


def _file_reader(path: str) -> Callable[[], bytes]:
    def read() -> bytes:
        with open(path, "rb") as handle:
            return handle.read()

    return read


def _tar_reader(archive: str, offset: int, size: int) -> Callable[[], bytes]:
    def read() -> bytes:
        with open(archive, "rb") as handle:
            handle.seek(offset)
            return handle.read(size)

    return read


def _walk_directory(root: str, warnings: Optional[List[str]]) -> Dict[str, TreeEntry]:
    entries: Dict[str, TreeEntry] = {}

    def on_error(exc: OSError) -> None:
        message = f"unreadable directory skipped: {exc.filename}"
        logger.warning("[SCAN] %s", message)
        if warnings is not None:
            warnings.append(message)

    for dirpath, dirnames, filenames in os.walk(root, onerror=on_error, followlinks=False):
        dirnames.sort()
        for name in sorted(filenames):
            full = os.path.join(dirpath, name)
            try:
                info = os.lstat(full)
            except OSError as exc:
                on_error(exc)
                continue
            if not stat.S_ISREG(info.st_mode):
                continue
            if not os.access(full, os.R_OK):
                message = f"unreadable file skipped: {full}"
                logger.warning("[SCAN] %s", message)
                if warnings is not None:
                    warnings.append(message)
                continue
            rel = _normalize(os.path.relpath(full, root))
            entries[rel] = TreeEntry(rel, info.st_size, _file_reader(full))
    return entries


def _walk_tar(archive: str, warnings: Optional[List[str]]) -> Dict[str, TreeEntry]:
    entries: Dict[str, TreeEntry] = {}
    try:
        with tarfile.open(archive, mode="r:") as tar:
            for member in tar:
                if not member.isreg():
                    continue
                if member.sparse:
                    message = f"sparse TAR member skipped: {member.name}"
                    logger.warning("[SCAN] %s", message)
                    if warnings is not None:
                        warnings.append(message)
                    continue
                rel = _normalize(member.name)
                entries[rel] = TreeEntry(
                    rel, member.size, _tar_reader(archive, member.offset_data, member.size)
                )
    except tarfile.TarError as exc:
        raise EvidenceOpenError(f"cannot read TAR archive {archive}: {exc}") from None
    return entries


def open_tree(
    source: str,
    label: Optional[str] = None,
    warnings: Optional[List[str]] = None,
    case_fallback: bool = True,
) -> EvidenceTree:
    if not os.path.exists(source):
        raise EvidenceOpenError(f"evidence source does not exist: {source}")
    if os.path.isdir(source):
        if not os.access(source, os.R_OK | os.X_OK):
            raise EvidenceOpenError(f"evidence directory is not readable: {source}")
        entries = _walk_directory(source, warnings)
    elif tarfile.is_tarfile(source):
        entries = _walk_tar(source, warnings)
    else:
        raise EvidenceOpenError(f"not a directory or TAR archive: {source}")
    tree = EvidenceTree(label or os.path.basename(source.rstrip("/")), entries, source, case_fallback)
    logger.info("[SCAN] opened %s: %d files", source, len(tree))
    return tree


def tree_from_mapping(
    label: str,
    files: Dict[str, bytes],
    case_fallback: bool = True,
) -> EvidenceTree:
    """In-memory tree, used by the corpus generator and tests."""

    entries = {
        _normalize(path): TreeEntry(_normalize(path), len(body), (lambda b=body: b))
        for path, body in files.items()
    }
    return EvidenceTree(label, entries, None, case_fallback)


class RawImage:
    """Flat byte image with random access; no filesystem decoding."""

    def __init__(
        self,
        data: Union[bytes, mmap.mmap],
        source: Optional[str] = None,
        label: str = "raw",
    ) -> None:
        self.data = data
        self.source = source
        self.label = label

    def __len__(self) -> int:
        return len(self.data)

    def read(self, offset: int, length: int) -> bytes:
        if offset < 0 or offset > len(self.data):
            raise ValueError(f"offset {offset} outside image of {len(self.data)} bytes")
        return bytes(self.data[offset : offset + length])

    def find(self, needle: bytes, start: int = 0, end: Optional[int] = None) -> int:
        if end is None:
            return self.data.find(needle, start)
        return self.data.find(needle, start, end)

    def sha1(self) -> str:
        sha1 = hashlib.sha1()
        for offset in range(0, len(self.data), _CHUNK):
            sha1.update(self.data[offset : offset + _CHUNK])
        return sha1.hexdigest()

    def close(self) -> None:
        if isinstance(self.data, mmap.mmap):
            self.data.close()

    def __enter__(self) -> "RawImage":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def open_image(path: str, label: str = "raw") -> RawImage:
    try:
        with open(path, "rb") as handle:
            if os.fstat(handle.fileno()).st_size == 0:
                return RawImage(b"", path, label)
            mapped = mmap.mmap(handle.fileno(), 0, access=mmap.ACCESS_READ)
    except OSError as exc:
        raise EvidenceOpenError(f"cannot open raw image {path}: {exc}") from None
    return RawImage(mapped, path, label)


__all__ = [
    "EvidenceTree",
    "RawImage",
    "TreeEntry",
    "open_image",
    "open_tree",
    "tree_from_mapping",
]
