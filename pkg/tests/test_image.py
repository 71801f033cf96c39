from __future__ import annotations

import hashlib
import os
import tarfile

import pytest

from app.errors import EvidenceNotFoundError, EvidenceOpenError
from app.services.image import RawImage, open_image, open_tree, tree_from_mapping

FILES = {
    "data/data/com.dropbox.android/databases/db.db": b"SQLite format 3\x00" + b"\x00" * 84,
    "data/data/com.dropbox.android/files/log.txt": b"1335445600 [INFO] Account linked\n",
    "Android/data/com.dropbox.android/cache/thumbs/01.jpg": b"\xff\xd8\xff\xe0thumb",
    "Android/data/com.dropbox.android/cache/thumbs/nested/deeper.jpg": b"\xff\xd8\xffdeep",
}


def _write_tree(root):
    for rel, body in FILES.items():
        path = os.path.join(root, *rel.split("/"))
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "wb") as handle:
            handle.write(body)


@pytest.fixture
def evidence_dir(tmp_path):
    root = tmp_path / "extracted"
    _write_tree(root)
    return str(root)


def test_directory_and_tar_give_the_same_tree(evidence_dir, tmp_path):
    archive = str(tmp_path / "extracted.tar")
    with tarfile.open(archive, "w") as tar:
        tar.add(evidence_dir, arcname=".")

    from_dir = open_tree(evidence_dir, "internal")
    from_tar = open_tree(archive, "internal")
    assert from_dir.paths() == from_tar.paths()
    assert from_dir.digest() == from_tar.digest()
    for rel, body in FILES.items():
        assert from_tar.read("/" + rel) == body
        assert from_dir.size("/" + rel) == len(body)


def test_digest_ignores_location_and_label(evidence_dir, tmp_path):
    copy = tmp_path / "elsewhere"
    _write_tree(copy)
    assert open_tree(evidence_dir, "a").digest() == open_tree(str(copy), "b").digest()


def test_case_fallback_resolution():
    tree = tree_from_mapping("internal", {"/Library/Preferences/app.plist": b"x"})
    assert tree.resolve("/library/preferences/APP.plist") == "/Library/Preferences/app.plist"
    strict = tree_from_mapping("internal", {"/Library/Preferences/app.plist": b"x"}, case_fallback=False)
    assert strict.resolve("/library/preferences/app.plist") is None
    with pytest.raises(EvidenceNotFoundError):
        strict.read("/library/preferences/app.plist")


def test_case_fallback_refuses_ambiguous_names():
    tree = tree_from_mapping("internal", {"/Docs/a.txt": b"1", "/docs/a.txt": b"2"})
    assert tree.resolve("/DOCS/A.TXT") is None
    assert tree.read("/docs/a.txt") == b"2"


def test_list_dir_returns_direct_children_only(evidence_dir):
    tree = open_tree(evidence_dir, "sd")
    assert tree.list_dir("/Android/data/com.dropbox.android/cache/thumbs") == [
        "/Android/data/com.dropbox.android/cache/thumbs/01.jpg"
    ]
    assert tree.list_dir("/android/DATA/com.dropbox.android/cache/thumbs") == [
        "/Android/data/com.dropbox.android/cache/thumbs/01.jpg"
    ]


def test_open_tree_errors(tmp_path):
    with pytest.raises(EvidenceOpenError):
        open_tree(str(tmp_path / "missing"))
    plain = tmp_path / "notes.txt"
    plain.write_bytes(b"just text")
    with pytest.raises(EvidenceOpenError):
        open_tree(str(plain))


def test_raw_image_access(tmp_path):
    body = b"\x80" * 100 + b"%PDF-1.4" + b"\x80" * 100
    path = tmp_path / "raw.img"
    path.write_bytes(body)
    with open_image(str(path)) as image:
        assert len(image) == len(body)
        assert image.find(b"%PDF") == 100
        assert image.read(100, 8) == b"%PDF-1.4"
        assert image.sha1() == hashlib.sha1(body).hexdigest()
        with pytest.raises(ValueError):
            image.read(-1, 4)


def test_empty_raw_image(tmp_path):
    path = tmp_path / "empty.img"
    path.write_bytes(b"")
    image = open_image(str(path), "raw")
    assert len(image) == 0
    assert image.sha1() == hashlib.sha1(b"").hexdigest()


def test_in_memory_raw_image_label():
    assert RawImage(b"abc", label="unallocated").label == "unallocated"
