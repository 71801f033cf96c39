from __future__ import annotations

import hashlib
import json
import random

import pytest

from app.evidence import ObjectOrigin
from app.services.carver import builtin_signatures, carve, extract_carved, mp3_frame_length
from app.services.corpus.dataset import build_docx, build_jpeg, build_mp3, build_mp4, build_pdf
from app.services.image import RawImage

from .util import filler

MIN_IMAGE = 1024 * 1024
TRIALS = range(20)

BUILDERS = {
    "jpg": (lambda rng, size: build_jpeg(rng, size), (8_000, 60_000)),
    "pdf": (lambda rng, size: build_pdf(rng, size), (1_000, 200_000)),
    "docx": (lambda rng, size: build_docx(rng, size), (4_000, 120_000)),
    "mp3": (lambda rng, size: build_mp3(rng, size, "track"), (5_000, 300_000)),
    "mp4": (lambda rng, size: build_mp4(rng, size, 1334914769), (1_000, 300_000)),
}


def _embedded(kind: str, trial: int):
    rng = random.Random(f"carve:{kind}:{trial}")
    build, (low, high) = BUILDERS[kind]
    content = build(rng, rng.randrange(low, high))
    before = rng.randrange(0, MIN_IMAGE)
    after = max(MIN_IMAGE - before, 4096)
    return filler(rng, before) + content + filler(rng, after), content, before


@pytest.mark.parametrize("kind", sorted(BUILDERS))
@pytest.mark.parametrize("trial", TRIALS)
def test_carve_round_trip(kind, trial):
    image, content, offset = _embedded(kind, trial)
    assert len(image) >= MIN_IMAGE
    objects = carve(RawImage(image, label="raw"))
    assert len(objects) == 1, [o.logical_name for o in objects]
    obj = objects[0]
    assert obj.origin is ObjectOrigin.CARVED
    assert obj.offset == offset
    assert obj.length == len(content)
    assert obj.md5 == hashlib.md5(content).hexdigest()
    assert obj.logical_name == f"{kind}_{offset}"
    assert obj.tree == "raw"


def test_carves_several_files_in_order():
    rng = random.Random("carve:mixed")
    parts = [filler(rng, 2048)]
    expected = []
    pos = 2048
    for kind in ("pdf", "jpg", "mp4", "docx", "mp3"):
        build, (low, _high) = BUILDERS[kind]
        content = build(rng, low + 512)
        expected.append((kind, pos, hashlib.md5(content).hexdigest()))
        gap = filler(rng, rng.randrange(512, 4096))
        parts.extend([content, gap])
        pos += len(content) + len(gap)
    objects = carve(RawImage(b"".join(parts)))
    assert [(o.logical_name.split("_")[0], o.offset, o.md5) for o in objects] == expected


def test_truncated_jpeg_is_not_carved():
    rng = random.Random("carve:truncated")
    content = build_jpeg(rng, 9_000)
    image = filler(rng, 4096) + content[: len(content) // 2] + filler(rng, 4096)
    assert carve(RawImage(image)) == []


@pytest.mark.parametrize(
    "tail",
    [
        b"\xff\xd8" + b"\xff" * 10,
        b"\xff\xd8\xff\xff\xff\xc0\x00",
        b"\xff\xd8\xff\xe0\x00",
    ],
    ids=["fill-after-soi", "length-cut-off", "length-half-byte"],
)
def test_jpeg_header_at_image_end_is_rejected(tail):
    assert carve(RawImage(b"\x00" * 4096 + tail)) == []


def test_zip_without_word_part_is_plain_zip():
    import io
    import zipfile

    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", zipfile.ZIP_STORED) as archive:
        archive.writestr("notes.txt", "plain")
    rng = random.Random("carve:zip")
    objects = carve(RawImage(filler(rng, 1000) + buffer.getvalue() + filler(rng, 1000)))
    assert [o.logical_name for o in objects] == ["zip_1000"]


def test_size_cap_rejects_oversized_candidates():
    rng = random.Random("carve:cap")
    content = build_pdf(rng, 200_000)
    image = RawImage(filler(rng, 100) + content + filler(rng, 100))
    assert len(carve(image, builtin_signatures())) == 1
    # the cap is in bytes; 64 KiB is too small to reach %%EOF
    assert carve(image, builtin_signatures(64 * 1024)) == []


def test_mp3_frame_length():
    assert mp3_frame_length(b"\xff\xfb\x98\x44") == 576
    assert mp3_frame_length(b"\xff\xfb\x90\x64") == 417
    assert mp3_frame_length(b"\x00\x00\x00\x00") is None


def test_extract_carved_writes_files_and_manifest(tmp_path):
    image, content, offset = _embedded("pdf", 0)
    raw = RawImage(image)
    objects = carve(raw)
    manifest = extract_carved(raw, objects, str(tmp_path))
    with open(manifest, encoding="utf-8") as handle:
        records = json.load(handle)
    assert records == [
        {
            "file": f"pdf_{offset}.pdf",
            "offset": offset,
            "length": len(content),
            "type": "pdf",
            "md5": hashlib.md5(content).hexdigest(),
            "sha1": hashlib.sha1(content).hexdigest(),
        }
    ]
    assert (tmp_path / f"pdf_{offset}.pdf").read_bytes() == content
