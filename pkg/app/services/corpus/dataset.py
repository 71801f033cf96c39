"""The twenty test files: exact sizes, carvable headers and footers, seeded bodies."""

from __future__ import annotations

import hashlib
import io
import random
import struct
import zipfile
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property, lru_cache
from typing import Callable, Dict, List, Optional, Tuple

from PIL import Image, ImageDraw


class Manipulation(str, Enum):
    VIEWED = "viewed"
    VIEWED_OFFLINE = "viewed_offline"
    NO_MANIPULATION = "no_manipulation"
    VIEWED_DELETED = "viewed_deleted"

    @property
    def viewed(self) -> bool:
        return self is not Manipulation.NO_MANIPULATION


# each file type gets four files, manipulated in this order
_GROUP = (
    Manipulation.VIEWED,
    Manipulation.VIEWED_OFFLINE,
    Manipulation.NO_MANIPULATION,
    Manipulation.VIEWED_DELETED,
)

DATASET_TABLE: Tuple[Tuple[str, int], ...] = (
    ("01.jpg", 43183),
    ("02.jpg", 6265),
    ("03.jpg", 102448),
    ("04.jpg", 5548),
    ("05.mp3", 3997696),
    ("06.mp3", 2703360),
    ("07.mp3", 3512009),
    ("08.mp3", 4266779),
    ("09.mp4", 831687),
    ("10.mp4", 245779),
    ("11.mp4", 11986533),
    ("12.mp4", 21258947),
    ("13.pdf", 1695706),
    ("14.pdf", 471999),
    ("15.pdf", 2371383),
    ("16.pdf", 1688736),
    ("17.docx", 84272),
    ("18.docx", 85091),
    ("19.docx", 14860),
    ("20.docx", 20994),
)

# the dataset was uploaded on 2012-04-20; 03.jpg carries the reference timestamps
REFERENCE_CREATED = 1334914769
REFERENCE_INDEX = 3
UPLOAD_SPACING = 61

_LETTERS = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz"
_LETTER_TABLE = bytes(_LETTERS[i % len(_LETTERS)] for i in range(256))


def manipulation_for(index: int) -> Manipulation:
    return _GROUP[(index - 1) % len(_GROUP)]


def created_at(index: int) -> int:
    return REFERENCE_CREATED + (index - REFERENCE_INDEX) * UPLOAD_SPACING


def updated_at(index: int) -> int:
    return created_at(index) + 2


def letters(rng: random.Random, count: int) -> bytes:
    """ASCII letters only; no JPEG, PDF, ZIP or ID3 header can start inside them."""

    if count <= 0:
        return b""
    return rng.randbytes(count).translate(_LETTER_TABLE)


@dataclass(frozen=True)
class DatasetFile:
    index: int
    name: str
    size: int
    manipulation: Manipulation
    content: bytes = field(repr=False, compare=False)

    @property
    def kind(self) -> str:
        return self.name.rsplit(".", 1)[-1]

    @property
    def offline(self) -> bool:
        return self.manipulation is Manipulation.VIEWED_OFFLINE

    @property
    def deleted(self) -> bool:
        return self.manipulation is Manipulation.VIEWED_DELETED

    @property
    def created(self) -> int:
        return created_at(self.index)

    @property
    def updated(self) -> int:
        return updated_at(self.index)

    @cached_property
    def md5(self) -> str:
        return hashlib.md5(self.content).hexdigest()

    @cached_property
    def sha1(self) -> str:
        return hashlib.sha1(self.content).hexdigest()


# JPEG ------------------------------------------------------------------------

# FF FE + 16-bit length (counts itself) + payload
MAX_COMMENT_SEGMENT = 2 + 0xFFFF
MIN_COMMENT_SEGMENT = 4


def _color(rng: random.Random) -> Tuple[int, int, int]:
    return rng.randrange(256), rng.randrange(256), rng.randrange(256)


def _render(rng: random.Random) -> Image.Image:
    width, height = 120, 90
    image = Image.new("RGB", (width, height), _color(rng))
    draw = ImageDraw.Draw(image)
    for _ in range(6):
        x0, y0 = rng.randrange(width), rng.randrange(height)
        box = (x0, y0, x0 + rng.randrange(8, 60), y0 + rng.randrange(8, 45))
        draw.ellipse(box, fill=_color(rng))
    return image


def _encode_jpeg(image: Image.Image, quality: int) -> bytes:
    buffer = io.BytesIO()
    image.save(buffer, "JPEG", quality=quality)
    return buffer.getvalue()


def _comment_segments(rng: random.Random, padding: int) -> Optional[bytes]:
    sizes: List[int] = []
    remaining = padding
    while remaining > MAX_COMMENT_SEGMENT:
        sizes.append(MAX_COMMENT_SEGMENT)
        remaining -= MAX_COMMENT_SEGMENT
    if remaining:
        if remaining < MIN_COMMENT_SEGMENT:
            if not sizes:
                return None
            sizes[-1] -= MIN_COMMENT_SEGMENT - remaining
            remaining = MIN_COMMENT_SEGMENT
        sizes.append(remaining)
    return b"".join(
        b"\xff\xfe" + struct.pack(">H", size - 2) + letters(rng, size - MIN_COMMENT_SEGMENT)
        for size in sizes
    )


def build_jpeg(rng: random.Random, size: int) -> bytes:
    image = _render(rng)
    for quality in (85, 80, 75, 70, 60, 50):
        base = _encode_jpeg(image, quality)
        padding = size - len(base)
        if padding < 0:
            continue
        segments = _comment_segments(rng, padding)
        if segments is None:
            continue
        # comment segments go right after SOI
        return base[:2] + segments + base[2:]
    raise ValueError(f"cannot build a {size}-byte JPEG")


def thumbnail(jpeg: bytes, box: Tuple[int, int] = (48, 48)) -> bytes:
    with Image.open(io.BytesIO(jpeg)) as opened:
        image = opened.convert("RGB")
    image.thumbnail(box)
    return _encode_jpeg(image, 70)


def preview_png(item: DatasetFile, page: int = 1) -> bytes:
    """A rendered page: the picture itself for images, a text page for documents."""

    if item.kind == "jpg":
        with Image.open(io.BytesIO(item.content)) as opened:
            image = opened.convert("RGB")
        image.thumbnail((160, 160))
    else:
        image = Image.new("RGB", (96, 128), "white")
        ImageDraw.Draw(image).text((6, 6), f"{item.name} p{page}", fill="black")
    buffer = io.BytesIO()
    image.save(buffer, "PNG")
    return buffer.getvalue()


# PDF -------------------------------------------------------------------------

_PDF_HEAD = (
    b"%PDF-1.4\n"
    b"1 0 obj\n<< /Type /Catalog /Pages 2 0 R >>\nendobj\n"
    b"2 0 obj\n<< /Type /Pages /Kids [3 0 R] /Count 1 >>\nendobj\n"
    b"3 0 obj\n<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] /Contents 4 0 R >>\nendobj\n"
)
_PDF_TAIL = b"\nendstream\nendobj\ntrailer\n<< /Root 1 0 R /Size 5 >>\n%%EOF\n"


def _pdf_stream_header(length: int) -> bytes:
    return b"4 0 obj\n<< /Length %d >>\nstream\n" % length


def build_pdf(rng: random.Random, size: int) -> bytes:
    fixed = len(_PDF_HEAD) + len(_PDF_TAIL)
    length = size - fixed - len(_pdf_stream_header(0))
    # the digits of /Length count towards the file size
    for _ in range(8):
        total = fixed + len(_pdf_stream_header(length)) + length
        if total == size:
            break
        length -= total - size
    else:
        raise ValueError(f"cannot build a {size}-byte PDF")
    if length < 0:
        raise ValueError(f"{size} bytes is too small for a PDF")
    return _PDF_HEAD + _pdf_stream_header(length) + letters(rng, length) + _PDF_TAIL


# DOCX ------------------------------------------------------------------------

DOCX_TIMESTAMP = (2012, 4, 20, 10, 0, 0)
_DOCX_PADDING_MEMBER = "word/media/filler.bin"
_CONTENT_TYPES = (
    b'<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'
    b'<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">'
    b'<Default Extension="rels" '
    b'ContentType="application/vnd.openxmlformats-package.relationships+xml"/>'
    b'<Default Extension="xml" ContentType="application/xml"/>'
    b'<Default Extension="bin" ContentType="application/octet-stream"/>'
    b'<Override PartName="/word/document.xml" ContentType="application/'
    b'vnd.openxmlformats-officedocument.wordprocessingml.document.main+xml"/></Types>'
)
_PACKAGE_RELS = (
    b'<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'
    b'<Relationships xmlns="http://schemas.openxmlformats.org/package/2006/relationships">'
    b'<Relationship Id="rId1" Type="http://schemas.openxmlformats.org/officeDocument/'
    b'2006/relationships/officeDocument" Target="word/document.xml"/></Relationships>'
)


def _document_xml(rng: random.Random) -> bytes:
    words = b" ".join(letters(rng, rng.randrange(3, 10)) for _ in range(60))
    return (
        b'<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'
        b'<w:document xmlns:w="http://schemas.openxmlformats.org/wordprocessingml/2006/main">'
        b"<w:body><w:p><w:r><w:t>" + words + b"</w:t></w:r></w:p></w:body></w:document>"
    )


def _stored_zip(members: List[Tuple[str, bytes]]) -> bytes:
    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", zipfile.ZIP_STORED) as archive:
        for name, data in members:
            info = zipfile.ZipInfo(name, date_time=DOCX_TIMESTAMP)
            info.compress_type = zipfile.ZIP_STORED
            archive.writestr(info, data)
    return buffer.getvalue()


def build_docx(rng: random.Random, size: int) -> bytes:
    members = [
        ("[Content_Types].xml", _CONTENT_TYPES),
        ("_rels/.rels", _PACKAGE_RELS),
        ("word/document.xml", _document_xml(rng)),
    ]
    # stored members: the archive grows byte for byte with the padding member
    empty = len(_stored_zip(members + [(_DOCX_PADDING_MEMBER, b"")]))
    if empty > size:
        raise ValueError(f"{size} bytes is too small for a DOCX")
    return _stored_zip(members + [(_DOCX_PADDING_MEMBER, letters(rng, size - empty))])


# MP3 -------------------------------------------------------------------------

# MPEG-1 layer III, 128 kbit/s, 32 kHz, no padding: 576-byte frames
MP3_FRAME_HEADER = b"\xff\xfb\x98\x44"
MP3_FRAME_LENGTH = 576


def _synchsafe(value: int) -> bytes:
    return bytes(((value >> 21) & 0x7F, (value >> 14) & 0x7F, (value >> 7) & 0x7F, value & 0x7F))


def build_mp3(rng: random.Random, size: int, title: str) -> bytes:
    text = title.encode("latin-1")
    title_frame = b"TIT2" + struct.pack(">I", len(text) + 1) + b"\x00\x00" + b"\x00" + text
    frames = (size - 10 - len(title_frame)) // MP3_FRAME_LENGTH
    tag_size = size - 10 - frames * MP3_FRAME_LENGTH
    if frames <= 0 or tag_size >= 1 << 28:
        raise ValueError(f"cannot build a {size}-byte MP3")
    tag = (
        b"ID3\x03\x00\x00"
        + _synchsafe(tag_size)
        + title_frame
        + bytes(tag_size - len(title_frame))
    )
    payload = MP3_FRAME_LENGTH - len(MP3_FRAME_HEADER)
    body = letters(rng, frames * payload)
    audio = b"".join(
        MP3_FRAME_HEADER + body[i * payload : (i + 1) * payload] for i in range(frames)
    )
    return tag + audio


# MP4 -------------------------------------------------------------------------

_MAC_EPOCH_OFFSET = 2082844800
_IDENTITY_MATRIX = struct.pack(">9I", 0x10000, 0, 0, 0, 0x10000, 0, 0, 0, 0x40000000)


def build_mp4(rng: random.Random, size: int, created: int) -> bytes:
    ftyp = struct.pack(">I4s4sI", 32, b"ftyp", b"isom", 0x200) + b"isomiso2avc1mp41"
    stamp = created + _MAC_EPOCH_OFFSET
    mvhd_body = struct.pack(
        ">IIIIIIH10x36s24xI",
        0,
        stamp,
        stamp,
        1000,
        rng.randrange(5_000, 120_000),
        0x00010000,
        0x0100,
        _IDENTITY_MATRIX,
        2,
    )
    mvhd = struct.pack(">I4s", 8 + len(mvhd_body), b"mvhd") + mvhd_body
    moov = struct.pack(">I4s", 8 + len(mvhd), b"moov") + mvhd
    mdat_size = size - len(ftyp) - len(moov)
    if mdat_size < 8:
        raise ValueError(f"{size} bytes is too small for an MP4")
    return ftyp + moov + struct.pack(">I4s", mdat_size, b"mdat") + letters(rng, mdat_size - 8)


_BUILDERS: Dict[str, Callable[[random.Random, int, int, str], bytes]] = {
    "jpg": lambda rng, size, index, name: build_jpeg(rng, size),
    "mp3": lambda rng, size, index, name: build_mp3(rng, size, name.split(".")[0]),
    "mp4": lambda rng, size, index, name: build_mp4(rng, size, created_at(index)),
    "pdf": lambda rng, size, index, name: build_pdf(rng, size),
    "docx": lambda rng, size, index, name: build_docx(rng, size),
}


@lru_cache(maxsize=2)
def builtin_dataset(seed: int = 0) -> Tuple[DatasetFile, ...]:
    files: List[DatasetFile] = []
    for index, (name, size) in enumerate(DATASET_TABLE, start=1):
        rng = random.Random(f"{seed}:{name}")
        content = _BUILDERS[name.rsplit(".", 1)[-1]](rng, size, index, name)
        if len(content) != size:
            raise AssertionError(f"{name}: built {len(content)} bytes, expected {size}")
        files.append(DatasetFile(index, name, size, manipulation_for(index), content))
    return tuple(files)


__all__ = [
    "DATASET_TABLE",
    "DatasetFile",
    "Manipulation",
    "REFERENCE_CREATED",
    "build_docx",
    "build_jpeg",
    "build_mp3",
    "build_mp4",
    "build_pdf",
    "builtin_dataset",
    "created_at",
    "letters",
    "manipulation_for",
    "preview_png",
    "thumbnail",
    "updated_at",
]
