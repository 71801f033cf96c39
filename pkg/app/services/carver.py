"""Signature-based recovery of files from raw images."""

from __future__ import annotations

import hashlib
import logging
import struct
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from app.evidence import ObjectOrigin, RecoveredObject
from app.services.image import RawImage
from app.services.storage import save_bytes, save_json

logger = logging.getLogger(__name__)

MiB = 1024 * 1024

Buffer = Union[bytes, bytearray, memoryview]
# (end offset, type label) or None when the candidate fails validation
Extent = Optional[Tuple[int, str]]


@dataclass(frozen=True)
class CarveSignature:
    type_label: str
    header: bytes
    footer: Optional[bytes]
    max_length: int
    validator: str
    header_offset: int = 0

    def __post_init__(self) -> None:
        if not self.header:
            raise ValueError("carve signature needs a header")
        if self.max_length <= 0:
            raise ValueError("max_length must be positive")

    def next_start(self, data, pos: int) -> int:
        """Offset of the next candidate file start at or after pos, or -1."""

        at = data.find(self.header, pos + self.header_offset)
        while at != -1 and at - self.header_offset < pos:
            at = data.find(self.header, at + 1)
        return -1 if at == -1 else at - self.header_offset

    def extent(self, data, start: int, limit: int) -> Extent:
        return _VALIDATORS[self.validator](self, data, start, limit)


def _u16(data, at: int) -> int:
    return struct.unpack(">H", data[at : at + 2])[0]


def _u32(data, at: int) -> int:
    return struct.unpack(">I", data[at : at + 4])[0]


def _jpeg_extent(sig: CarveSignature, data, start: int, limit: int) -> Extent:
    pos = start + 2
    while pos + 4 <= limit:
        if data[pos] != 0xFF:
            return None
        while pos + 1 < limit and data[pos + 1] == 0xFF:
            pos += 1
        if pos + 1 >= limit:
            return None
        marker = data[pos + 1]
        if marker == 0xD9:
            return pos + 2, sig.type_label
        if 0xD0 <= marker <= 0xD7 or marker == 0x01:
            pos += 2
            continue
        if marker == 0x00:
            return None
        if pos + 4 > limit:
            return None
        length = _u16(data, pos + 2)
        if length < 2:
            return None
        pos += 2 + length
        if marker != 0xDA:
            continue
        # entropy-coded data runs to the next marker that is not a stuffed
        # byte or a restart marker
        while True:
            ff = data.find(b"\xff", pos, limit)
            if ff == -1 or ff + 1 >= limit:
                return None
            following = data[ff + 1]
            if following == 0x00 or 0xD0 <= following <= 0xD7 or following == 0xFF:
                pos = ff + 1 if following == 0xFF else ff + 2
                continue
            pos = ff
            break
    return None


def _pdf_extent(sig: CarveSignature, data, start: int, limit: int) -> Extent:
    assert sig.footer is not None
    at = data.find(sig.footer, start + len(sig.header), limit)
    if at == -1:
        return None
    end = at + len(sig.footer)
    if end < limit and data[end : end + 2] == b"\r\n":
        end += 2
    elif end < limit and data[end : end + 1] in (b"\n", b"\r"):
        end += 1
    return min(end, limit), sig.type_label


def _zip_extent(sig: CarveSignature, data, start: int, limit: int) -> Extent:
    assert sig.footer is not None
    at = data.find(sig.footer, start, limit)
    while at != -1:
        if at + 22 > limit:
            return None
        cd_size = struct.unpack("<I", data[at + 12 : at + 16])[0]
        cd_offset = struct.unpack("<I", data[at + 16 : at + 20])[0]
        comment = struct.unpack("<H", data[at + 20 : at + 22])[0]
        cd_start = start + cd_offset
        if cd_start + cd_size == at and (
            cd_size == 0 or data[cd_start : cd_start + 4] == b"PK\x01\x02"
        ):
            end = at + 22 + comment
            if end > limit:
                return None
            directory = data[cd_start:at]
            label = "docx" if b"word/document.xml" in directory else "zip"
            return end, label
        at = data.find(sig.footer, at + 1, limit)
    return None


_MP3_BITRATES = {
    (3, 3): (0, 32, 64, 96, 128, 160, 192, 224, 256, 288, 320, 352, 384, 416, 448),
    (3, 2): (0, 32, 48, 56, 64, 80, 96, 112, 128, 160, 192, 224, 256, 320, 384),
    (3, 1): (0, 32, 40, 48, 56, 64, 80, 96, 112, 128, 160, 192, 224, 256, 320),
    (2, 3): (0, 32, 48, 56, 64, 80, 96, 112, 128, 144, 160, 176, 192, 224, 256),
    (2, 2): (0, 8, 16, 24, 32, 40, 48, 56, 64, 80, 96, 112, 128, 144, 160),
    (2, 1): (0, 8, 16, 24, 32, 40, 48, 56, 64, 80, 96, 112, 128, 144, 160),
}
_MP3_RATES = {3: (44100, 48000, 32000), 2: (22050, 24000, 16000), 0: (11025, 12000, 8000)}


def mp3_frame_length(header: bytes) -> Optional[int]:
    if len(header) < 4 or header[0] != 0xFF or header[1] & 0xE0 != 0xE0:
        return None
    version = (header[1] >> 3) & 0x03
    layer = (header[1] >> 1) & 0x03
    bitrate_index = header[2] >> 4
    rate_index = (header[2] >> 2) & 0x03
    padding = (header[2] >> 1) & 0x01
    if version == 1 or layer == 0 or bitrate_index in (0, 15) or rate_index == 3:
        return None
    table = _MP3_BITRATES[(3 if version == 3 else 2, layer)]
    bitrate = table[bitrate_index] * 1000
    rate = _MP3_RATES[version][rate_index]
    if layer == 3:
        return (12 * bitrate // rate + padding) * 4
    if layer == 1 and version != 3:
        return 72 * bitrate // rate + padding
    return 144 * bitrate // rate + padding


def _mp3_extent(sig: CarveSignature, data, start: int, limit: int) -> Extent:
    if start + 10 > limit:
        return None
    size_bytes = data[start + 6 : start + 10]
    if any(b & 0x80 for b in size_bytes) or data[start + 3] == 0xFF:
        return None
    size = (
        (size_bytes[0] << 21) | (size_bytes[1] << 14) | (size_bytes[2] << 7) | size_bytes[3]
    )
    pos = start + 10 + size + (10 if data[start + 5] & 0x10 else 0)
    frames = 0
    while pos + 4 <= limit:
        length = mp3_frame_length(bytes(data[pos : pos + 4]))
        if length is None or length < 4 or pos + length > limit:
            break
        pos += length
        frames += 1
    if frames == 0:
        return None
    if pos + 128 <= limit and data[pos : pos + 3] == b"TAG":
        pos += 128
    return pos, sig.type_label


_MP4_TOP_LEVEL = frozenset(
    {
        b"ftyp", b"moov", b"mdat", b"free", b"skip", b"wide", b"uuid", b"pdin",
        b"moof", b"mfra", b"meta", b"styp", b"sidx", b"ssix", b"prft", b"emsg",
    }
)


def _mp4_extent(sig: CarveSignature, data, start: int, limit: int) -> Extent:
    pos = start
    seen = set()
    while pos + 8 <= limit:
        size = _u32(data, pos)
        kind = bytes(data[pos + 4 : pos + 8])
        if kind not in _MP4_TOP_LEVEL or (pos == start and kind != b"ftyp"):
            break
        header = 8
        if size == 1:
            if pos + 16 > limit:
                break
            size = struct.unpack(">Q", data[pos + 8 : pos + 16])[0]
            header = 16
        if size < header or pos + size > limit:
            break
        seen.add(kind)
        pos += size
    if b"ftyp" not in seen or not seen & {b"moov", b"mdat", b"moof"}:
        return None
    return pos, sig.type_label


_VALIDATORS: Dict[str, Callable[[CarveSignature, object, int, int], Extent]] = {
    "jpeg_segments": _jpeg_extent,
    "none": _pdf_extent,
    "zip_eocd": _zip_extent,
    "mp3_frames": _mp3_extent,
    "mp4_boxes": _mp4_extent,
}


def builtin_signatures(max_bytes: Optional[int] = None) -> List[CarveSignature]:
    def cap(size: int) -> int:
        return min(size, max_bytes) if max_bytes else size

    return [
        CarveSignature("jpg", b"\xff\xd8\xff", b"\xff\xd9", cap(32 * MiB), "jpeg_segments"),
        CarveSignature("pdf", b"%PDF", b"%%EOF", cap(64 * MiB), "none"),
        CarveSignature("zip", b"PK\x03\x04", b"PK\x05\x06", cap(64 * MiB), "zip_eocd"),
        CarveSignature("mp3", b"ID3", None, cap(64 * MiB), "mp3_frames"),
        CarveSignature("mp4", b"ftyp", None, cap(256 * MiB), "mp4_boxes", header_offset=4),
    ]


def carve(
    image: RawImage,
    signatures: Optional[Sequence[CarveSignature]] = None,
) -> List[RecoveredObject]:
    data = image.data
    size = len(data)
    signatures = list(signatures) if signatures is not None else builtin_signatures()
    upcoming = {id(sig): sig.next_start(data, 0) for sig in signatures}
    objects: List[RecoveredObject] = []
    pos = 0
    while True:
        for sig in signatures:
            at = upcoming[id(sig)]
            if at != -1 and at < pos:
                upcoming[id(sig)] = sig.next_start(data, pos)
        starts = [at for at in upcoming.values() if at != -1]
        if not starts:
            break
        start = min(starts)
        best: Extent = None
        for sig in signatures:
            if upcoming[id(sig)] != start:
                continue
            found = sig.extent(data, start, min(size, start + sig.max_length))
            if found is not None and (best is None or found[0] > best[0]):
                best = found
        if best is None:
            logger.debug("[CARVE] candidate at %d failed validation", start)
            pos = start + 1
            continue
        end, label = best
        content = bytes(data[start:end])
        objects.append(
            RecoveredObject.from_bytes(
                f"{label}_{start}",
                ObjectOrigin.CARVED,
                content,
                tree=image.label,
                offset=start,
            )
        )
        logger.debug("[CARVE] %s at %d, %d bytes", label, start, end - start)
        pos = end
    logger.info("[CARVE] %d objects carved from %d bytes", len(objects), size)
    return objects


def extract_carved(
    image: RawImage,
    objects: Sequence[RecoveredObject],
    out_dir: str,
) -> str:
    """Writes carved files plus manifest.json; returns the manifest path."""

    records = []
    for obj in objects:
        assert obj.offset is not None
        content = image.read(obj.offset, obj.length)
        if hashlib.md5(content).hexdigest() != obj.md5:
            raise ValueError(f"image changed under carved object {obj.logical_name}")
        name = f"{obj.logical_name}.{obj.logical_name.split('_', 1)[0]}"
        save_bytes(out_dir, name, content)
        records.append(
            {
                "file": name,
                "offset": obj.offset,
                "length": obj.length,
                "type": obj.logical_name.split("_", 1)[0],
                "md5": obj.md5,
                "sha1": obj.sha1,
            }
        )
    return save_json(out_dir, "manifest.json", records).path


__all__ = [
    "CarveSignature",
    "builtin_signatures",
    "carve",
    "extract_carved",
    "mp3_frame_length",
]
