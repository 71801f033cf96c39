"""Apple property lists: XML and binary (bplist00) forms."""

from __future__ import annotations

import base64
import datetime as dt
import struct
from typing import Any, Dict, List, Optional, Set, Union
from xml.etree.ElementTree import Element

from app.errors import FormatError, PlistCycleError, PlistFormatError
from app.evidence import TaggedTimestamp
from app.readers.codecs import parse_xml

PlistValue = Union[Dict[str, Any], List[Any], str, int, float, bool, bytes, TaggedTimestamp, None]

BINARY_MAGIC = b"bplist00"
TRAILER_SIZE = 32

_APPLE_EPOCH = dt.datetime(2001, 1, 1, tzinfo=dt.timezone.utc)


def parse_plist(data: bytes, warnings: Optional[List[str]] = None) -> PlistValue:
    """Parses either form; a repeated dictionary key keeps its last value and is
    reported in warnings."""

    if not data:
        raise PlistFormatError("empty property list")
    if data.startswith(BINARY_MAGIC):
        return _BinaryPlist(bytes(data), warnings).parse()
    head = data.lstrip()
    if head.startswith(b"\xef\xbb\xbf"):
        head = head[3:].lstrip()
    if head.startswith(b"<"):
        return _parse_xml_plist(data, warnings)
    raise PlistFormatError("neither binary nor XML property list", 0)


def _parse_xml_plist(data: bytes, warnings: Optional[List[str]]) -> PlistValue:
    try:
        root = parse_xml(data)
    except FormatError as exc:
        raise PlistFormatError(str(exc)) from None
    if root.tag == "plist":
        children = list(root)
        if not children:
            return None
        if len(children) > 1:
            raise PlistFormatError("<plist> holds more than one root value")
        root = children[0]
    return _xml_value(root, warnings)


def _xml_date(text: str) -> TaggedTimestamp:
    stamp = dt.datetime.strptime(text.strip().rstrip("Z"), "%Y-%m-%dT%H:%M:%S")
    stamp = stamp.replace(tzinfo=dt.timezone.utc)
    return TaggedTimestamp.apple((stamp - _APPLE_EPOCH).total_seconds())


def _put(result: Dict[str, Any], key: str, value: Any, warnings: Optional[List[str]]) -> None:
    if key in result and warnings is not None:
        warnings.append(f"duplicate plist key {key!r}; last value kept")
    result[key] = value


def _xml_value(element: Element, warnings: Optional[List[str]] = None) -> PlistValue:
    tag = element.tag
    text = element.text or ""
    try:
        if tag == "dict":
            result: Dict[str, Any] = {}
            children = list(element)
            if len(children) % 2:
                raise PlistFormatError("<dict> has a key without a value")
            for key, value in zip(children[::2], children[1::2]):
                if key.tag != "key":
                    raise PlistFormatError(f"expected <key>, found <{key.tag}>")
                _put(result, key.text or "", _xml_value(value, warnings), warnings)
            return result
        if tag == "array":
            return [_xml_value(child, warnings) for child in element]
        if tag == "string":
            return text
        if tag == "integer":
            raw = text.strip()
            return int(raw, 16) if raw.lower().startswith("0x") else int(raw)
        if tag == "real":
            return float(text)
        if tag == "true":
            return True
        if tag == "false":
            return False
        if tag == "date":
            return _xml_date(text)
        if tag == "data":
            return base64.b64decode("".join(text.split()))
    except (ValueError, TypeError) as exc:
        raise PlistFormatError(f"bad <{tag}> value: {exc}") from None
    raise PlistFormatError(f"unknown plist element <{tag}>")


class _BinaryPlist:
    def __init__(self, data: bytes, warnings: Optional[List[str]] = None) -> None:
        self.data = data
        self.warnings = warnings
        if len(data) < len(BINARY_MAGIC) + TRAILER_SIZE:
            raise PlistFormatError("binary plist shorter than its trailer", len(data))
        trailer_at = len(data) - TRAILER_SIZE
        (
            self.offset_size,
            self.ref_size,
            self.count,
            self.root,
            self.table_offset,
        ) = struct.unpack(">6xBBQQQ", data[trailer_at:])
        if self.offset_size not in (1, 2, 4, 8) or self.ref_size not in (1, 2, 4, 8):
            raise PlistFormatError("invalid integer sizes in trailer", trailer_at)
        table_end = self.table_offset + self.count * self.offset_size
        if self.table_offset < len(BINARY_MAGIC) or table_end > trailer_at:
            raise PlistFormatError("offset table outside the file", self.table_offset)
        if self.root >= self.count:
            raise PlistFormatError("root object index out of range", trailer_at)
        self.offsets = [
            self._uint(self.table_offset + i * self.offset_size, self.offset_size)
            for i in range(self.count)
        ]
        for index, offset in enumerate(self.offsets):
            if offset < len(BINARY_MAGIC) or offset >= self.table_offset:
                raise PlistFormatError(f"object {index} offset out of range", offset)
        self.active: Set[int] = set()

    def _uint(self, at: int, size: int) -> int:
        return int.from_bytes(self.data[at : at + size], "big")

    def parse(self) -> PlistValue:
        return self._object(self.root)

    def _length(self, info: int, at: int) -> tuple:
        if info != 0x0F:
            return info, at + 1
        marker = self.data[at + 1]
        if marker >> 4 != 0x1:
            raise PlistFormatError("count is not an integer object", at + 1)
        width = 1 << (marker & 0x0F)
        if width > 8:
            raise PlistFormatError("oversized count", at + 1)
        return self._uint(at + 2, width), at + 2 + width

    def _refs(self, at: int, count: int) -> List[int]:
        end = at + count * self.ref_size
        if end > self.table_offset:
            raise PlistFormatError("object references run past the object table", at)
        return [self._uint(at + i * self.ref_size, self.ref_size) for i in range(count)]

    def _object(self, ref: int) -> PlistValue:
        if ref >= self.count:
            raise PlistFormatError(f"object reference {ref} out of range")
        if ref in self.active:
            raise PlistCycleError(f"object {ref} references itself", self.offsets[ref])
        self.active.add(ref)
        try:
            return self._decode(self.offsets[ref])
        finally:
            self.active.discard(ref)

    def _decode(self, at: int) -> PlistValue:
        marker = self.data[at]
        kind, info = marker >> 4, marker & 0x0F
        if kind == 0x0:
            if info == 0x8:
                return False
            if info == 0x9:
                return True
            if info in (0x0, 0xF):
                return None
            raise PlistFormatError(f"unknown marker {marker:#x}", at)
        if kind == 0x1:
            width = 1 << info
            if width > 8:
                raise PlistFormatError("integers wider than 8 bytes are not supported", at)
            raw = self.data[at + 1 : at + 1 + width]
            return int.from_bytes(raw, "big", signed=width == 8)
        if kind == 0x2:
            width = 1 << info
            raw = self.data[at + 1 : at + 1 + width]
            if width == 4:
                return struct.unpack(">f", raw)[0]
            if width == 8:
                return struct.unpack(">d", raw)[0]
            raise PlistFormatError(f"unsupported real width {width}", at)
        if kind == 0x3:
            if info != 0x3:
                raise PlistFormatError(f"unknown date marker {marker:#x}", at)
            return TaggedTimestamp.apple(struct.unpack(">d", self.data[at + 1 : at + 9])[0])
        if kind == 0x4:
            length, start = self._length(info, at)
            return self._slice(start, length)
        if kind == 0x5:
            length, start = self._length(info, at)
            return self._slice(start, length).decode("ascii", errors="replace")
        if kind == 0x6:
            length, start = self._length(info, at)
            return self._slice(start, length * 2).decode("utf-16-be", errors="replace")
        if kind == 0x8:
            return {"CF$UID": self._uint(at + 1, info + 1)}
        if kind in (0xA, 0xC):
            length, start = self._length(info, at)
            return [self._object(ref) for ref in self._refs(start, length)]
        if kind == 0xD:
            length, start = self._length(info, at)
            refs = self._refs(start, length * 2)
            result: Dict[str, Any] = {}
            for key_ref, value_ref in zip(refs[:length], refs[length:]):
                key = self._object(key_ref)
                if not isinstance(key, str):
                    raise PlistFormatError("dictionary key is not a string", at)
                _put(result, key, self._object(value_ref), self.warnings)
            return result
        raise PlistFormatError(f"unknown marker {marker:#x}", at)

    def _slice(self, start: int, length: int) -> bytes:
        end = start + length
        if end > self.table_offset:
            raise PlistFormatError("object runs past the object table", start)
        return self.data[start:end]


def plist_strings(value: PlistValue) -> List[str]:
    """Every string leaf and dictionary key, depth first."""

    found: List[str] = []
    stack: List[Any] = [value]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            found.append(item)
        elif isinstance(item, dict):
            for key, child in item.items():
                found.append(key)
                stack.append(child)
        elif isinstance(item, list):
            stack.extend(reversed(item))
    return found


__all__ = ["PlistValue", "parse_plist", "plist_strings"]
