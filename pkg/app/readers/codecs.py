"""Text-format readers: JSON, JSON-lines logs, shared_prefs XML, plain logs."""

from __future__ import annotations

import json
import logging
import re
import zlib
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union
from xml.etree.ElementTree import Element

from defusedxml import DefusedXmlException
from defusedxml.ElementTree import ParseError, fromstring

from app.errors import FormatError, JsonFormatError
from app.evidence import LogEvent, TaggedTimestamp

logger = logging.getLogger(__name__)

INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1

PREF_KINDS = ("string", "long", "int", "boolean", "float", "set", "map")

KV_LOG_FORMATS = (
    "dropbox_android_log",
    "dropbox_ios_run",
    "sugarsync_log",
    "syncplicity_ios_log",
    "syncplicity_android_log",
)

_LOG_LINE = re.compile(
    r"^(?P<ts>\d{1,12}(?:\.\d+)?)\s+(?:\[(?P<level>[A-Za-z]+)\]\s+)?(?P<message>\S.*)$"
)
_KV_TOKEN = re.compile(r"(?P<key>[A-Za-z_][\w.]*)=(?P<value>\"[^\"]*\"|\S+)")
_GZIP_MAGIC = b"\x1f\x8b"


def _to_text(data: Union[bytes, str]) -> str:
    if isinstance(data, str):
        return data
    return data.decode("utf-8-sig", errors="replace")


def _parse_int(text: str) -> Union[int, float]:
    value = int(text)
    if INT64_MIN <= value <= INT64_MAX:
        return value
    return float(text)


def parse_json(data: Union[bytes, str], warnings: Optional[List[str]] = None) -> Any:
    text = _to_text(data)

    def pairs_hook(pairs: Sequence[Tuple[str, Any]]) -> Dict[str, Any]:
        result: Dict[str, Any] = {}
        for key, value in pairs:
            if key in result and warnings is not None:
                warnings.append(f"duplicate JSON key {key!r}; last value kept")
            result[key] = value
        return result

    try:
        return json.loads(text, object_pairs_hook=pairs_hook, parse_int=_parse_int)
    except json.JSONDecodeError as exc:
        raise JsonFormatError(exc.msg, exc.lineno, exc.colno) from None


def _timestamp(raw: Any) -> Optional[TaggedTimestamp]:
    if isinstance(raw, bool) or raw is None:
        return None
    try:
        return TaggedTimestamp.unix(float(raw))
    except (TypeError, ValueError):
        return None


def parse_json_lines_log(
    text: Union[bytes, str],
    warnings: Optional[List[str]] = None,
    source: Optional[str] = None,
) -> List[LogEvent]:
    events: List[LogEvent] = []
    for number, line in enumerate(_to_text(text).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line, parse_int=_parse_int)
        except json.JSONDecodeError as exc:
            message = f"log line {number} skipped: {exc.msg}"
            logger.warning("[LOG] %s", message)
            if warnings is not None:
                warnings.append(message)
            continue
        if not isinstance(obj, dict):
            if warnings is not None:
                warnings.append(f"log line {number} skipped: not a JSON object")
            continue
        attributes = {k: v for k, v in obj.items() if k not in ("event", "ts")}
        timestamp = _timestamp(obj.get("ts"))
        if "ts" in obj and timestamp is None:
            attributes["ts"] = obj["ts"]
        kind = obj.get("event")
        events.append(
            LogEvent(
                timestamp=timestamp,
                event_kind=str(kind) if kind is not None else "unknown",
                attributes=attributes,
                source=source,
            )
        )
    return events


def parse_xml(data: Union[bytes, str]) -> Element:
    """Parses untrusted XML with entity expansion disabled."""

    try:
        return fromstring(data)
    except (ParseError, DefusedXmlException, ValueError) as exc:
        raise FormatError(f"malformed XML: {exc}") from None


@dataclass(frozen=True)
class PrefEntry:
    kind: str
    name: str
    value: Any


@dataclass(frozen=True)
class SharedPref:
    file_name: str
    entries: Tuple[PrefEntry, ...] = ()

    def get(self, name: str, default: Any = None) -> Any:
        for entry in self.entries:
            if entry.name == name:
                return entry.value
        return default

    def as_dict(self) -> Dict[str, Any]:
        return {entry.name: entry.value for entry in self.entries}


def _pref_value(element: Element, warnings: Optional[List[str]]) -> Any:
    kind = element.tag
    if kind == "string":
        return element.text or ""
    if kind == "set":
        return [child.text or "" for child in element if child.tag == "string"]
    raw = element.get("value")
    if raw is None:
        raise FormatError(f"<{kind}> without value attribute")
    if kind == "boolean":
        return raw.strip().lower() == "true"
    if kind == "float":
        return float(raw)
    value = int(raw.strip())
    if kind == "long" and not INT64_MIN <= value <= INT64_MAX:
        raise FormatError(f"long value out of range: {raw}")
    if kind == "int" and not -(1 << 31) <= value < (1 << 31):
        raise FormatError(f"int value out of range: {raw}")
    return value


def parse_shared_prefs(
    data: Union[bytes, str],
    file_name: str = "",
    warnings: Optional[List[str]] = None,
) -> SharedPref:
    root = parse_xml(data)
    if root.tag != "map":
        raise FormatError(f"shared_prefs root is <{root.tag}>, expected <map>")
    entries: List[PrefEntry] = []
    for element in root:
        name = element.get("name")
        if element.tag not in PREF_KINDS or name is None:
            if warnings is not None:
                warnings.append(f"{file_name}: unsupported element <{element.tag}> skipped")
            continue
        try:
            value = _pref_value(element, warnings)
        except (FormatError, ValueError) as exc:
            if warnings is not None:
                warnings.append(f"{file_name}: entry {name} skipped: {exc}")
            continue
        entries.append(PrefEntry(kind=element.tag, name=name, value=value))
    return SharedPref(file_name=file_name, entries=tuple(entries))


def _inflate(data: bytes) -> bytes:
    # partially written gzip streams are common; keep what inflates
    decoder = zlib.decompressobj(16 + zlib.MAX_WBITS)
    try:
        return decoder.decompress(data)
    except zlib.error:
        return b""


def _event_kind(words: List[str]) -> str:
    cleaned = [re.sub(r"[^0-9a-z]+", "", word.lower()) for word in words]
    kind = "_".join(word for word in cleaned if word)
    return kind or "message"


def parse_kv_log(
    text: Union[bytes, str],
    format_id: str,
    warnings: Optional[List[str]] = None,
    source: Optional[str] = None,
) -> List[LogEvent]:
    if format_id not in KV_LOG_FORMATS:
        raise ValueError(f"unknown log format: {format_id}")
    if isinstance(text, bytes) and text.startswith(_GZIP_MAGIC):
        inflated = _inflate(text)
        if not inflated and warnings is not None:
            warnings.append(f"{source or format_id}: gzip stream could not be inflated")
        text = inflated

    events: List[LogEvent] = []
    for line in _to_text(text).splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        match = _LOG_LINE.match(stripped)
        if match is None:
            events.append(LogEvent(None, "raw", {"line": stripped}, source))
            continue
        message = match.group("message")
        attributes: Dict[str, Any] = {"message": message}
        if match.group("level"):
            attributes["level"] = match.group("level").upper()
        words: List[str] = []
        for token in message.split():
            if _KV_TOKEN.match(token):
                break
            words.append(token)
        for pair in _KV_TOKEN.finditer(message):
            attributes[pair.group("key")] = pair.group("value").strip('"')
        events.append(
            LogEvent(
                timestamp=TaggedTimestamp.unix(float(match.group("ts"))),
                event_kind=_event_kind(words),
                attributes=attributes,
                source=source,
            )
        )
    return events


def parse_properties(text: Union[bytes, str]) -> Dict[str, str]:
    result: Dict[str, str] = {}
    for line in _to_text(text).splitlines():
        stripped = line.strip()
        if not stripped or stripped[0] in "#!":
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            key, sep, value = stripped.partition(":")
        if sep:
            result[key.strip()] = value.strip()
    return result


__all__ = [
    "KV_LOG_FORMATS",
    "PrefEntry",
    "SharedPref",
    "parse_json",
    "parse_json_lines_log",
    "parse_kv_log",
    "parse_properties",
    "parse_shared_prefs",
    "parse_xml",
]
