"""Read-only reader for SQLite main-database files (rollback-journal era)."""

from __future__ import annotations

import logging
import re
import struct
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

from app.errors import (
    FormatError,
    TruncatedPageError,
    UnknownTableError,
    UnsupportedTableError,
    Utf16DatabaseError,
    WalModeError,
)

logger = logging.getLogger(__name__)

MAGIC = b"SQLite format 3\x00"
HEADER_SIZE = 100

LEAF_TABLE = 0x0D
INTERIOR_TABLE = 0x05

_ENCODINGS = {0: "utf-8", 1: "utf-8", 2: "utf-16le", 3: "utf-16be"}
_TABLE_CONSTRAINTS = ("CONSTRAINT", "PRIMARY", "UNIQUE", "CHECK", "FOREIGN")
_COLUMN_CONSTRAINT = re.compile(
    r"\b(CONSTRAINT|PRIMARY|NOT|NULL|UNIQUE|CHECK|DEFAULT|COLLATE|REFERENCES|GENERATED|AS)\b",
    re.IGNORECASE,
)


@dataclass(frozen=True)
class Column:
    name: str
    declared_type: str
    affinity: str


@dataclass(frozen=True)
class TableSchema:
    name: str
    root_page: int
    columns: Tuple[Column, ...]
    rowid_alias: Optional[str] = None
    supported: bool = True
    sql: str = ""

    @property
    def column_names(self) -> List[str]:
        return [column.name for column in self.columns]


@dataclass(frozen=True)
class Row:
    rowid: int
    values: Dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, column: str) -> Any:
        return self.values[column]

    def get(self, column: str, default: Any = None) -> Any:
        return self.values.get(column, default)


@dataclass(frozen=True)
class Database:
    page_size: int
    page_count: int
    encoding: str
    usable_size: int
    schema: Dict[str, TableSchema]
    data: bytes = field(repr=False)

    def tables(self) -> List[str]:
        return sorted(self.schema)

    def table(self, name: str) -> TableSchema:
        found = self.schema.get(name)
        if found is not None:
            return found
        matches = [t for key, t in self.schema.items() if key.lower() == name.lower()]
        if len(matches) == 1:
            return matches[0]
        raise UnknownTableError(name)

    def has_table(self, name: str) -> bool:
        try:
            self.table(name)
        except UnknownTableError:
            return False
        return True


def _affinity(declared: str) -> str:
    upper = declared.upper()
    if "INT" in upper:
        return "integer"
    if "CHAR" in upper or "CLOB" in upper or "TEXT" in upper:
        return "text"
    if not upper or "BLOB" in upper:
        return "blob"
    if "REAL" in upper or "FLOA" in upper or "DOUB" in upper:
        return "real"
    return "numeric"


def read_varint(buf: bytes, pos: int) -> Tuple[int, int]:
    """Returns (value, next position); the value is unsigned 64-bit."""

    value = 0
    for i in range(8):
        if pos + i >= len(buf):
            raise FormatError(f"varint runs past end of buffer at {pos}")
        byte = buf[pos + i]
        value = (value << 7) | (byte & 0x7F)
        if byte < 0x80:
            return value, pos + i + 1
    if pos + 8 >= len(buf):
        raise FormatError(f"varint runs past end of buffer at {pos}")
    value = (value << 8) | buf[pos + 8]
    return value, pos + 9


def _signed64(value: int) -> int:
    return value - (1 << 64) if value & (1 << 63) else value


def _serial_length(serial: int) -> int:
    if serial in (0, 8, 9):
        return 0
    if serial in (10, 11):
        raise FormatError(f"reserved serial type {serial}")
    if serial <= 4:
        return serial
    if serial == 5:
        return 6
    if serial in (6, 7):
        return 8
    return (serial - 12) // 2 if serial % 2 == 0 else (serial - 13) // 2


def _decode_value(serial: int, raw: bytes, encoding: str) -> Any:
    if serial == 0:
        return None
    if serial == 8:
        return 0
    if serial == 9:
        return 1
    if 1 <= serial <= 6:
        return int.from_bytes(raw, "big", signed=True)
    if serial == 7:
        return struct.unpack(">d", raw)[0]
    if serial % 2 == 0:
        return bytes(raw)
    return bytes(raw).decode(encoding)


def decode_record(
    payload: bytes,
    encoding: str = "utf-8",
    lossy: Optional[List[int]] = None,
) -> List[Any]:
    """Decodes one record. Text that does not decode is kept with replacement
    characters and its column index is appended to lossy."""

    header_size, pos = read_varint(payload, 0)
    if header_size > len(payload) or header_size < pos:
        raise FormatError("record header larger than payload")
    serials: List[int] = []
    while pos < header_size:
        serial, pos = read_varint(payload, pos)
        serials.append(serial)
    values: List[Any] = []
    body = header_size
    for serial in serials:
        size = _serial_length(serial)
        if body + size > len(payload):
            raise FormatError("record body shorter than its header declares")
        chunk = payload[body : body + size]
        try:
            value = _decode_value(serial, chunk, encoding)
        except UnicodeDecodeError:
            value = bytes(chunk).decode(encoding, errors="replace")
            if lossy is not None:
                lossy.append(len(values))
        values.append(value)
        body += size
    return values


class _Pager:
    def __init__(self, data: bytes, page_size: int, usable_size: int, page_count: int):
        self.data = data
        self.page_size = page_size
        self.usable_size = usable_size
        self.page_count = page_count

    def page(self, number: int) -> bytes:
        if number < 1 or number > self.page_count:
            raise TruncatedPageError(number)
        start = (number - 1) * self.page_size
        end = start + self.page_size
        if end > len(self.data):
            raise TruncatedPageError(number)
        return self.data[start:end]

    def local_payload(self, payload_size: int) -> int:
        usable = self.usable_size
        max_local = usable - 35
        if payload_size <= max_local:
            return payload_size
        min_local = ((usable - 12) * 32 // 255) - 23
        k = min_local + (payload_size - min_local) % (usable - 4)
        return k if k <= max_local else min_local

    def read_payload(self, page: bytes, pos: int, payload_size: int) -> bytes:
        local = self.local_payload(payload_size)
        if pos + local > len(page):
            raise FormatError("cell payload runs past page end")
        chunks = [page[pos : pos + local]]
        remaining = payload_size - local
        if remaining <= 0:
            return chunks[0]
        if pos + local + 4 > len(page):
            raise FormatError("overflow pointer runs past page end")
        next_page = struct.unpack(">I", page[pos + local : pos + local + 4])[0]
        seen: Set[int] = set()
        per_page = self.usable_size - 4
        while remaining > 0:
            if next_page == 0 or next_page in seen:
                raise FormatError("overflow chain ends early or loops")
            seen.add(next_page)
            overflow = self.page(next_page)
            take = min(remaining, per_page)
            chunks.append(overflow[4 : 4 + take])
            remaining -= take
            next_page = struct.unpack(">I", overflow[:4])[0]
        return b"".join(chunks)

    def walk_table(
        self,
        root: int,
        warnings: Optional[List[str]],
    ) -> List[Tuple[int, bytes]]:
        cells: List[Tuple[int, bytes]] = []
        stack = [root]
        visited: Set[int] = set()
        while stack:
            number = stack.pop()
            if number in visited:
                raise FormatError(f"b-tree page {number} referenced twice")
            visited.add(number)
            page = self.page(number)
            header = HEADER_SIZE if number == 1 else 0
            kind = page[header]
            cell_count = struct.unpack(">H", page[header + 3 : header + 5])[0]
            if kind == INTERIOR_TABLE:
                right_most = struct.unpack(">I", page[header + 8 : header + 12])[0]
                pointers = page[header + 12 : header + 12 + 2 * cell_count]
                children = []
                for i in range(cell_count):
                    offset = struct.unpack(">H", pointers[2 * i : 2 * i + 2])[0]
                    children.append(struct.unpack(">I", page[offset : offset + 4])[0])
                children.append(right_most)
                # pop() takes from the end, so push in reverse to keep rowid order
                stack.extend(reversed(children))
            elif kind == LEAF_TABLE:
                pointers = page[header + 8 : header + 8 + 2 * cell_count]
                for i in range(cell_count):
                    offset = struct.unpack(">H", pointers[2 * i : 2 * i + 2])[0]
                    try:
                        payload_size, pos = read_varint(page, offset)
                        rowid, pos = read_varint(page, pos)
                        payload = self.read_payload(page, pos, payload_size)
                    except FormatError as exc:
                        message = f"page {number} cell {i} skipped: {exc}"
                        logger.warning("[SQLITE] %s", message)
                        if warnings is not None:
                            warnings.append(message)
                        continue
                    cells.append((_signed64(rowid), payload))
            else:
                raise FormatError(f"page {number} is not a table b-tree page (type {kind:#x})")
        return cells


def _split_top_level(text: str) -> List[str]:
    parts: List[str] = []
    depth = 0
    quote: Optional[str] = None
    current: List[str] = []
    closers = {'"': '"', "'": "'", "`": "`", "[": "]"}
    for ch in text:
        if quote is not None:
            current.append(ch)
            if ch == quote:
                quote = None
            continue
        if ch in closers:
            quote = closers[ch]
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append("".join(current).strip())
            current = []
            continue
        current.append(ch)
    tail = "".join(current).strip()
    if tail:
        parts.append(tail)
    return parts


def _take_identifier(text: str) -> Tuple[str, str]:
    text = text.lstrip()
    if not text:
        return "", ""
    pairs = {'"': '"', "`": "`", "[": "]", "'": "'"}
    opener = text[0]
    if opener in pairs:
        closer = pairs[opener]
        end = text.find(closer, 1)
        while end != -1 and closer != "]" and text[end + 1 : end + 2] == closer:
            end = text.find(closer, end + 2)
        if end == -1:
            return text[1:], ""
        name = text[1:end]
        if closer != "]":
            name = name.replace(closer * 2, closer)
        return name, text[end + 1 :]
    match = re.match(r"[^\s(,]+", text)
    token = match.group(0) if match else text
    return token, text[len(token) :]


def parse_create_table(sql: str) -> Tuple[List[Column], Optional[str], bool]:
    """Returns (columns, rowid alias column, without_rowid)."""

    start = sql.find("(")
    end = sql.rfind(")")
    if start == -1 or end <= start:
        raise FormatError(f"cannot parse table definition: {sql!r}")
    body = sql[start + 1 : end]
    trailer = sql[end + 1 :]
    without_rowid = bool(re.search(r"WITHOUT\s+ROWID", trailer, re.IGNORECASE))

    columns: List[Column] = []
    alias: Optional[str] = None
    table_pk: List[str] = []
    for definition in _split_top_level(body):
        first = re.match(r"\s*([A-Za-z_]+)", definition)
        if first and first.group(1).upper() in _TABLE_CONSTRAINTS:
            pk = re.match(r"(?:CONSTRAINT\s+\S+\s+)?PRIMARY\s+KEY\s*\((.*)\)", definition, re.I | re.S)
            if pk:
                table_pk = [
                    _take_identifier(part.strip())[0]
                    for part in _split_top_level(pk.group(1))
                ]
            continue
        name, rest = _take_identifier(definition)
        if not name:
            continue
        constraint = _COLUMN_CONSTRAINT.search(rest)
        declared = (rest[: constraint.start()] if constraint else rest).strip()
        declared = re.sub(r"\s+", " ", declared)
        columns.append(Column(name=name, declared_type=declared, affinity=_affinity(declared)))
        if (
            declared.upper() == "INTEGER"
            and re.search(r"\bPRIMARY\s+KEY\b", rest, re.I)
            and not re.search(r"\bPRIMARY\s+KEY\s+DESC\b", rest, re.I)
        ):
            alias = name
    if alias is None and len(table_pk) == 1:
        for column in columns:
            if column.name.lower() == table_pk[0].lower() and column.declared_type.upper() == "INTEGER":
                alias = column.name
    return columns, alias, without_rowid


def open_db(data: bytes) -> Database:
    if isinstance(data, (bytearray, memoryview)):
        data = bytes(data)
    if len(data) < HEADER_SIZE or data[:16] != MAGIC:
        raise FormatError("not an SQLite 3 database (bad magic)")

    raw_page_size = struct.unpack(">H", data[16:18])[0]
    page_size = 65536 if raw_page_size == 1 else raw_page_size
    if page_size < 512 or page_size > 65536 or page_size & (page_size - 1):
        raise FormatError(f"invalid page size {raw_page_size}")
    if data[18] == 2 or data[19] == 2:
        raise WalModeError("database header declares WAL journal mode")
    reserved = data[20]
    encoding = _ENCODINGS.get(struct.unpack(">I", data[56:60])[0])
    if encoding is None:
        raise FormatError("unknown text encoding")
    if encoding != "utf-8":
        raise Utf16DatabaseError(f"database text encoding is {encoding}")

    header_count = struct.unpack(">I", data[28:32])[0]
    file_pages = -(-len(data) // page_size)
    change_counter = data[24:28]
    version_valid_for = data[92:96]
    page_count = header_count if header_count and change_counter == version_valid_for else file_pages
    pager = _Pager(data, page_size, page_size - reserved, page_count)

    schema: Dict[str, TableSchema] = {}
    for _, payload in pager.walk_table(1, None):
        record = decode_record(payload)
        record += [None] * (5 - len(record))
        kind, name, _tbl_name, root_page, sql = record[:5]
        if kind != "table" or not isinstance(name, str):
            continue
        sql_text = sql if isinstance(sql, str) else ""
        if sql_text.upper().startswith("CREATE VIRTUAL"):
            schema[name] = TableSchema(name, 0, (), supported=False, sql=sql_text)
            continue
        try:
            columns, alias, without_rowid = parse_create_table(sql_text)
        except FormatError:
            logger.warning("[SQLITE] unparseable schema for table %s", name)
            columns, alias, without_rowid = [], None, False
        schema[name] = TableSchema(
            name=name,
            root_page=int(root_page or 0),
            columns=tuple(columns),
            rowid_alias=alias,
            supported=not without_rowid and bool(root_page),
            sql=sql_text,
        )
    return Database(
        page_size=page_size,
        page_count=page_count,
        encoding=encoding,
        usable_size=page_size - reserved,
        schema=schema,
        data=data,
    )


def read_rows(
    db: Database,
    table: str,
    warnings: Optional[List[str]] = None,
) -> List[Row]:
    schema = db.table(table)
    if not schema.supported:
        raise UnsupportedTableError(f"table {schema.name} is virtual or WITHOUT ROWID")
    pager = _Pager(db.data, db.page_size, db.usable_size, db.page_count)
    names = schema.column_names
    rows: List[Row] = []
    for rowid, payload in pager.walk_table(schema.root_page, warnings):
        lossy: List[int] = []
        try:
            values = decode_record(payload, db.encoding, lossy)
        except FormatError as exc:
            message = f"{schema.name} rowid {rowid} skipped: {exc}"
            logger.warning("[SQLITE] %s", message)
            if warnings is not None:
                warnings.append(message)
            continue
        for index in lossy:
            column = names[index] if index < len(names) else str(index)
            message = (
                f"{schema.name} rowid {rowid} column {column}: "
                f"invalid {db.encoding} text, undecodable bytes replaced"
            )
            logger.warning("[SQLITE] %s", message)
            if warnings is not None:
                warnings.append(message)
        values += [None] * (len(names) - len(values))
        mapped: Dict[str, Any] = {}
        for column, value in zip(schema.columns, values):
            if column.affinity == "real" and isinstance(value, int):
                value = float(value)
            mapped[column.name] = value
        if schema.rowid_alias is not None and mapped.get(schema.rowid_alias) is None:
            mapped[schema.rowid_alias] = rowid
        rows.append(Row(rowid=rowid, values=mapped))
    rows.sort(key=lambda row: row.rowid)
    return rows


def read_table(
    data: bytes,
    table: str,
    warnings: Optional[List[str]] = None,
) -> Tuple[Database, List[Row]]:
    db = open_db(data)
    return db, read_rows(db, table, warnings)


__all__ = [
    "Column",
    "Database",
    "Row",
    "TableSchema",
    "decode_record",
    "open_db",
    "parse_create_table",
    "read_rows",
    "read_table",
    "read_varint",
]
