from __future__ import annotations

import os
import random

import pytest

from app.db.engine import create_sa_engine
from app.errors import (
    FormatError,
    UnknownTableError,
    UnsupportedTableError,
    WalModeError,
)
from app.readers.sqlite import decode_record, open_db, parse_create_table, read_rows, read_table

PAGE_SIZES = (512, 1024, 2048, 4096)
SEEDS = range(25)

_SCHEMA = (
    "CREATE TABLE items ("
    "id INTEGER PRIMARY KEY, label TEXT, amount INTEGER, ratio REAL, payload BLOB, note)"
)
_COLUMNS = ("id", "label", "amount", "ratio", "payload", "note")
_ALPHABET = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _-.éßøЖ中文"


def _text(rng: random.Random, limit: int) -> str:
    return "".join(rng.choice(_ALPHABET) for _ in range(rng.randrange(limit)))


def _value(rng: random.Random, page_size: int):
    kind = rng.randrange(6)
    if kind == 0:
        return None
    if kind == 1:
        return rng.randint(-(1 << 63), (1 << 63) - 1)
    if kind == 2:
        return rng.randrange(-300, 300)
    if kind == 3:
        return rng.uniform(-1e9, 1e9)
    if kind == 4:
        return _text(rng, page_size)
    return rng.randbytes(rng.randrange(page_size * 3))


def _rows(rng: random.Random, page_size: int):
    rowid = 0
    rows = []
    for _ in range(rng.randrange(20, 60)):
        rowid += rng.randrange(1, 50)
        rows.append(
            (
                rowid,
                _text(rng, 3 * page_size) if rng.random() < 0.9 else None,
                rng.randint(-(1 << 63), (1 << 63) - 1) if rng.random() < 0.9 else None,
                rng.choice([rng.uniform(-1e6, 1e6), float(rng.randrange(-50, 50)), None]),
                rng.randbytes(rng.randrange(4 * page_size)) if rng.random() < 0.9 else None,
                _value(rng, page_size),
            )
        )
    # one payload per database that always spills onto overflow pages
    rows.append((rowid + 1, "overflow", 1, 1.5, rng.randbytes(5 * page_size), None))
    return rows


def _build(tmp_path, page_size: int, seed: int):
    rng = random.Random(f"sqlite:{page_size}:{seed}")
    rows = _rows(rng, page_size)
    path = os.path.join(tmp_path, "differential.sqlite")
    engine = create_sa_engine(f"sqlite:///{path}", page_size=page_size)
    try:
        with engine.begin() as connection:
            connection.exec_driver_sql(_SCHEMA)
            connection.exec_driver_sql("CREATE INDEX items_label ON items(label)")
            connection.exec_driver_sql("CREATE TABLE empty_table (a TEXT, b INTEGER)")
            connection.exec_driver_sql("INSERT INTO items VALUES (?, ?, ?, ?, ?, ?)", rows)
            doomed = [(row[0],) for row in rows if rng.random() < 0.2]
            if doomed:
                connection.exec_driver_sql("DELETE FROM items WHERE id = ?", doomed)
        with engine.connect() as connection:
            expected = connection.exec_driver_sql(
                f"SELECT {', '.join(_COLUMNS)} FROM items ORDER BY id"
            ).all()
    finally:
        engine.dispose()
    with open(path, "rb") as handle:
        return handle.read(), [tuple(row) for row in expected]


@pytest.mark.differential
@pytest.mark.parametrize("page_size", PAGE_SIZES)
@pytest.mark.parametrize("seed", SEEDS)
def test_rows_match_sqlite(tmp_path, page_size, seed):
    data, expected = _build(tmp_path, page_size, seed)
    db = open_db(data)
    assert db.page_size == page_size
    assert db.encoding == "utf-8"
    assert "items_label" not in db.tables()

    rows = read_rows(db, "items")
    actual = [tuple(row.values[column] for column in _COLUMNS) for row in rows]
    assert actual == expected
    assert [row.rowid for row in rows] == [row[0] for row in expected]
    assert read_rows(db, "empty_table") == []


def test_table_lookup_is_case_insensitive_when_unique(tmp_path):
    data, expected = _build(tmp_path, 1024, 0)
    db, rows = read_table(data, "ITEMS")
    assert len(rows) == len(expected)
    assert db.has_table("Items")
    with pytest.raises(UnknownTableError):
        db.table("missing")


def test_without_rowid_table_is_unsupported(tmp_path):
    path = os.path.join(tmp_path, "norowid.sqlite")
    engine = create_sa_engine(f"sqlite:///{path}", page_size=1024)
    try:
        with engine.begin() as connection:
            connection.exec_driver_sql("CREATE TABLE kv (k TEXT PRIMARY KEY, v) WITHOUT ROWID")
            connection.exec_driver_sql("INSERT INTO kv VALUES ('a', 1)")
    finally:
        engine.dispose()
    with open(path, "rb") as handle:
        db = open_db(handle.read())
    with pytest.raises(UnsupportedTableError):
        read_rows(db, "kv")


def test_wal_header_is_rejected(tmp_path):
    data, _ = _build(tmp_path, 1024, 1)
    patched = bytearray(data)
    patched[18] = patched[19] = 2
    with pytest.raises(WalModeError):
        open_db(bytes(patched))


def test_bad_magic_is_rejected():
    with pytest.raises(FormatError):
        open_db(b"not a database" * 10)


def test_truncated_file_keeps_readable_rows(tmp_path):
    data, expected = _build(tmp_path, 512, 2)
    db = open_db(data)
    warnings = []
    # cut the last page off; cells pointing there are skipped or the walk fails cleanly
    try:
        rows = read_rows(open_db(data[: len(data) - db.page_size]), "items", warnings)
    except FormatError:
        return
    assert len(rows) <= len(expected)


def test_create_table_parsing():
    columns, alias, without_rowid = parse_create_table(
        'CREATE TABLE "Files" ("_id" INTEGER PRIMARY KEY AUTOINCREMENT, [name] VARCHAR(255) NOT NULL, '
        "length INTEGER DEFAULT 0, ratio DOUBLE, data, CONSTRAINT u UNIQUE (name))"
    )
    assert [c.name for c in columns] == ["_id", "name", "length", "ratio", "data"]
    assert [c.affinity for c in columns] == ["integer", "text", "integer", "real", "blob"]
    assert alias == "_id"
    assert without_rowid is False


def test_decode_record_serial_types():
    # header: size 5, NULL, 1-byte int, zero constant, 3-char text
    payload = bytes([5, 0, 1, 8, 19]) + bytes([0x7F]) + b"abc"
    assert decode_record(payload) == [None, 127, 0, "abc"]


def test_decode_record_flags_undecodable_text():
    # header: size 3, 3-byte text, 1-byte int
    payload = bytes([3, 19, 1]) + b"a\xffb" + bytes([7])
    lossy = []
    assert decode_record(payload, lossy=lossy) == ["a\ufffdb", 7]
    assert lossy == [0]


def test_invalid_utf8_text_is_replaced_with_warning(tmp_path):
    path = os.path.join(tmp_path, "latin.sqlite")
    engine = create_sa_engine(f"sqlite:///{path}", page_size=1024)
    try:
        with engine.begin() as connection:
            connection.exec_driver_sql("CREATE TABLE files (_id INTEGER PRIMARY KEY, name TEXT)")
            connection.exec_driver_sql("INSERT INTO files (name) VALUES ('ok.pdf')")
            connection.exec_driver_sql("INSERT INTO files (name) VALUES (CAST(X'63616ffc2e706466' AS TEXT))")
    finally:
        engine.dispose()
    with open(path, "rb") as handle:
        warnings = []
        _, rows = read_table(handle.read(), "files", warnings)
    assert [row["name"] for row in rows] == ["ok.pdf", "cao\ufffd.pdf"]
    assert warnings == ["files rowid 2 column name: invalid utf-8 text, undecodable bytes replaced"]
