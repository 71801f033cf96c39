import logging
import os
import tempfile
from contextlib import contextmanager
from typing import Iterator, Mapping, Optional, Sequence, Union

from sqlalchemy import MetaData, create_engine, event, insert
from sqlalchemy.engine import Engine, URL, make_url
from sqlalchemy.orm import Session, sessionmaker
from sqlalchemy.pool import NullPool


logger = logging.getLogger(__name__)

SessionLocal = sessionmaker(
    autoflush=False,
    autocommit=False,
    expire_on_commit=False,
    future=True,
)

SQLITE_PAGE_SIZES = (512, 1024, 2048, 4096, 8192, 16384, 32768, 65536)


def create_sa_engine(db_url: Union[URL, str], page_size: Optional[int] = None) -> Engine:
    url = make_url(db_url)
    kwargs = {"future": True}
    if url.drivername.startswith("sqlite"):
        kwargs["connect_args"] = {"check_same_thread": False}
        # store files are read back right after writing; no pooled handles
        kwargs["poolclass"] = NullPool
    engine = create_engine(url, **kwargs)
    if page_size is not None:
        if page_size not in SQLITE_PAGE_SIZES:
            raise ValueError(f"invalid SQLite page size: {page_size}")

        @event.listens_for(engine, "connect")
        def _set_page_size(dbapi_connection, _record) -> None:
            cursor = dbapi_connection.cursor()
            cursor.execute(f"PRAGMA page_size = {page_size}")
            cursor.execute("PRAGMA journal_mode = DELETE")
            cursor.close()

    return engine


@contextmanager
def get_session(bind: Engine) -> Iterator[Session]:
    session = SessionLocal(bind=bind)
    try:
        yield session
    finally:
        session.close()


def write_store(
    metadata: MetaData,
    rows: Mapping[str, Sequence[Mapping[str, object]]],
    page_size: int = 4096,
) -> bytes:
    """Creates a fresh SQLite file for metadata, inserts rows per table, returns the bytes."""

    with tempfile.TemporaryDirectory(prefix="cloudsift-store-") as tmp:
        path = os.path.join(tmp, "store.sqlite")
        engine = create_sa_engine(f"sqlite:///{path}", page_size=page_size)
        try:
            metadata.create_all(engine)
            with get_session(engine) as session:
                for table in metadata.sorted_tables:
                    # rows are keyed by SQL column name; insert() wants column keys
                    keys = {column.name: column.key for column in table.columns}
                    batch = [
                        {keys.get(name, name): value for name, value in row.items()}
                        for row in rows.get(table.name, ())
                    ]
                    if batch:
                        session.execute(insert(table), batch)
                session.commit()
        finally:
            engine.dispose()
        with open(path, "rb") as handle:
            data = handle.read()
    logger.debug("[DB] wrote %s (%d bytes)", ", ".join(sorted(metadata.tables)), len(data))
    return data
