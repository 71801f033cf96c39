"""Declarative schemas of the cloud-client SQLite stores written by the corpus generator.

Each store is its own SQLite file, so each gets its own declarative base.
Core Data stores (iOS) follow the Z_PK / Z_ENT / Z_OPT convention and keep
timestamps as REAL seconds since 2001-01-01.
"""

import logging
from typing import Optional

from sqlalchemy import Column, Float, Integer, MetaData, String, Table, Text
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column

logger = logging.getLogger(__name__)


# Dropbox Android: databases/db.db


class DropboxDbBase(DeclarativeBase):
    """db.db"""


class DropboxEntry(DropboxDbBase):
    __tablename__ = "dropbox"

    id: Mapped[int] = mapped_column("_id", Integer, primary_key=True)
    data: Mapped[Optional[str]] = mapped_column("_data", Text, nullable=True)
    path: Mapped[Optional[str]] = mapped_column(Text, nullable=True)
    modified: Mapped[Optional[int]] = mapped_column(Integer, nullable=True)
    is_dir: Mapped[int] = mapped_column(Integer, default=0)
    is_favorite: Mapped[int] = mapped_column(Integer, default=0)
    parent_path: Mapped[Optional[str]] = mapped_column(Text, nullable=True)
    last_modified: Mapped[Optional[int]] = mapped_column(Integer, nullable=True)
    display_name: Mapped[str] = mapped_column(Text)
    local_hash: Mapped[Optional[str]] = mapped_column(Text, nullable=True)


class DropboxPrefsBase(DeclarativeBase):
    """prefs.db"""


class DropboxAccountPref(DropboxPrefsBase):
    __tablename__ = "DropboxAccountPrefs"

    id: Mapped[int] = mapped_column("_id", Integer, primary_key=True)
    pref_name: Mapped[str] = mapped_column(Text)
    pref_value: Mapped[Optional[str]] = mapped_column(Text, nullable=True)


# Dropbox iOS: Documents/Dropbox.sqlite


class DropboxCoreDataBase(DeclarativeBase):
    """Dropbox.sqlite"""


class CachedFile(DropboxCoreDataBase):
    __tablename__ = "ZCACHEDFILE"

    pk: Mapped[int] = mapped_column("Z_PK", Integer, primary_key=True)
    ent: Mapped[int] = mapped_column("Z_ENT", Integer, default=1)
    opt: Mapped[int] = mapped_column("Z_OPT", Integer, default=1)
    favorite: Mapped[int] = mapped_column("ZFAVORITE", Integer, default=0)
    is_thumbnail: Mapped[int] = mapped_column("ZISTHUMBNAIL", Integer, default=0)
    view_count: Mapped[int] = mapped_column("ZVIEWCOUNT", Integer, default=0)
    size: Mapped[Optional[int]] = mapped_column("ZSIZE", Integer, nullable=True)
    last_viewed: Mapped[Optional[float]] = mapped_column("ZLASTVIEWEDDATE", Float, nullable=True)
    path: Mapped[str] = mapped_column("ZPATH", String)


# Box iOS: Documents/BoxCoreDataStore.sqlite


class BoxCoreDataBase(DeclarativeBase):
    """BoxCoreDataStore.sqlite"""


class BoxBaseCoreData(BoxCoreDataBase):
    __tablename__ = "ZBOXBASECOREDATA"

    pk: Mapped[int] = mapped_column("Z_PK", Integer, primary_key=True)
    ent: Mapped[int] = mapped_column("Z_ENT", Integer)
    opt: Mapped[int] = mapped_column("Z_OPT", Integer, default=1)
    box_id: Mapped[Optional[int]] = mapped_column("ZBOXID", Integer, nullable=True)
    size: Mapped[Optional[int]] = mapped_column("ZSIZE", Integer, nullable=True)
    favorite: Mapped[Optional[int]] = mapped_column("ZFAVORITEOBJECT", Integer, nullable=True)
    updated: Mapped[Optional[float]] = mapped_column("ZUPDATED", Float, nullable=True)
    last_download: Mapped[Optional[float]] = mapped_column("ZLASTDOWNLOADDATE", Float, nullable=True)
    created: Mapped[Optional[float]] = mapped_column("ZCREATIONTIME", Float, nullable=True)
    name: Mapped[Optional[str]] = mapped_column("ZNAME", String, nullable=True)
    sha1: Mapped[Optional[str]] = mapped_column("ZSHA1", String, nullable=True)
    local_url: Mapped[Optional[str]] = mapped_column("ZLOCALURLSTRING", String, nullable=True)
    streaming_url: Mapped[Optional[str]] = mapped_column("ZSTREAMINGURLSTRING", String, nullable=True)
    local_sha1: Mapped[Optional[str]] = mapped_column("ZLOCALSHA1", String, nullable=True)
    # user rows share the table (Core Data single-table inheritance)
    email: Mapped[Optional[str]] = mapped_column("ZEMAIL", String, nullable=True)
    username: Mapped[Optional[str]] = mapped_column("ZUSERNAME", String, nullable=True)
    auth_token: Mapped[Optional[str]] = mapped_column("ZAUTHTOKEN", String, nullable=True)


# SugarSync Android: databases/SugarSyncDB; the table name carries the user id


def sugarsync_offline_metadata(user_id: str) -> MetaData:
    metadata = MetaData()
    Table(
        f"rec_to_offline_file_{user_id}",
        metadata,
        Column("_id", Integer, primary_key=True),
        Column("file_name", Text, nullable=False),
        Column("file_size", Integer),
        Column("offline_time", Integer),
        Column("remote_path", Text),
    )
    return metadata


# SugarSync iOS: Documents/Ringo.sqlite


class RingoBase(DeclarativeBase):
    """Ringo.sqlite"""


class SyncObject(RingoBase):
    __tablename__ = "ZSYNCOBJECT"

    pk: Mapped[int] = mapped_column("Z_PK", Integer, primary_key=True)
    ent: Mapped[int] = mapped_column("Z_ENT", Integer, default=1)
    opt: Mapped[int] = mapped_column("Z_OPT", Integer, default=1)
    name: Mapped[str] = mapped_column("ZNAME", String)
    size: Mapped[Optional[int]] = mapped_column("ZSIZE", Integer, nullable=True)
    modified: Mapped[Optional[float]] = mapped_column("ZMODIFIED", Float, nullable=True)
    offline: Mapped[int] = mapped_column("ZOFFLINE", Integer, default=1)


# Syncplicity Android 1.7: databases/CacheDatabase.sqlite


class CacheDatabaseBase(DeclarativeBase):
    """CacheDatabase.sqlite"""


class CachedSyncFile(CacheDatabaseBase):
    __tablename__ = "Files"

    id: Mapped[int] = mapped_column("_id", Integer, primary_key=True)
    file_id: Mapped[int] = mapped_column("fileId", Integer)
    name: Mapped[str] = mapped_column(Text)
    length: Mapped[Optional[int]] = mapped_column(Integer, nullable=True)
    file_status: Mapped[int] = mapped_column("fileStatus", Integer, default=1)
    thumbnail_url: Mapped[Optional[str]] = mapped_column("thumbnailURL", Text, nullable=True)


# Syncplicity Android 2.1.1: databases/VIRTUAL_FILE_SYSTEM.db


class VirtualFileSystemBase(DeclarativeBase):
    """VIRTUAL_FILE_SYSTEM.db"""


class VirtualFile(VirtualFileSystemBase):
    __tablename__ = "Files"

    id: Mapped[int] = mapped_column("_id", Integer, primary_key=True)
    file_id: Mapped[int] = mapped_column("File_ID", Integer)
    file_name: Mapped[str] = mapped_column("File_Name", Text)
    is_favorite: Mapped[int] = mapped_column("Is_Favorite", Integer, default=0)
    server_length: Mapped[Optional[int]] = mapped_column("Server_Length", Integer, nullable=True)
    local_length: Mapped[Optional[int]] = mapped_column("Local_Length", Integer, nullable=True)
    is_deleted: Mapped[int] = mapped_column("Is_Deleted", Integer, default=0)
    thumbnail_url: Mapped[Optional[str]] = mapped_column("Thumbnail_URL", Text, nullable=True)


class SyncQueueItem(VirtualFileSystemBase):
    __tablename__ = "Files_and_Folders_to_Synchronize"

    id: Mapped[int] = mapped_column("_id", Integer, primary_key=True)
    name: Mapped[str] = mapped_column("Name", Text)
    path: Mapped[Optional[str]] = mapped_column("Path", Text, nullable=True)


# Syncplicity iOS: Documents/syncplicity.sqlite


class SyncplicityCoreDataBase(DeclarativeBase):
    """syncplicity.sqlite"""


class SyncplicityFile(SyncplicityCoreDataBase):
    __tablename__ = "ZFILES"

    pk: Mapped[int] = mapped_column("Z_PK", Integer, primary_key=True)
    ent: Mapped[int] = mapped_column("Z_ENT", Integer, default=1)
    opt: Mapped[int] = mapped_column("Z_OPT", Integer, default=1)
    length: Mapped[Optional[int]] = mapped_column("ZLENGTH", Integer, nullable=True)
    file_id: Mapped[Optional[int]] = mapped_column("ZFILEID", Integer, nullable=True)
    deleted: Mapped[int] = mapped_column("ZDELETED", Integer, default=0)
    file_name: Mapped[str] = mapped_column("ZFILENAME", String)
    ext: Mapped[Optional[str]] = mapped_column("ZEXT", String, nullable=True)
    thumbnail_url: Mapped[Optional[str]] = mapped_column("ZTHUMBNAILURL", String, nullable=True)


__all__ = [
    "BoxBaseCoreData",
    "BoxCoreDataBase",
    "CacheDatabaseBase",
    "CachedFile",
    "CachedSyncFile",
    "DropboxAccountPref",
    "DropboxCoreDataBase",
    "DropboxDbBase",
    "DropboxEntry",
    "DropboxPrefsBase",
    "RingoBase",
    "SyncObject",
    "SyncQueueItem",
    "SyncplicityCoreDataBase",
    "SyncplicityFile",
    "VirtualFile",
    "VirtualFileSystemBase",
    "sugarsync_offline_metadata",
]
