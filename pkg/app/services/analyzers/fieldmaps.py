"""Column -> CloudFileEntry field maps for every cataloged metadata store."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional

from app.evidence import (
    CloudFileEntry,
    ContentHash,
    Epoch,
    HashAlgorithm,
    Platform,
    Provider,
    TaggedTimestamp,
)

ENTRY_FIELDS = (
    "name",
    "remote_id",
    "size_bytes",
    "hash",
    "created",
    "modified",
    "last_viewed",
    "favorite",
    "deleted_flag",
    "thumbnail_url",
)
EXTRAS = "extras"


@dataclass(frozen=True)
class ColumnSpec:
    field: str
    convert: str = "auto"
    epoch: Optional[Epoch] = None
    algorithm: Optional[HashAlgorithm] = None


@dataclass(frozen=True)
class FieldMap:
    provider: Provider
    platform: Platform
    store: str
    table: str
    columns: Mapping[str, ColumnSpec] = field(default_factory=dict)

    def to_entry(
        self,
        record: Mapping[str, Any],
        source: str,
        warnings: Optional[List[str]] = None,
    ) -> Optional[CloudFileEntry]:
        values: Dict[str, Any] = {}
        extras: Dict[str, Any] = {}
        for column, raw in record.items():
            spec = self.columns.get(column)
            if spec is None or spec.field == EXTRAS:
                if raw is not None:
                    extras[column] = extra_value(raw)
                continue
            try:
                converted = _convert(raw, spec)
            except (TypeError, ValueError) as exc:
                if warnings is not None:
                    warnings.append(f"{source}: {self.table}.{column} value {raw!r} ignored: {exc}")
                extras[column] = extra_value(raw)
                continue
            if converted is None:
                continue
            if spec.convert == "basename" and converted != raw:
                extras[column] = raw
            values[spec.field] = converted
        name = values.pop("name", None)
        if not name:
            if warnings is not None:
                warnings.append(f"{source}: {self.table} record without a file name skipped")
            return None
        return CloudFileEntry(name=name, source_artifact=source, extras=extras, **values)


def extra_value(raw: Any) -> Any:
    if isinstance(raw, (bytes, bytearray)):
        return bytes(raw).hex()
    if isinstance(raw, TaggedTimestamp):
        return {"epoch": raw.epoch.value, "value": raw.value}
    return raw


def _as_bool(raw: Any) -> Optional[bool]:
    if isinstance(raw, bool):
        return raw
    if isinstance(raw, (int, float)):
        return bool(raw)
    text = str(raw).strip().lower()
    if text in ("1", "true", "yes", "y", "t"):
        return True
    if text in ("0", "false", "no", "n", "f", ""):
        return False
    raise ValueError("not a boolean")


def _convert(raw: Any, spec: ColumnSpec) -> Any:
    if raw is None:
        return None
    if spec.field == "hash":
        assert spec.algorithm is not None
        if not raw:
            return None
        return ContentHash(spec.algorithm, str(raw))
    if spec.epoch is not None:
        if isinstance(raw, TaggedTimestamp):
            return raw
        return TaggedTimestamp(spec.epoch, float(raw))
    if spec.convert == "bool":
        return _as_bool(raw)
    if spec.convert == "not_bool":
        value = _as_bool(raw)
        return None if value is None else not value
    if spec.convert == "int":
        if isinstance(raw, bool):
            raise ValueError("boolean where a size was expected")
        return int(raw)
    if spec.convert == "id":
        if isinstance(raw, float) and raw.is_integer():
            raw = int(raw)
        return str(raw)
    if spec.convert == "basename":
        return str(raw).rstrip("/").rsplit("/", 1)[-1]
    return str(raw) if not isinstance(raw, str) else raw


def _unix(name: str) -> ColumnSpec:
    return ColumnSpec(name, epoch=Epoch.UNIX_SECONDS)


def _apple(name: str) -> ColumnSpec:
    return ColumnSpec(name, epoch=Epoch.APPLE_ABSOLUTE_SECONDS)


_X = ColumnSpec(EXTRAS)

DROPBOX_ANDROID_FILES = FieldMap(
    Provider.DROPBOX,
    Platform.ANDROID,
    "db.db",
    "dropbox",
    {
        "_data": _X,
        "modified": _unix("created"),
        "is_favorite": ColumnSpec("favorite", "bool"),
        "parent_path": _X,
        "last_modified": _unix("modified"),
        "display_name": ColumnSpec("name"),
        "local_hash": ColumnSpec("hash", algorithm=HashAlgorithm.MD5),
    },
)

DROPBOX_IOS_FILES = FieldMap(
    Provider.DROPBOX,
    Platform.IOS,
    "Dropbox.sqlite",
    "ZCACHEDFILE",
    {
        "ZFAVORITE": ColumnSpec("favorite", "bool"),
        "ZSIZE": ColumnSpec("size_bytes", "int"),
        "ZVIEWCOUNT": _X,
        "ZISTHUMBNAIL": _X,
        "ZLASTVIEWEDDATE": _apple("last_viewed"),
        "ZPATH": ColumnSpec("name", "basename"),
    },
)

DROPBOX_IOS_FAVORITES = FieldMap(
    Provider.DROPBOX,
    Platform.IOS,
    "FavoriteFiles.plist",
    "<root array>",
    {
        "name": ColumnSpec("name", "basename"),
        "size": ColumnSpec("size_bytes", "int"),
        "modified": _apple("modified"),
        "deleted": ColumnSpec("deleted_flag", "bool"),
    },
)

BOX_ANDROID_FILES = FieldMap(
    Provider.BOX,
    Platform.ANDROID,
    "json_static_model_<email>_0",
    "<file objects>",
    {
        "mThumbnail": ColumnSpec("thumbnail_url"),
        "mFileName": ColumnSpec("name"),
        "mSha1": ColumnSpec("hash", algorithm=HashAlgorithm.SHA1),
        "mUpdated": _unix("modified"),
        "mId": ColumnSpec("remote_id", "id"),
        "mSize": ColumnSpec("size_bytes", "int"),
        "mCreated": _unix("created"),
        "mShared": _X,
    },
)

BOX_IOS_FILES = FieldMap(
    Provider.BOX,
    Platform.IOS,
    "BoxCoreDataStore.sqlite",
    "ZBOXBASECOREDATA",
    {
        "ZBOXID": ColumnSpec("remote_id", "id"),
        "ZSIZE": ColumnSpec("size_bytes", "int"),
        "ZFAVORITEOBJECT": ColumnSpec("favorite", "bool"),
        "ZUPDATED": _apple("modified"),
        "ZLASTDOWNLOADDATE": _apple("last_viewed"),
        "ZCREATIONTIME": _apple("created"),
        "ZNAME": ColumnSpec("name"),
        "ZSHA1": ColumnSpec("hash", algorithm=HashAlgorithm.SHA1),
        "ZLOCALURLSTRING": _X,
        "ZSTREAMINGURLSTRING": _X,
        "ZLOCALSHA1": _X,
    },
)

SUGARSYNC_ANDROID_OFFLINE = FieldMap(
    Provider.SUGARSYNC,
    Platform.ANDROID,
    "SugarSyncDB",
    "rec_to_offline_file_<user id>",
    {
        "file_name": ColumnSpec("name", "basename"),
        "file_size": ColumnSpec("size_bytes", "int"),
        "offline_time": _X,
        "remote_path": _X,
    },
)

SUGARSYNC_IOS_OFFLINE = FieldMap(
    Provider.SUGARSYNC,
    Platform.IOS,
    "Ringo.sqlite",
    "ZSYNCOBJECT",
    {
        "ZNAME": ColumnSpec("name", "basename"),
        "ZSIZE": ColumnSpec("size_bytes", "int"),
        "ZMODIFIED": _apple("modified"),
        "ZOFFLINE": ColumnSpec("favorite", "bool"),
    },
)

SYNCPLICITY_CACHE_DATABASE = FieldMap(
    Provider.SYNCPLICITY,
    Platform.ANDROID,
    "CacheDatabase.sqlite",
    "Files",
    {
        "fileId": ColumnSpec("remote_id", "id"),
        "name": ColumnSpec("name"),
        "length": ColumnSpec("size_bytes", "int"),
        # 1 = still stored in the service, 0 = deleted
        "fileStatus": ColumnSpec("deleted_flag", "not_bool"),
        "thumbnailURL": ColumnSpec("thumbnail_url"),
    },
)

SYNCPLICITY_VIRTUAL_FILE_SYSTEM = FieldMap(
    Provider.SYNCPLICITY,
    Platform.ANDROID,
    "VIRTUAL_FILE_SYSTEM.db",
    "Files",
    {
        "File_ID": ColumnSpec("remote_id", "id"),
        "File_Name": ColumnSpec("name"),
        "Is_Favorite": ColumnSpec("favorite", "bool"),
        "Server_Length": ColumnSpec("size_bytes", "int"),
        "Local_Length": _X,
        "Is_Deleted": ColumnSpec("deleted_flag", "bool"),
        "Thumbnail_URL": ColumnSpec("thumbnail_url"),
    },
)

SYNCPLICITY_IOS_FILES = FieldMap(
    Provider.SYNCPLICITY,
    Platform.IOS,
    "syncplicity.sqlite",
    "ZFILES",
    {
        "ZLENGTH": ColumnSpec("size_bytes", "int"),
        "ZFILEID": ColumnSpec("remote_id", "id"),
        "ZDELETED": ColumnSpec("deleted_flag", "bool"),
        "ZFILENAME": ColumnSpec("name"),
        "ZEXT": _X,
        "ZTHUMBNAILURL": ColumnSpec("thumbnail_url"),
    },
)

FIELD_MAPS = (
    DROPBOX_ANDROID_FILES,
    DROPBOX_IOS_FILES,
    DROPBOX_IOS_FAVORITES,
    BOX_ANDROID_FILES,
    BOX_IOS_FILES,
    SUGARSYNC_ANDROID_OFFLINE,
    SUGARSYNC_IOS_OFFLINE,
    SYNCPLICITY_CACHE_DATABASE,
    SYNCPLICITY_VIRTUAL_FILE_SYSTEM,
    SYNCPLICITY_IOS_FILES,
)

__all__ = ["ColumnSpec", "FIELD_MAPS", "FieldMap", "extra_value"]
