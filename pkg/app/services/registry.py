"""Catalog of known artifact locations per provider, platform and app version."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

from app.errors import RegistryError
from app.evidence import AppIdentity, Platform, Provider

logger = logging.getLogger(__name__)

PLACEHOLDERS = ("APPROOT", "EMAIL", "USERID", "X")

IOS_APPLICATIONS = "/private/var/mobile/Applications"
IOS_ROOT = IOS_APPLICATIONS + "/{APPROOT}"


class SignatureRole(str, Enum):
    METADATA_STORE = "metadata_store"
    CACHE_DIR = "cache_dir"
    OFFLINE_DIR = "offline_dir"
    THUMBNAIL_DIR = "thumbnail_dir"
    PREVIEW_DIR = "preview_dir"
    ENCRYPTED_CACHE_DIR = "encrypted_cache_dir"
    LOG_FILE = "log_file"
    PREFS_FILE = "prefs_file"

    @property
    def is_directory(self) -> bool:
        return self in DIRECTORY_ROLES


DIRECTORY_ROLES = frozenset(
    {
        SignatureRole.CACHE_DIR,
        SignatureRole.OFFLINE_DIR,
        SignatureRole.THUMBNAIL_DIR,
        SignatureRole.PREVIEW_DIR,
        SignatureRole.ENCRYPTED_CACHE_DIR,
    }
)


@dataclass(frozen=True)
class PathSignature:
    identity: AppIdentity
    role: SignatureRole
    pattern: str
    paper_ref: str

    def __post_init__(self) -> None:
        rest = self.pattern
        while "{" in rest:
            start = rest.index("{")
            end = rest.find("}", start)
            if end == -1 or rest[start + 1 : end] not in PLACEHOLDERS:
                raise RegistryError(f"bad placeholder in pattern {self.pattern!r}")
            rest = rest[end + 1 :]
        if not self.paper_ref:
            raise RegistryError(f"signature without provenance: {self.pattern}")

    @property
    def key(self) -> Tuple[str, str]:
        return self.role.value, self.pattern

    def to_dict(self) -> dict:
        return {
            "provider": self.identity.provider.value,
            "platform": self.identity.platform.value,
            "version": self.identity.app_version,
            "role": self.role.value,
            "pattern": self.pattern,
            "paper_ref": self.paper_ref,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "PathSignature":
        try:
            identity = AppIdentity.parse(raw["provider"], raw["platform"], str(raw["version"]))
            return cls(identity, SignatureRole(raw["role"]), raw["pattern"], raw["paper_ref"])
        except (KeyError, ValueError, TypeError) as exc:
            raise RegistryError(f"invalid registry record {raw!r}: {exc}") from None


# (role, pattern, provenance) rows; each row is registered for every listed version
_Row = Tuple[SignatureRole, str, str]

_DROPBOX_ANDROID: Sequence[_Row] = (
    (SignatureRole.THUMBNAIL_DIR, "/Android/data/com.dropbox.android/cache/thumbs",
     "Dropbox Android: SD thumbnails of JPEG images"),
    (SignatureRole.CACHE_DIR, "/Android/data/com.dropbox.android/files/scratch",
     "Dropbox Android: SD scratch folder with offline and viewed documents"),
    (SignatureRole.METADATA_STORE, "/data/data/com.dropbox.android/databases/db.db",
     "Dropbox Android: db.db table dropbox, files currently in the service"),
    (SignatureRole.PREFS_FILE, "/data/data/com.dropbox.android/databases/prefs.db",
     "Dropbox Android: prefs.db table DropboxAccountPrefs, user name and email"),
    (SignatureRole.LOG_FILE, "/data/data/com.dropbox.android/files/log.txt",
     "Dropbox Android: log.txt transaction log with UNIX timestamps"),
)

_DROPBOX_IOS: Sequence[_Row] = (
    (SignatureRole.CACHE_DIR, IOS_ROOT + "/Library/Caches/Dropbox",
     "Dropbox iOS: Library/Caches/Dropbox offline and viewed files"),
    (SignatureRole.THUMBNAIL_DIR, IOS_ROOT + "/Library/Caches/Dropbox/Thumbnails",
     "Dropbox iOS: JPEG thumbnails kept beside the Dropbox cache"),
    (SignatureRole.METADATA_STORE, IOS_ROOT + "/Documents/Dropbox.sqlite",
     "Dropbox iOS: Dropbox.sqlite table ZCACHEDFILE"),
    (SignatureRole.METADATA_STORE, IOS_ROOT + "/Library/Caches/FavoriteFiles.plist",
     "Dropbox iOS: FavoriteFiles.plist size, modified time, name, deleted"),
    (SignatureRole.PREFS_FILE, IOS_ROOT + "/Library/Preferences/com.getdropbox.Dropbox.plist",
     "Dropbox iOS: preferences plist holding the account email"),
    (SignatureRole.LOG_FILE, IOS_ROOT + "/Library/Caches/Analytics.log",
     "Dropbox iOS: Analytics.log JSON events"),
    (SignatureRole.LOG_FILE, IOS_ROOT + "/tmp/run.log",
     "Dropbox iOS: run.log service transactions"),
)

_BOX_ANDROID_SHARED: Sequence[_Row] = (
    (SignatureRole.METADATA_STORE, "/data/data/com.box.android/files/json_static_model_{EMAIL}_0",
     "Box Android: json_static_model JSON with per-file properties"),
    (SignatureRole.PREFS_FILE, "/data/data/com.box.android/shared_prefs/myPreference.xml",
     "Box Android: myPreference.xml auth token and email"),
)

_BOX_ANDROID_167: Sequence[_Row] = (
    (SignatureRole.OFFLINE_DIR, "/Box/{EMAIL}",
     "Box Android 1.6.7: SD Box/<email> offline files"),
    (SignatureRole.CACHE_DIR, "/Android/data/com.box.android/cache/filecache",
     "Box Android 1.6.7: SD filecache of viewed files"),
    (SignatureRole.THUMBNAIL_DIR, "/Android/data/com.box.android/cache/tempfiles/box_tmp_images",
     "Box Android 1.6.7: SD JPEG thumbnails"),
    (SignatureRole.PREFS_FILE, "/data/data/com.box.android/shared_prefs/Downloaded_Files.xml",
     "Box Android 1.6.7: Downloaded_Files.xml ids of files stored on SD"),
)

_BOX_ANDROID_202: Sequence[_Row] = (
    (SignatureRole.ENCRYPTED_CACHE_DIR, "/Android/data/com.box.android/cache/dl_cache",
     "Box Android 2.0.2: encrypted download cache"),
    (SignatureRole.ENCRYPTED_CACHE_DIR, "/Android/data/com.box.android/cache/dl_offline",
     "Box Android 2.0.2: encrypted offline folder"),
    (SignatureRole.ENCRYPTED_CACHE_DIR, "/Android/data/com.box.android/cache/previews",
     "Box Android 2.0.2: encrypted previews folder"),
    (SignatureRole.THUMBNAIL_DIR, "/data/data/com.box.android/cache/tempfiles/box_tmp_images",
     "Box Android 2.0.2: internal JPEG thumbnails"),
    (SignatureRole.CACHE_DIR, "/data/data/com.box.android/cache/working",
     "Box Android 2.0.2: working folder with viewed audio and video"),
    (SignatureRole.PREVIEW_DIR, "/data/data/com.box.android/files/previews",
     "Box Android 2.0.2: PNG page previews of viewed documents and images"),
    (SignatureRole.PREFS_FILE, "/data/data/com.box.android/shared_prefs/Preview_Num_Pages.xml",
     "Box Android 2.0.2: Preview_Num_Pages.xml preview page counts per mId"),
    (SignatureRole.PREFS_FILE,
     "/data/data/com.box.android/shared_prefs/offlineFileSharedPreferences.xml",
     "Box Android 2.0.2: offlineFileSharedPreferences.xml offline file ids"),
)

_BOX_IOS: Sequence[_Row] = (
    (SignatureRole.OFFLINE_DIR, IOS_ROOT + "/Documents/SavedFiles",
     "Box iOS: Documents/SavedFiles offline files"),
    (SignatureRole.THUMBNAIL_DIR, IOS_ROOT + "/Library/Caches/Thumbnails",
     "Box iOS: Library/Caches/Thumbnails JPEG thumbnails"),
    (SignatureRole.METADATA_STORE, IOS_ROOT + "/Documents/BoxCoreDataStore.sqlite",
     "Box iOS: BoxCoreDataStore.sqlite table ZBOXBASECOREDATA"),
)

_SUGARSYNC_ANDROID: Sequence[_Row] = (
    (SignatureRole.CACHE_DIR, "/.sugarsync",
     "SugarSync Android: SD .sugarsync viewed PDF files"),
    (SignatureRole.CACHE_DIR, "/.sugarsync/.httpfilecache",
     "SugarSync Android: SD .httpfilecache viewed images and documents"),
    (SignatureRole.THUMBNAIL_DIR, "/.sugarsync/.httpfilecache/thumbs",
     "SugarSync Android: JPEG thumbnails kept under .httpfilecache"),
    (SignatureRole.OFFLINE_DIR, "/MySugarSyncFolders",
     "SugarSync Android: SD MySugarSyncFolders offline files"),
    (SignatureRole.PREFS_FILE, "/data/data/com.sharpcast.sugarsync/app_SugarSync/SugarSync/sc_appdata",
     "SugarSync Android: sc_appdata email, user id and password hash"),
    (SignatureRole.LOG_FILE,
     "/data/data/com.sharpcast.sugarsync/app_SugarSync/SugarSync/log/sugarsync.log",
     "SugarSync Android: sugarsync.log service events"),
    (SignatureRole.METADATA_STORE, "/data/data/com.sharpcast.sugarsync/databases/SugarSyncDB",
     "SugarSync Android: SugarSyncDB table rec_to_offline_file_<user id>"),
)

_SUGARSYNC_IOS: Sequence[_Row] = (
    (SignatureRole.CACHE_DIR, IOS_ROOT + "/tmp/http_cache",
     "SugarSync iOS: tmp/http_cache viewed images, video and documents"),
    (SignatureRole.CACHE_DIR, IOS_ROOT + "/tmp/cache",
     "SugarSync iOS: tmp/cache viewed MP3 files"),
    (SignatureRole.OFFLINE_DIR, IOS_ROOT + "/Documents/MyiPhone",
     "SugarSync iOS: Documents/MyiPhone offline files"),
    (SignatureRole.PREFS_FILE, IOS_ROOT + "/Documents/ringo.appdata",
     "SugarSync iOS: ringo.appdata account email"),
    (SignatureRole.METADATA_STORE, IOS_ROOT + "/Documents/Ringo.sqlite",
     "SugarSync iOS: Ringo.sqlite table ZSYNCOBJECT"),
)

_SYNCPLICITY_PREFS: Sequence[_Row] = tuple(
    row
    for package in ("com.syncplicity", "com.syncplicity.android")
    for row in (
        (SignatureRole.PREFS_FILE, f"/data/data/{package}/shared_prefs/auth_prefs.xml",
         "Syncplicity Android: auth_prefs.xml account email"),
        (SignatureRole.PREFS_FILE,
         f"/data/data/{package}/shared_prefs/file_cache_preferences{{X}}.deleted.xml",
         "Syncplicity Android: file_cache_preferences deleted-file mappings"),
    )
)

_SYNCPLICITY_ANDROID_17: Sequence[_Row] = (
    (SignatureRole.THUMBNAIL_DIR, "/Android/data/com.syncplicity.android/cache/cacheifu/image_cache",
     "Syncplicity Android 1.7: SD image_cache thumbnails (cacheifu spelling)"),
    (SignatureRole.THUMBNAIL_DIR, "/Android/data/com.syncplicity.android/cache/cachefu/image_cache",
     "Syncplicity Android: SD image_cache thumbnails (cachefu spelling)"),
    (SignatureRole.OFFLINE_DIR, "/Syncplicity",
     "Syncplicity Android 1.7: SD Syncplicity offline files"),
    (SignatureRole.ENCRYPTED_CACHE_DIR,
     "/Android/data/com.syncplicity.android/cache/private_syncp_file_cache_v3/encrypted/{X}",
     "Syncplicity Android 1.7: encrypted cache folder per user id"),
    (SignatureRole.CACHE_DIR, "/data/data/com.syncplicity.android/files",
     "Syncplicity Android 1.7: internal files folder of viewed files"),
    (SignatureRole.METADATA_STORE, "/data/data/com.syncplicity.android/databases/CacheDatabase.sqlite",
     "Syncplicity Android 1.7: CacheDatabase.sqlite table Files"),
    *_SYNCPLICITY_PREFS,
)

_SYNCPLICITY_ANDROID_211: Sequence[_Row] = (
    (SignatureRole.THUMBNAIL_DIR, "/Android/data/com.syncplicity.android/cache/cachefu/image_cache",
     "Syncplicity Android: SD image_cache thumbnails (cachefu spelling)"),
    (SignatureRole.ENCRYPTED_CACHE_DIR, "/Android/data/com.syncplicity.android/encrypted_storage",
     "Syncplicity Android 2.1.1: encrypted_storage cache"),
    (SignatureRole.CACHE_DIR, "/Android/data/com.syncplicity.android/temporary_decrypted_storage",
     "Syncplicity Android 2.1.1: temporary_decrypted_storage viewed files"),
    (SignatureRole.LOG_FILE,
     "/data/data/com.syncplicity.android/app_log_syncplicity/00000000000000000000.log.gz.tmp",
     "Syncplicity Android 2.1.1: app_log_syncplicity transaction log"),
    (SignatureRole.METADATA_STORE, "/data/data/com.syncplicity.android/databases/VIRTUAL_FILE_SYSTEM.db",
     "Syncplicity Android 2.1.1: VIRTUAL_FILE_SYSTEM.db tables Files and "
     "Files_and_Folders_to_Synchronize"),
    *_SYNCPLICITY_PREFS,
)

_SYNCPLICITY_IOS: Sequence[_Row] = (
    (SignatureRole.CACHE_DIR, IOS_ROOT + "/Documents",
     "Syncplicity iOS: Documents cache folder of viewed files"),
    (SignatureRole.METADATA_STORE, IOS_ROOT + "/Documents/syncplicity.sqlite",
     "Syncplicity iOS: syncplicity.sqlite table ZFILES"),
    (SignatureRole.PREFS_FILE, IOS_ROOT + "/library/preferences/com.syncplicity.ios/syncplicity.plist",
     "Syncplicity iOS: syncplicity.plist account type and user name"),
    (SignatureRole.LOG_FILE, IOS_ROOT + "/library/caches/syncplicity_0.log",
     "Syncplicity iOS: syncplicity_0.log downloads and token sync"),
)

_TABLE: Sequence[Tuple[Provider, Platform, Sequence[str], Sequence[_Row]]] = (
    (Provider.DROPBOX, Platform.ANDROID, ("2.1.3", "2.2.2"), _DROPBOX_ANDROID),
    (Provider.DROPBOX, Platform.IOS, ("1.4.7",), _DROPBOX_IOS),
    (Provider.BOX, Platform.ANDROID, ("1.6.7", "2.0.2"), _BOX_ANDROID_SHARED),
    (Provider.BOX, Platform.ANDROID, ("1.6.7",), _BOX_ANDROID_167),
    (Provider.BOX, Platform.ANDROID, ("2.0.2",), _BOX_ANDROID_202),
    (Provider.BOX, Platform.IOS, ("2.7.1",), _BOX_IOS),
    (Provider.SUGARSYNC, Platform.ANDROID, ("3.6", "3.6.2"), _SUGARSYNC_ANDROID),
    (Provider.SUGARSYNC, Platform.IOS, ("3.0",), _SUGARSYNC_IOS),
    (Provider.SYNCPLICITY, Platform.ANDROID, ("1.7",), _SYNCPLICITY_ANDROID_17),
    (Provider.SYNCPLICITY, Platform.ANDROID, ("2.1.1",), _SYNCPLICITY_ANDROID_211),
    (Provider.SYNCPLICITY, Platform.IOS, ("1.6",), _SYNCPLICITY_IOS),
)


def builtin_registry() -> List[PathSignature]:
    signatures: List[PathSignature] = []
    for provider, platform, versions, rows in _TABLE:
        for version in versions:
            identity = AppIdentity(provider, platform, version)
            for role, pattern, ref in rows:
                signatures.append(PathSignature(identity, role, pattern, ref))
    return signatures


def export_registry(signatures: Iterable[PathSignature]) -> str:
    records = [signature.to_dict() for signature in signatures]
    return json.dumps(records, indent=2, ensure_ascii=False) + "\n"


def parse_registry(text: str) -> List[PathSignature]:
    try:
        records = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RegistryError(f"registry is not valid JSON: {exc}") from None
    if not isinstance(records, list):
        raise RegistryError("registry must be a JSON array")
    return [PathSignature.from_dict(record) for record in records]


def load_registry(path: Optional[str] = None) -> List[PathSignature]:
    if not path:
        return builtin_registry()
    try:
        with open(path, "r", encoding="utf-8") as handle:
            signatures = parse_registry(handle.read())
    except OSError as exc:
        raise RegistryError(f"cannot read registry {path}: {exc}") from None
    logger.info("[SCAN] registry %s: %d signatures", path, len(signatures))
    return signatures


__all__ = [
    "DIRECTORY_ROLES",
    "IOS_APPLICATIONS",
    "PathSignature",
    "SignatureRole",
    "builtin_registry",
    "export_registry",
    "load_registry",
    "parse_registry",
]
