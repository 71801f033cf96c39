"""Domain vocabulary: identities, file entries, statuses, timestamps, snapshots."""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple


class Provider(str, Enum):
    BOX = "box"
    DROPBOX = "dropbox"
    SUGARSYNC = "sugarsync"
    SYNCPLICITY = "syncplicity"


class Platform(str, Enum):
    ANDROID = "android"
    IOS = "ios"


class DeviceState(str, Enum):
    ACTIVE_POWER_STATE = "active_power_state"
    CACHE_CLEARED = "cache_cleared"
    POWERED_DOWN = "powered_down"
    CACHE_CLEARED_POWERED_DOWN = "cache_cleared_powered_down"

    @property
    def cache_cleared(self) -> bool:
        return self in (DeviceState.CACHE_CLEARED, DeviceState.CACHE_CLEARED_POWERED_DOWN)

    @property
    def short(self) -> str:
        return _STATE_SHORT[self]

    @classmethod
    def parse(cls, raw: str) -> "DeviceState":
        text = (raw or "").strip().lower()
        for state, short in _STATE_SHORT.items():
            if text in (state.value, short.lower()):
                return state
        raise ValueError(f"unknown device state: {raw!r}")


_STATE_SHORT = {
    DeviceState.ACTIVE_POWER_STATE: "APS",
    DeviceState.CACHE_CLEARED: "CC",
    DeviceState.POWERED_DOWN: "PWD",
    DeviceState.CACHE_CLEARED_POWERED_DOWN: "CC&PWD",
}


class Epoch(str, Enum):
    UNIX_SECONDS = "unix_seconds"
    APPLE_ABSOLUTE_SECONDS = "apple_absolute_seconds"


class HashAlgorithm(str, Enum):
    MD5 = "md5"
    SHA1 = "sha1"

    @property
    def hex_length(self) -> int:
        return 32 if self is HashAlgorithm.MD5 else 40


class RecoveryStatus(str, Enum):
    RECOVERED_INTACT = "recovered_intact"
    RECOVERED_UNVERIFIED = "recovered_unverified"
    CARVED_DELETED = "carved_deleted"
    PREVIEW_ONLY = "preview_only"
    THUMBNAIL_ONLY = "thumbnail_only"
    METADATA_ONLY = "metadata_only"
    ENCRYPTED_CACHE_ONLY = "encrypted_cache_only"
    NOT_OBSERVED = "not_observed"

    @property
    def strength(self) -> int:
        """Lattice level; preview and thumbnail share a level."""
        return _RANK[self] // 10

    @property
    def rank(self) -> int:
        """Total order used to pick one status; thumbnail wins a level tie."""
        return _RANK[self]

    @property
    def recovered(self) -> bool:
        return self in RECOVERED_STATUSES


_RANK = {
    RecoveryStatus.RECOVERED_INTACT: 70,
    RecoveryStatus.RECOVERED_UNVERIFIED: 60,
    RecoveryStatus.CARVED_DELETED: 50,
    RecoveryStatus.THUMBNAIL_ONLY: 41,
    RecoveryStatus.PREVIEW_ONLY: 40,
    RecoveryStatus.METADATA_ONLY: 20,
    RecoveryStatus.ENCRYPTED_CACHE_ONLY: 10,
    RecoveryStatus.NOT_OBSERVED: 0,
}

RECOVERED_STATUSES = frozenset(
    {
        RecoveryStatus.RECOVERED_INTACT,
        RecoveryStatus.RECOVERED_UNVERIFIED,
        RecoveryStatus.CARVED_DELETED,
    }
)


def strongest(statuses: Iterable[RecoveryStatus]) -> RecoveryStatus:
    best = RecoveryStatus.NOT_OBSERVED
    for status in statuses:
        if status.rank > best.rank:
            best = status
    return best


class ObjectOrigin(str, Enum):
    CACHE_PATH = "cache_path"
    OFFLINE_DIR = "offline_dir"
    THUMBNAIL_DIR = "thumbnail_dir"
    PREVIEW_DIR = "preview_dir"
    CARVED = "carved"


UNKNOWN_VERSION = "unknown_version"

CATALOG: Dict[Tuple[Provider, Platform], Tuple[str, ...]] = {
    (Provider.DROPBOX, Platform.ANDROID): ("2.1.3", "2.2.2"),
    (Provider.DROPBOX, Platform.IOS): ("1.4.7",),
    (Provider.BOX, Platform.ANDROID): ("1.6.7", "2.0.2"),
    (Provider.BOX, Platform.IOS): ("2.7.1",),
    (Provider.SUGARSYNC, Platform.ANDROID): ("3.6", "3.6.2"),
    (Provider.SUGARSYNC, Platform.IOS): ("3.0",),
    (Provider.SYNCPLICITY, Platform.ANDROID): ("1.7", "2.1.1"),
    (Provider.SYNCPLICITY, Platform.IOS): ("1.6",),
}


@dataclass(frozen=True, order=True)
class AppIdentity:
    provider: Provider
    platform: Platform
    app_version: str

    @property
    def cataloged(self) -> bool:
        return self.app_version in CATALOG.get((self.provider, self.platform), ())

    @property
    def unknown_version(self) -> bool:
        return self.app_version == UNKNOWN_VERSION

    @property
    def label(self) -> str:
        return f"{self.provider.value}/{self.platform.value}/{self.app_version}"

    @classmethod
    def parse(cls, provider: str, platform: str, app_version: str) -> "AppIdentity":
        return cls(Provider(provider.lower()), Platform(platform.lower()), app_version)


def catalog_identities() -> List[AppIdentity]:
    return [
        AppIdentity(provider, platform, version)
        for (provider, platform), versions in sorted(CATALOG.items())
        for version in versions
    ]


APPLE_EPOCH_OFFSET = 978307200


@dataclass(frozen=True)
class TaggedTimestamp:
    epoch: Epoch
    value: float

    def __post_init__(self) -> None:
        if not isinstance(self.value, (int, float)) or not math.isfinite(self.value):
            raise ValueError(f"timestamp must be finite: {self.value!r}")

    @classmethod
    def unix(cls, value: float) -> "TaggedTimestamp":
        return cls(Epoch.UNIX_SECONDS, value)

    @classmethod
    def apple(cls, value: float) -> "TaggedTimestamp":
        return cls(Epoch.APPLE_ABSOLUTE_SECONDS, value)


def to_unix_seconds(t: TaggedTimestamp) -> float:
    if t.epoch is Epoch.APPLE_ABSOLUTE_SECONDS:
        return t.value + APPLE_EPOCH_OFFSET
    return t.value


_HEX = re.compile(r"^[0-9a-f]+$")


@dataclass(frozen=True)
class ContentHash:
    algorithm: HashAlgorithm
    hex: str

    def __post_init__(self) -> None:
        value = (self.hex or "").strip().lower()
        if len(value) != self.algorithm.hex_length or not _HEX.match(value):
            raise ValueError(f"not a {self.algorithm.value} digest: {self.hex!r}")
        object.__setattr__(self, "hex", value)


@dataclass(frozen=True)
class CloudFileEntry:
    name: str
    remote_id: Optional[str] = None
    size_bytes: Optional[int] = None
    hash: Optional[ContentHash] = None
    created: Optional[TaggedTimestamp] = None
    modified: Optional[TaggedTimestamp] = None
    last_viewed: Optional[TaggedTimestamp] = None
    favorite: Optional[bool] = None
    deleted_flag: Optional[bool] = None
    thumbnail_url: Optional[str] = None
    source_artifact: Optional[str] = None
    extras: Mapping[str, Any] = field(default_factory=dict)
    synthetic_name: bool = False

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("entry name must be non-empty")
        if self.size_bytes is not None and self.size_bytes < 0:
            raise ValueError(f"negative size for {self.name}: {self.size_bytes}")


@dataclass(frozen=True)
class AccountInfo:
    email: Optional[str] = None
    display_name: Optional[str] = None
    user_id: Optional[str] = None
    auth_token: Optional[str] = None
    password_hash: Optional[str] = None
    extras: Mapping[str, Any] = field(default_factory=dict)

    @property
    def identified(self) -> bool:
        return any(
            (self.email, self.display_name, self.user_id, self.auth_token, self.password_hash)
        )


@dataclass(frozen=True)
class LogEvent:
    timestamp: Optional[TaggedTimestamp]
    event_kind: str
    attributes: Mapping[str, Any] = field(default_factory=dict)
    source: Optional[str] = None


@dataclass(frozen=True)
class RecoveredObject:
    logical_name: str
    origin: ObjectOrigin
    length: int
    md5: str
    sha1: str
    path: Optional[str] = None
    tree: Optional[str] = None
    offset: Optional[int] = None

    def __post_init__(self) -> None:
        if self.length <= 0:
            raise ValueError(f"empty recovered object: {self.logical_name}")
        if self.origin is ObjectOrigin.CARVED and (self.offset is None or self.offset < 0):
            raise ValueError(f"carved object without offset: {self.logical_name}")

    @classmethod
    def from_bytes(
        cls,
        logical_name: str,
        origin: ObjectOrigin,
        content: bytes,
        *,
        path: Optional[str] = None,
        tree: Optional[str] = None,
        offset: Optional[int] = None,
    ) -> "RecoveredObject":
        return cls(
            logical_name=logical_name,
            origin=origin,
            length=len(content),
            md5=hashlib.md5(content).hexdigest(),
            sha1=hashlib.sha1(content).hexdigest(),
            path=path,
            tree=tree,
            offset=offset,
        )

    def digest(self, algorithm: HashAlgorithm) -> str:
        return self.md5 if algorithm is HashAlgorithm.MD5 else self.sha1

    @property
    def stem(self) -> str:
        base = self.logical_name.rsplit("/", 1)[-1]
        return base.split(".", 1)[0] if "." in base else base


@dataclass(frozen=True)
class SnapshotEntry:
    entry: CloudFileEntry
    status: RecoveryStatus
    objects: Tuple[RecoveredObject, ...] = ()


@dataclass(frozen=True)
class SnapshotSource:
    role: str
    path: str
    tree: str
    paper_ref: str


@dataclass(frozen=True)
class AppSnapshot:
    identity: AppIdentity
    account: AccountInfo = field(default_factory=AccountInfo)
    entries: Tuple[SnapshotEntry, ...] = ()
    events: Tuple[LogEvent, ...] = ()
    warnings: Tuple[str, ...] = ()
    notes: Tuple[str, ...] = ()
    download_urls: Mapping[str, str] = field(default_factory=dict)
    sources: Tuple[SnapshotSource, ...] = ()

    def entry(self, name: str) -> Optional[SnapshotEntry]:
        for item in self.entries:
            if item.entry.name == name:
                return item
        return None

    def statuses(self) -> Dict[str, RecoveryStatus]:
        return {item.entry.name: item.status for item in self.entries}


def object_status(
    entry: CloudFileEntry,
    obj: RecoveredObject,
    warnings: Optional[List[str]] = None,
) -> RecoveryStatus:
    if obj.origin is ObjectOrigin.CARVED:
        return RecoveryStatus.CARVED_DELETED
    if obj.origin is ObjectOrigin.THUMBNAIL_DIR:
        return RecoveryStatus.THUMBNAIL_ONLY
    if obj.origin is ObjectOrigin.PREVIEW_DIR:
        return RecoveryStatus.PREVIEW_ONLY
    if entry.hash is None:
        return RecoveryStatus.RECOVERED_UNVERIFIED
    if obj.digest(entry.hash.algorithm) == entry.hash.hex:
        return RecoveryStatus.RECOVERED_INTACT
    if warnings is not None:
        warnings.append(
            f"{entry.name}: {entry.hash.algorithm.value} of {obj.logical_name} "
            f"does not match metadata ({entry.hash.hex})"
        )
    return RecoveryStatus.RECOVERED_UNVERIFIED


def classify_status(
    entry: CloudFileEntry,
    objects: Sequence[RecoveredObject],
    warnings: Optional[List[str]] = None,
) -> RecoveryStatus:
    base = (
        RecoveryStatus.METADATA_ONLY
        if entry.source_artifact
        else RecoveryStatus.NOT_OBSERVED
    )
    return strongest([base, *(object_status(entry, obj, warnings) for obj in objects)])


_MERGEABLE = [
    f.name
    for f in fields(CloudFileEntry)
    if f.name not in ("name", "extras", "synthetic_name")
]


def _seen_in(entry: CloudFileEntry) -> List[str]:
    seen = entry.extras.get("also_seen_in")
    if seen is None:
        return []
    return [seen] if isinstance(seen, str) else list(seen)


def merge_entries(
    first: CloudFileEntry,
    second: CloudFileEntry,
    warnings: Optional[List[str]] = None,
) -> CloudFileEntry:
    """Field-wise merge of two descriptions of the same file; first wins conflicts."""

    changes: Dict[str, Any] = {}
    for name in _MERGEABLE:
        a = getattr(first, name)
        b = getattr(second, name)
        if a is None and b is not None:
            changes[name] = b
        elif (
            a is not None
            and b is not None
            and a != b
            and name != "source_artifact"
            and warnings is not None
        ):
            warnings.append(
                f"{first.name}: conflicting {name} ({a!r} from {first.source_artifact}, "
                f"{b!r} from {second.source_artifact})"
            )
    extras = dict(second.extras)
    extras.update(first.extras)
    seen = [
        source
        for source in (
            *_seen_in(first),
            second.source_artifact,
            *_seen_in(second),
        )
        if source and source != first.source_artifact
    ]
    if seen:
        extras["also_seen_in"] = list(dict.fromkeys(seen))
    changes["extras"] = extras
    changes["synthetic_name"] = first.synthetic_name and second.synthetic_name
    return replace(first, **changes)


PROVENANCE_PREFIX = "merged duplicate "


def is_provenance_warning(message: str) -> bool:
    """True for warnings that only record where merged duplicates came from."""

    return message.startswith(PROVENANCE_PREFIX)


def dedupe_entries(
    entries: Iterable[CloudFileEntry],
    warnings: Optional[List[str]] = None,
) -> List[CloudFileEntry]:
    merged: Dict[str, CloudFileEntry] = {}
    for entry in entries:
        current = merged.get(entry.name)
        if current is None:
            merged[entry.name] = entry
            continue
        if warnings is not None:
            # twice in one store is an anomaly; across stores it is provenance
            if entry.source_artifact == current.source_artifact:
                warnings.append(
                    f"{entry.name}: duplicate entry in {entry.source_artifact} merged"
                )
            else:
                kept = [current.source_artifact, *_seen_in(current)]
                warnings.append(
                    f"{PROVENANCE_PREFIX}{entry.name}: "
                    f"{' + '.join(str(s) for s in kept)} + {entry.source_artifact}"
                )
        merged[entry.name] = merge_entries(current, entry, warnings)
    return list(merged.values())


__all__ = [
    "APPLE_EPOCH_OFFSET",
    "AccountInfo",
    "AppIdentity",
    "AppSnapshot",
    "CATALOG",
    "CloudFileEntry",
    "ContentHash",
    "DeviceState",
    "Epoch",
    "HashAlgorithm",
    "LogEvent",
    "PROVENANCE_PREFIX",
    "ObjectOrigin",
    "Platform",
    "Provider",
    "RECOVERED_STATUSES",
    "RecoveredObject",
    "RecoveryStatus",
    "SnapshotEntry",
    "SnapshotSource",
    "TaggedTimestamp",
    "UNKNOWN_VERSION",
    "catalog_identities",
    "classify_status",
    "dedupe_entries",
    "is_provenance_warning",
    "merge_entries",
    "object_status",
    "strongest",
    "to_unix_seconds",
]
