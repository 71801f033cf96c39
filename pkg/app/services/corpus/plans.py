"""Where each dataset file ends up, per app identity and device state."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Tuple

from app.errors import UncatalogedIdentityError
from app.evidence import AppIdentity, DeviceState, Platform, Provider
from app.services.registry import IOS_ROOT, SignatureRole

INTERNAL = "internal"
SD = "sd"


class Rendition(str, Enum):
    COPY = "copy"
    THUMBNAIL = "thumbnail"
    PREVIEW = "preview"
    ENCRYPTED = "encrypted"


class Naming(str, Enum):
    NAME = "name"
    REMOTE_ID = "remote_id"
    REMOTE_THUMB = "remote_thumb"
    REMOTE_PAGE = "remote_page"
    OPAQUE = "opaque"


@dataclass(frozen=True)
class Placement:
    role: SignatureRole
    tree: str
    directory: str
    files: FrozenSet[int]
    rendition: Rendition = Rendition.COPY
    naming: Naming = Naming.NAME


@dataclass(frozen=True)
class StatePlan:
    placements: Tuple[Placement, ...] = ()
    # written intact into the raw image, as unallocated residue
    carved: FrozenSet[int] = frozenset()


@dataclass(frozen=True)
class IdentityPlan:
    active: StatePlan
    cleared: StatePlan

    def for_state(self, state: DeviceState) -> StatePlan:
        return self.cleared if state.cache_cleared else self.active


def _files(*indexes: int) -> FrozenSet[int]:
    return frozenset(indexes)


JPEGS = _files(1, 2, 3, 4)
OFFLINE = _files(2, 6, 10, 14, 18)
VIEWED = frozenset(range(1, 21)) - _files(3, 7, 11, 15, 19)


def _thumbs(tree: str, directory: str, files=JPEGS, naming: Naming = Naming.NAME) -> Placement:
    return Placement(SignatureRole.THUMBNAIL_DIR, tree, directory, files, Rendition.THUMBNAIL, naming)


def _cache(tree: str, directory: str, files: FrozenSet[int], naming: Naming = Naming.NAME) -> Placement:
    return Placement(SignatureRole.CACHE_DIR, tree, directory, files, naming=naming)


def _offline(tree: str, directory: str) -> Placement:
    return Placement(SignatureRole.OFFLINE_DIR, tree, directory, OFFLINE)


def _encrypted(tree: str, directory: str, files: FrozenSet[int]) -> Placement:
    return Placement(
        SignatureRole.ENCRYPTED_CACHE_DIR, tree, directory, files, Rendition.ENCRYPTED, Naming.OPAQUE
    )


_DROPBOX_SD = "/Android/data/com.dropbox.android"
_DROPBOX_THUMBS = _thumbs(SD, _DROPBOX_SD + "/cache/thumbs")
DROPBOX_ANDROID = IdentityPlan(
    active=StatePlan(
        (_DROPBOX_THUMBS, _cache(SD, _DROPBOX_SD + "/files/scratch", _files(2, 6, 10, 13, 14, 17, 18))),
        carved=_files(16, 20),
    ),
    cleared=StatePlan(
        (_DROPBOX_THUMBS, _cache(SD, _DROPBOX_SD + "/files/scratch", OFFLINE)),
        carved=_files(13, 16, 17, 20),
    ),
)

DROPBOX_IOS = IdentityPlan(
    active=StatePlan(
        (
            _cache(INTERNAL, IOS_ROOT + "/Library/Caches/Dropbox", _files(2, 6, 10, 13, 14, 17, 18)),
            _thumbs(INTERNAL, IOS_ROOT + "/Library/Caches/Dropbox/Thumbnails", _files(1, 2, 3)),
        )
    ),
    cleared=StatePlan((_cache(INTERNAL, IOS_ROOT + "/Library/Caches/Dropbox", OFFLINE),)),
)

_BOX_SD = "/Android/data/com.box.android/cache"
_BOX_167_THUMBS = _thumbs(SD, _BOX_SD + "/tempfiles/box_tmp_images", naming=Naming.REMOTE_THUMB)
BOX_ANDROID_167 = IdentityPlan(
    active=StatePlan(
        (
            _offline(SD, "/Box/{EMAIL}"),
            _cache(SD, _BOX_SD + "/filecache", VIEWED, Naming.REMOTE_ID),
            _BOX_167_THUMBS,
        )
    ),
    cleared=StatePlan((_BOX_167_THUMBS,), carved=VIEWED),
)

_BOX_INTERNAL = "/data/data/com.box.android"
_BOX_202_THUMBS = _thumbs(
    INTERNAL, _BOX_INTERNAL + "/cache/tempfiles/box_tmp_images", naming=Naming.REMOTE_THUMB
)
BOX_ANDROID_202 = IdentityPlan(
    active=StatePlan(
        (
            _BOX_202_THUMBS,
            _cache(INTERNAL, _BOX_INTERNAL + "/cache/working", _files(5, 6, 8, 9, 10, 12), Naming.OPAQUE),
            Placement(
                SignatureRole.PREVIEW_DIR,
                INTERNAL,
                _BOX_INTERNAL + "/files/previews",
                _files(1, 2, 4, 13, 14, 16, 17, 18, 20),
                Rendition.PREVIEW,
                Naming.REMOTE_PAGE,
            ),
            _encrypted(SD, _BOX_SD + "/dl_cache", VIEWED - OFFLINE),
            _encrypted(SD, _BOX_SD + "/dl_offline", OFFLINE),
            _encrypted(SD, _BOX_SD + "/previews", _files(1, 2, 4, 13, 14, 16, 17, 18, 20)),
        )
    ),
    cleared=StatePlan((_BOX_202_THUMBS,), carved=_files(8, 9, 10, 12)),
)

_BOX_IOS_STATE = StatePlan(
    (
        _offline(INTERNAL, IOS_ROOT + "/Documents/SavedFiles"),
        _thumbs(INTERNAL, IOS_ROOT + "/Library/Caches/Thumbnails"),
    )
)
BOX_IOS = IdentityPlan(active=_BOX_IOS_STATE, cleared=_BOX_IOS_STATE)

_SUGARSYNC_THUMBS = _thumbs(SD, "/.sugarsync/.httpfilecache/thumbs")
_SUGARSYNC_PDFS = _cache(SD, "/.sugarsync", _files(13, 14, 16))
SUGARSYNC_ANDROID = IdentityPlan(
    active=StatePlan(
        (
            _SUGARSYNC_PDFS,
            _cache(SD, "/.sugarsync/.httpfilecache", _files(1, 2, 4, 13, 16, 17, 20)),
            _SUGARSYNC_THUMBS,
            _offline(SD, "/MySugarSyncFolders"),
        )
    ),
    cleared=StatePlan(
        (_SUGARSYNC_PDFS, _SUGARSYNC_THUMBS, _offline(SD, "/MySugarSyncFolders")),
        carved=_files(1, 4, 17, 20),
    ),
)

_SUGARSYNC_MP3 = _cache(INTERNAL, IOS_ROOT + "/tmp/cache", _files(5, 6, 8))
_SUGARSYNC_IOS_OFFLINE = _offline(INTERNAL, IOS_ROOT + "/Documents/MyiPhone")
SUGARSYNC_IOS = IdentityPlan(
    active=StatePlan(
        (
            _cache(
                INTERNAL,
                IOS_ROOT + "/tmp/http_cache",
                _files(1, 2, 4, 9, 10, 12, 13, 14, 16, 17, 20),
            ),
            _SUGARSYNC_MP3,
            _SUGARSYNC_IOS_OFFLINE,
        )
    ),
    cleared=StatePlan((_SUGARSYNC_MP3, _SUGARSYNC_IOS_OFFLINE)),
)

_SYNCPLICITY_SD = "/Android/data/com.syncplicity.android"
SYNCPLICITY_ANDROID_17 = IdentityPlan(
    active=StatePlan(
        (
            _thumbs(SD, _SYNCPLICITY_SD + "/cache/cacheifu/image_cache"),
            _offline(SD, "/Syncplicity"),
            _encrypted(
                SD, _SYNCPLICITY_SD + "/cache/private_syncp_file_cache_v3/encrypted/{X}", VIEWED - OFFLINE
            ),
        ),
        carved=_files(17, 20),
    ),
    cleared=StatePlan((_offline(SD, "/Syncplicity"),), carved=_files(17, 20)),
)

_SYNCPLICITY_DECRYPTED = _SYNCPLICITY_SD + "/temporary_decrypted_storage"
SYNCPLICITY_ANDROID_211 = IdentityPlan(
    active=StatePlan(
        (
            _thumbs(SD, _SYNCPLICITY_SD + "/cache/cachefu/image_cache"),
            _encrypted(SD, _SYNCPLICITY_SD + "/encrypted_storage", VIEWED - _files(20)),
            _cache(SD, _SYNCPLICITY_DECRYPTED, VIEWED - _files(20)),
        )
    ),
    cleared=StatePlan(
        (_cache(SD, _SYNCPLICITY_DECRYPTED, OFFLINE),),
        carved=_files(1, 4, 5, 8, 9, 12, 13, 16, 17),
    ),
)

SYNCPLICITY_IOS = IdentityPlan(
    active=StatePlan((_cache(INTERNAL, IOS_ROOT + "/Documents", VIEWED - _files(12)),)),
    cleared=StatePlan(),
)

PLANS: Dict[Tuple[Provider, Platform, str], IdentityPlan] = {
    (Provider.DROPBOX, Platform.ANDROID, "2.1.3"): DROPBOX_ANDROID,
    (Provider.DROPBOX, Platform.ANDROID, "2.2.2"): DROPBOX_ANDROID,
    (Provider.DROPBOX, Platform.IOS, "1.4.7"): DROPBOX_IOS,
    (Provider.BOX, Platform.ANDROID, "1.6.7"): BOX_ANDROID_167,
    (Provider.BOX, Platform.ANDROID, "2.0.2"): BOX_ANDROID_202,
    (Provider.BOX, Platform.IOS, "2.7.1"): BOX_IOS,
    (Provider.SUGARSYNC, Platform.ANDROID, "3.6"): SUGARSYNC_ANDROID,
    (Provider.SUGARSYNC, Platform.ANDROID, "3.6.2"): SUGARSYNC_ANDROID,
    (Provider.SUGARSYNC, Platform.IOS, "3.0"): SUGARSYNC_IOS,
    (Provider.SYNCPLICITY, Platform.ANDROID, "1.7"): SYNCPLICITY_ANDROID_17,
    (Provider.SYNCPLICITY, Platform.ANDROID, "2.1.1"): SYNCPLICITY_ANDROID_211,
    (Provider.SYNCPLICITY, Platform.IOS, "1.6"): SYNCPLICITY_IOS,
}


def plan_for(identity: AppIdentity) -> IdentityPlan:
    try:
        return PLANS[(identity.provider, identity.platform, identity.app_version)]
    except KeyError:
        raise UncatalogedIdentityError(f"no corpus plan for {identity.label}") from None


__all__ = [
    "INTERNAL",
    "IdentityPlan",
    "JPEGS",
    "Naming",
    "OFFLINE",
    "PLANS",
    "Placement",
    "Rendition",
    "SD",
    "StatePlan",
    "VIEWED",
    "plan_for",
]
