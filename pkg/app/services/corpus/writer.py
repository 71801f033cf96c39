"""Synthetic evidence for one scenario: extracted trees, raw image and manifest."""

from __future__ import annotations

import datetime as dt
import gzip
import json
import logging
import os
import plistlib
import random
import uuid
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Set, Tuple
from xml.sax.saxutils import escape, quoteattr

from app.db import models
from app.db.engine import write_store
from app.errors import UncatalogedIdentityError
from app.evidence import (
    APPLE_EPOCH_OFFSET,
    AppIdentity,
    DeviceState,
    Platform,
    Provider,
    catalog_identities,
)
from app.services.corpus.dataset import DatasetFile, builtin_dataset, preview_png, thumbnail
from app.services.corpus.plans import (
    INTERNAL,
    SD,
    Naming,
    Placement,
    Rendition,
    StatePlan,
    plan_for,
)
from app.services.corpus.tables import RECONSTRUCTED, expected_column
from app.services.image import EvidenceTree, RawImage, tree_from_mapping
from app.services.registry import IOS_ROOT, SignatureRole
from app.services.storage import output_path, save_bytes, save_json

logger = logging.getLogger(__name__)

DEFAULT_EMAIL = "examiner.test@example.com"
DISPLAY_NAME = "Test Examiner"
BOX_AUTH_TOKEN = "u5es7xli4xejrh89kr6xu14tks6grjn3"
# mId of dataset file n is BOX_ID_BASE + n, so 03.jpg is 2072716499
BOX_ID_BASE = 2072716496
SYNCPLICITY_ID_BASE = 481516000
SYNCPLICITY_VERSION_BASE = 145789440

RAW_LABEL = "raw"
MIN_RAW_IMAGE = 64 * 1024
ANDROID_PAGE_SIZE = 1024
IOS_PAGE_SIZE = 4096

# the device session starts five days after the uploads
SESSION_START = 1335445600
VIEW_SPACING = 45

# filler never contains an ASCII letter, 0xFF or a carve signature byte
_FILLER_TABLE = bytes(0x80 + i % 0x70 for i in range(256))

# a document view recorded by the Dropbox iOS client, kept byte for byte
DOCUMENT_VIEW_EVENTS = (
    '{ "retry":0, "favorite":false, "extension":"pdf", "id":23, "cached":false, '
    '"ts":"1335445641.29", "event":"file.view.start", "size":1695706 }',
    '{ "id":23, "ts":"1335445641.31", "size":1695706, "event":"download.start", '
    '"extension":"pdf", "connection":"wifi" }',
    '{ "ts":"1335445641.84", "screen":"DocumentViewController", "event":"screen.view" }',
    '{ "id":23, "ts":"1335445657.75", "size":1695706, "event":"download.success", '
    '"extension":"pdf" }',
    '{ "id":23, "event":"file.view.success", "ts":"1335445659.92" }',
    '{ "ts":"1335445669.71", "screen":"SearchableFolderListController", "event":"screen.view" }',
    '{ "ts":"1335445670.04", "cached":true, "path_hash":912, "event":"metadata.load.start" }',
    '{ "path_hash":912, "event":"metadata.load.unchanged", "ts":"1335445673.07" }',
)
DOCUMENT_VIEW_FILE = 13

_DROPBOX_DATA = "/data/data/com.dropbox.android"
_BOX_DATA = "/data/data/com.box.android"
_SUGARSYNC_DATA = "/data/data/com.sharpcast.sugarsync"
_SYNCPLICITY_DATA = "/data/data/com.syncplicity.android"


@dataclass(frozen=True)
class Scenario:
    identity: AppIdentity
    device_state: DeviceState
    seed: int = 0

    @property
    def state_class(self) -> str:
        # powering down changes nothing on disk
        return "cc" if self.device_state.cache_cleared else "aps"

    @property
    def rng_key(self) -> str:
        return f"{self.seed}:{self.identity.label}:{self.state_class}"

    @property
    def slug(self) -> str:
        identity = self.identity
        state = self.device_state.short.replace("&", "-").lower()
        return f"{identity.provider.value}-{identity.platform.value}-{identity.app_version}-{state}"


@dataclass(frozen=True, order=True)
class ExpectedHit:
    role: str
    path: str
    tree: str

    def to_dict(self) -> Dict[str, str]:
        return {"role": self.role, "path": self.path, "tree": self.tree}


@dataclass
class Manifest:
    scenario: Scenario
    expected_cells: Dict[str, str]
    expected_hits: List[ExpectedHit]
    files: Dict[str, Dict[str, Any]]
    carve_offsets: Dict[str, int] = field(default_factory=dict)
    reconstructed: bool = False
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        identity = self.scenario.identity
        return {
            "scenario": {
                "provider": identity.provider.value,
                "platform": identity.platform.value,
                "app_version": identity.app_version,
                "device_state": self.scenario.device_state.short,
                "seed": self.scenario.seed,
            },
            "expected_cells": dict(self.expected_cells),
            "expected_hits": [hit.to_dict() for hit in sorted(self.expected_hits)],
            "files": self.files,
            "carve_offsets": dict(sorted(self.carve_offsets.items(), key=lambda kv: kv[1])),
            "reconstructed": self.reconstructed,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


@dataclass
class GeneratedCorpus:
    scenario: Scenario
    files: Dict[str, Dict[str, bytes]]
    raw: Optional[bytes]
    manifest: Manifest

    def evidence_trees(self) -> List[EvidenceTree]:
        return [tree_from_mapping(label, files) for label, files in sorted(self.files.items())]

    def raw_image(self) -> Optional[RawImage]:
        return RawImage(self.raw, None, RAW_LABEL) if self.raw is not None else None


def write_corpus(corpus: GeneratedCorpus, out_dir: str) -> Dict[str, str]:
    """Lays the corpus out as <label>/..., raw.img and manifest.json; returns the paths."""

    written: Dict[str, str] = {}
    for label, files in sorted(corpus.files.items()):
        root = output_path(out_dir, label)
        os.makedirs(root, exist_ok=True)
        for path, body in sorted(files.items()):
            save_bytes(root, path, body)
        written[label] = root
    if corpus.raw is not None:
        written[RAW_LABEL] = save_bytes(out_dir, "raw.img", corpus.raw).path
    written["manifest"] = save_json(out_dir, "manifest.json", corpus.manifest.to_dict()).path
    logger.info("[CORPUS] %s written to %s", corpus.scenario.slug, out_dir)
    return written


def apple_time(unix_seconds: float) -> float:
    return float(unix_seconds - APPLE_EPOCH_OFFSET)


def view_time(index: int) -> int:
    return SESSION_START + index * VIEW_SPACING


def box_id(index: int) -> int:
    return BOX_ID_BASE + index


def shared_prefs_xml(entries: Sequence[Tuple[str, str, Any]]) -> bytes:
    """Android SharedPreferences XML from (kind, name, value) triples."""

    lines = ["<?xml version='1.0' encoding='utf-8' standalone='yes' ?>", "<map>"]
    for kind, name, value in entries:
        if kind == "string":
            lines.append(f"    <string name={quoteattr(name)}>{escape(str(value))}</string>")
        elif kind == "boolean":
            lines.append(f'    <boolean name={quoteattr(name)} value="{str(bool(value)).lower()}" />')
        else:
            lines.append(f'    <{kind} name={quoteattr(name)} value="{value}" />')
    lines.append("</map>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _kv_line(ts: float, words: str, **values: Any) -> str:
    pairs = " ".join(f"{key}={value}" for key, value in values.items())
    return f"{ts} [INFO] {words} {pairs}".rstrip()


class _CorpusBuilder:
    def __init__(self, scenario: Scenario, dataset: Sequence[DatasetFile]) -> None:
        identity = scenario.identity
        self.scenario = scenario
        self.identity = identity
        self.android = identity.platform is Platform.ANDROID
        self.items = {item.index: item for item in dataset}
        self.plan: StatePlan = plan_for(identity).for_state(scenario.device_state)
        self.active: StatePlan = plan_for(identity).active
        self.rng = random.Random(scenario.rng_key)
        self.trees: Dict[str, Dict[str, bytes]] = {INTERNAL: {}}
        if self.android:
            self.trees[SD] = {}
        self.hits: Set[ExpectedHit] = set()
        self.notes: List[str] = []
        self.user_id = str(self.rng.randrange(10_000_000, 100_000_000))
        self.bindings = {
            "APPROOT": str(uuid.UUID(int=self.rng.getrandbits(128), version=4)).upper(),
            "EMAIL": DEFAULT_EMAIL,
            "X": self.user_id,
        }
        if not self.android and self.plan.carved:
            raise ValueError(f"{identity.label}: iOS scenarios have no raw image to carve from")

    # --- helpers -------------------------------------------------------------

    @property
    def files(self) -> List[DatasetFile]:
        return [self.items[index] for index in sorted(self.items)]

    def resolve(self, template: str) -> str:
        path = template
        for name, value in self.bindings.items():
            path = path.replace("{" + name + "}", value)
        return path

    def put(
        self,
        tree: str,
        path: str,
        data: bytes,
        role: Optional[SignatureRole] = None,
    ) -> str:
        resolved = self.resolve(path)
        if not data:
            raise ValueError(f"{resolved}: refusing to write an empty file")
        self.trees[tree][resolved] = data
        if role is not None:
            where = resolved.rsplit("/", 1)[0] if role.is_directory else resolved
            self.hits.add(ExpectedHit(role.value, where, tree))
        return resolved

    def placed(self, *roles: SignatureRole, plan: Optional[StatePlan] = None) -> Set[int]:
        plan = plan or self.plan
        return {
            index
            for placement in plan.placements
            if placement.role in roles and placement.rendition is not Rendition.ENCRYPTED
            for index in placement.files
        }

    def viewed(self) -> List[DatasetFile]:
        return [item for item in self.files if item.manipulation.viewed]

    def ios_path(self, relative: str) -> str:
        return f"{IOS_ROOT}/{relative}"

    def store(self, metadata, rows: Dict[str, List[Dict[str, Any]]]) -> bytes:
        page_size = ANDROID_PAGE_SIZE if self.android else IOS_PAGE_SIZE
        return write_store(metadata, rows, page_size=page_size)

    # --- cache placements ----------------------------------------------------

    def object_name(self, placement: Placement, item: DatasetFile) -> str:
        if placement.naming is Naming.REMOTE_ID:
            return str(box_id(item.index))
        if placement.naming is Naming.REMOTE_THUMB:
            return f"{box_id(item.index)}_thumb.jpg"
        if placement.naming is Naming.REMOTE_PAGE:
            return f"{box_id(item.index)}_1.png"
        if placement.naming is Naming.OPAQUE:
            return uuid.UUID(int=self.rng.getrandbits(128)).hex
        return item.name

    def rendition(self, placement: Placement, item: DatasetFile) -> bytes:
        if placement.rendition is Rendition.THUMBNAIL:
            return thumbnail(item.content)
        if placement.rendition is Rendition.PREVIEW:
            return preview_png(item)
        if placement.rendition is Rendition.ENCRYPTED:
            # AES output: whole 16-byte blocks, one of them padding
            return self.rng.randbytes((item.size // 16 + 1) * 16)
        return item.content

    def place_files(self) -> None:
        for placement in self.plan.placements:
            for index in sorted(placement.files):
                item = self.items[index]
                name = self.object_name(placement, item)
                self.put(
                    placement.tree,
                    f"{placement.directory}/{name}",
                    self.rendition(placement, item),
                    placement.role,
                )

    # --- raw image -----------------------------------------------------------

    def filler(self, count: int) -> bytes:
        return self.rng.randbytes(count).translate(_FILLER_TABLE)

    def raw_image(self) -> Tuple[Optional[bytes], Dict[str, int]]:
        if not self.android:
            return None, {}
        order = sorted(self.plan.carved)
        self.rng.shuffle(order)
        parts: List[bytes] = []
        offsets: Dict[str, int] = {}
        pos = 0
        for index in order:
            item = self.items[index]
            gap = self.filler(self.rng.randrange(512, 8192))
            parts.append(gap)
            pos += len(gap)
            offsets[item.name] = pos
            parts.append(item.content)
            pos += item.size
        parts.append(self.filler(max(self.rng.randrange(512, 8192), MIN_RAW_IMAGE - pos)))
        return b"".join(parts), offsets

    # --- per-provider metadata ----------------------------------------------

    def session_log(self, words: Dict[str, str], path_prefix: str = "/") -> bytes:
        """Transaction log lines for each viewed file: open, offline flag, delete."""

        lines = [_kv_line(SESSION_START, words["login"], user=self.user_id)]
        for item in self.viewed():
            ts = view_time(item.index)
            path = f"{path_prefix}{item.name}"
            lines.append(_kv_line(ts, words["start"], path=path, size=item.size))
            lines.append(_kv_line(ts + 3, words["done"], path=path))
            if item.offline:
                lines.append(_kv_line(ts + 5, words["offline"], path=path))
            if item.deleted:
                lines.append(_kv_line(ts + 9, words["delete"], path=path))
        return ("\n".join(lines) + "\n").encode("utf-8")

    def dropbox_android(self) -> None:
        scratch = self.placed(SignatureRole.CACHE_DIR)
        rows = []
        for item in self.files:
            if item.deleted:
                continue
            local = (
                f"/mnt/sdcard/Android/data/com.dropbox.android/files/scratch/{item.name}"
                if item.index in scratch
                else None
            )
            rows.append(
                {
                    "_id": len(rows) + 1,
                    "_data": local,
                    "path": f"/{item.name}",
                    "modified": item.created,
                    "is_dir": 0,
                    "is_favorite": int(item.offline),
                    "parent_path": "/",
                    "last_modified": item.updated,
                    "display_name": item.name,
                    "local_hash": item.md5,
                }
            )
        self.put(
            INTERNAL,
            _DROPBOX_DATA + "/databases/db.db",
            self.store(models.DropboxDbBase.metadata, {"dropbox": rows}),
            SignatureRole.METADATA_STORE,
        )
        prefs = [
            ("USER_EMAIL", DEFAULT_EMAIL),
            ("DISPLAY_NAME", DISPLAY_NAME),
            ("USER_ID", self.user_id),
        ]
        self.put(
            INTERNAL,
            _DROPBOX_DATA + "/databases/prefs.db",
            self.store(
                models.DropboxPrefsBase.metadata,
                {
                    "DropboxAccountPrefs": [
                        {"_id": i, "pref_name": name, "pref_value": value}
                        for i, (name, value) in enumerate(prefs, start=1)
                    ]
                },
            ),
            SignatureRole.PREFS_FILE,
        )
        self.put(
            INTERNAL,
            _DROPBOX_DATA + "/files/log.txt",
            self.session_log(
                {
                    "login": "Account linked",
                    "start": "Download start",
                    "done": "Download finished",
                    "offline": "Favorite added",
                    "delete": "Delete",
                }
            ),
            SignatureRole.LOG_FILE,
        )

    def dropbox_ios(self) -> None:
        cached = self.placed(SignatureRole.CACHE_DIR)
        thumbs = self.placed(SignatureRole.THUMBNAIL_DIR)
        rows = []
        for index in sorted(cached | thumbs):
            item = self.items[index]
            rows.append(
                {
                    "Z_PK": len(rows) + 1,
                    "Z_ENT": 1,
                    "Z_OPT": 1,
                    "ZFAVORITE": int(item.offline),
                    "ZISTHUMBNAIL": int(index not in cached),
                    "ZVIEWCOUNT": int(item.manipulation.viewed),
                    "ZSIZE": item.size,
                    "ZLASTVIEWEDDATE": (
                        apple_time(view_time(index)) if item.manipulation.viewed else None
                    ),
                    "ZPATH": f"/{item.name}",
                }
            )
        self.put(
            INTERNAL,
            self.ios_path("Documents/Dropbox.sqlite"),
            self.store(models.DropboxCoreDataBase.metadata, {"ZCACHEDFILE": rows}),
            SignatureRole.METADATA_STORE,
        )
        favorites = [
            {
                "name": f"/{item.name}",
                "size": item.size,
                "modified": dt.datetime.fromtimestamp(item.updated, tz=dt.timezone.utc).replace(
                    tzinfo=None
                ),
                "deleted": False,
            }
            for item in self.files
            if item.offline
        ]
        self.put(
            INTERNAL,
            self.ios_path("Library/Caches/FavoriteFiles.plist"),
            plistlib.dumps(favorites, fmt=plistlib.FMT_XML, sort_keys=True),
            SignatureRole.METADATA_STORE,
        )
        self.put(
            INTERNAL,
            self.ios_path("Library/Preferences/com.getdropbox.Dropbox.plist"),
            plistlib.dumps(
                {
                    "DBAccountEmail": DEFAULT_EMAIL,
                    "DBAccountDisplayName": DISPLAY_NAME,
                    "DBUserId": int(self.user_id),
                },
                fmt=plistlib.FMT_BINARY,
            ),
            SignatureRole.PREFS_FILE,
        )
        self.put(
            INTERNAL,
            self.ios_path("Library/Caches/Analytics.log"),
            self.analytics_log(),
            SignatureRole.LOG_FILE,
        )
        self.put(
            INTERNAL,
            self.ios_path("tmp/run.log"),
            self.session_log(
                {
                    "login": "Session start",
                    "start": "Load file",
                    "done": "Load complete",
                    "offline": "Marked favorite",
                    "delete": "Remove file",
                }
            ),
            SignatureRole.LOG_FILE,
        )

    def analytics_log(self) -> bytes:
        lines = list(DOCUMENT_VIEW_EVENTS)
        for item in self.viewed():
            if item.index == DOCUMENT_VIEW_FILE:
                continue
            start = view_time(item.index)
            event_id = 10 + item.index
            lines.append(
                json.dumps(
                    {
                        "retry": 0,
                        "favorite": item.offline,
                        "extension": item.kind,
                        "id": event_id,
                        "cached": False,
                        "ts": f"{start:.2f}",
                        "event": "file.view.start",
                        "size": item.size,
                    }
                )
            )
            lines.append(
                json.dumps(
                    {"id": event_id, "event": "file.view.success", "ts": f"{start + 4:.2f}"}
                )
            )
        return ("\n".join(lines) + "\n").encode("utf-8")

    def box_android(self) -> None:
        records = [
            {
                "mId": box_id(item.index),
                "mFileName": item.name,
                "mSha1": item.sha1,
                "mSize": item.size,
                "mCreated": item.created,
                "mUpdated": item.updated,
                "mPermissions": "gdcenopstuvh",
                "mShared": False,
                "mThumbnail": None,
            }
            for item in self.files
        ]
        model = {"mFolders": [{"mId": 0, "mFolderName": "All Files", "mFiles": records}]}
        self.put(
            INTERNAL,
            _BOX_DATA + "/files/json_static_model_{EMAIL}_0",
            json.dumps(model, separators=(",", ":")).encode("utf-8"),
            SignatureRole.METADATA_STORE,
        )
        self.put(
            INTERNAL,
            _BOX_DATA + "/shared_prefs/myPreference.xml",
            shared_prefs_xml(
                [
                    ("string", "authToken", BOX_AUTH_TOKEN),
                    ("string", "email", DEFAULT_EMAIL),
                    ("long", "userId", self.user_id),
                    ("string", "userName", DISPLAY_NAME),
                ]
            ),
            SignatureRole.PREFS_FILE,
        )
        if self.identity.app_version == "1.6.7":
            sd_cache = "/mnt/sdcard/Android/data/com.box.android/cache/filecache"
            self.put(
                INTERNAL,
                _BOX_DATA + "/shared_prefs/Downloaded_Files.xml",
                shared_prefs_xml(
                    [
                        ("string", str(box_id(item.index)), f"{sd_cache}/{box_id(item.index)}")
                        for item in self.viewed()
                    ]
                ),
                SignatureRole.PREFS_FILE,
            )
            return
        previewed = self.placed(SignatureRole.PREVIEW_DIR, plan=self.active)
        self.put(
            INTERNAL,
            _BOX_DATA + "/shared_prefs/Preview_Num_Pages.xml",
            shared_prefs_xml([("int", str(box_id(index)), 1) for index in sorted(previewed)]),
            SignatureRole.PREFS_FILE,
        )
        self.put(
            INTERNAL,
            _BOX_DATA + "/shared_prefs/offlineFileSharedPreferences.xml",
            shared_prefs_xml(
                [
                    ("string", str(box_id(item.index)), item.name)
                    for item in self.files
                    if item.offline
                ]
            ),
            SignatureRole.PREFS_FILE,
        )

    def box_ios(self) -> None:
        empty_file = {"ZEMAIL": None, "ZUSERNAME": None, "ZAUTHTOKEN": None}
        rows: List[Dict[str, Any]] = [
            {
                "Z_PK": 1,
                "Z_ENT": 1,
                "Z_OPT": 1,
                "ZBOXID": int(self.user_id),
                "ZSIZE": None,
                "ZFAVORITEOBJECT": None,
                "ZUPDATED": None,
                "ZLASTDOWNLOADDATE": None,
                "ZCREATIONTIME": None,
                "ZNAME": None,
                "ZSHA1": None,
                "ZLOCALURLSTRING": None,
                "ZSTREAMINGURLSTRING": None,
                "ZLOCALSHA1": None,
                "ZEMAIL": DEFAULT_EMAIL,
                "ZUSERNAME": DISPLAY_NAME,
                "ZAUTHTOKEN": BOX_AUTH_TOKEN,
            }
        ]
        for item in self.files:
            saved = f"file://{self.ios_path('Documents/SavedFiles')}/{item.name}"
            rows.append(
                {
                    "Z_PK": len(rows) + 1,
                    "Z_ENT": 2,
                    "Z_OPT": 1,
                    "ZBOXID": box_id(item.index),
                    "ZSIZE": item.size,
                    "ZFAVORITEOBJECT": int(item.offline),
                    "ZUPDATED": apple_time(item.updated),
                    "ZLASTDOWNLOADDATE": (
                        apple_time(view_time(item.index)) if item.manipulation.viewed else None
                    ),
                    "ZCREATIONTIME": apple_time(item.created),
                    "ZNAME": item.name,
                    "ZSHA1": item.sha1,
                    "ZLOCALURLSTRING": self.resolve(saved) if item.offline else None,
                    "ZSTREAMINGURLSTRING": None,
                    "ZLOCALSHA1": item.sha1 if item.offline else None,
                    **empty_file,
                }
            )
        self.put(
            INTERNAL,
            self.ios_path("Documents/BoxCoreDataStore.sqlite"),
            self.store(models.BoxCoreDataBase.metadata, {"ZBOXBASECOREDATA": rows}),
            SignatureRole.METADATA_STORE,
        )

    def sugarsync_android(self) -> None:
        offline = [item for item in self.files if item.offline]
        metadata = models.sugarsync_offline_metadata(self.user_id)
        self.put(
            INTERNAL,
            _SUGARSYNC_DATA + "/databases/SugarSyncDB",
            self.store(
                metadata,
                {
                    f"rec_to_offline_file_{self.user_id}": [
                        {
                            "_id": i,
                            "file_name": f"/mnt/sdcard/MySugarSyncFolders/{item.name}",
                            "file_size": item.size,
                            "offline_time": view_time(item.index) + 5,
                            "remote_path": f"/Magic Briefcase/{item.name}",
                        }
                        for i, item in enumerate(offline, start=1)
                    ]
                },
            ),
            SignatureRole.METADATA_STORE,
        )
        password_hash = "%040x" % self.rng.getrandbits(160)
        appdata = f"email={DEFAULT_EMAIL}\nuserId={self.user_id}\npasswordHash={password_hash}\n"
        self.put(
            INTERNAL,
            _SUGARSYNC_DATA + "/app_SugarSync/SugarSync/sc_appdata",
            appdata.encode("utf-8"),
            SignatureRole.PREFS_FILE,
        )
        self.put(
            INTERNAL,
            _SUGARSYNC_DATA + "/app_SugarSync/SugarSync/log/sugarsync.log",
            self.session_log(
                {
                    "login": "Login ok",
                    "start": "File open",
                    "done": "File ready",
                    "offline": "Sync to device",
                    "delete": "File delete",
                },
                path_prefix="/Magic Briefcase/",
            ),
            SignatureRole.LOG_FILE,
        )

    def sugarsync_ios(self) -> None:
        offline = [item for item in self.files if item.offline]
        rows = [
            {
                "Z_PK": i,
                "Z_ENT": 1,
                "Z_OPT": 1,
                "ZNAME": f"/MyiPhone/{item.name}",
                "ZSIZE": item.size,
                "ZMODIFIED": apple_time(item.updated),
                "ZOFFLINE": 1,
            }
            for i, item in enumerate(offline, start=1)
        ]
        self.put(
            INTERNAL,
            self.ios_path("Documents/Ringo.sqlite"),
            self.store(models.RingoBase.metadata, {"ZSYNCOBJECT": rows}),
            SignatureRole.METADATA_STORE,
        )
        appdata = f"email={DEFAULT_EMAIL}\nuserId={self.user_id}\ndeviceName=iPhone\n"
        self.put(
            INTERNAL,
            self.ios_path("Documents/ringo.appdata"),
            appdata.encode("utf-8"),
            SignatureRole.PREFS_FILE,
        )

    def syncplicity_auth(self) -> None:
        self.put(
            INTERNAL,
            _SYNCPLICITY_DATA + "/shared_prefs/auth_prefs.xml",
            shared_prefs_xml(
                [
                    ("string", "email", DEFAULT_EMAIL),
                    ("string", "userId", self.user_id),
                    ("string", "firstName", "Test"),
                    ("string", "lastName", "Examiner"),
                ]
            ),
            SignatureRole.PREFS_FILE,
        )

    def syncplicity_android(self) -> None:
        self.syncplicity_auth()
        if self.identity.app_version == "1.7":
            self.syncplicity_cache_database()
        else:
            self.syncplicity_virtual_file_system()

    def syncplicity_cache_database(self) -> None:
        rows = [
            {
                "_id": item.index,
                "fileId": SYNCPLICITY_ID_BASE + item.index,
                "name": item.name,
                "length": item.size,
                "fileStatus": 0 if item.deleted else 1,
                "thumbnailURL": None,
            }
            for item in self.files
        ]
        self.put(
            INTERNAL,
            _SYNCPLICITY_DATA + "/databases/CacheDatabase.sqlite",
            self.store(models.CacheDatabaseBase.metadata, {"Files": rows}),
            SignatureRole.METADATA_STORE,
        )
        # the app keeps one mapping per decrypted cache file it later discarded
        for item in self.viewed():
            if item.offline:
                continue
            version = SYNCPLICITY_VERSION_BASE + item.index
            self.put(
                INTERNAL,
                f"{_SYNCPLICITY_DATA}/shared_prefs/file_cache_preferences{version}.deleted.xml",
                shared_prefs_xml(
                    [
                        ("long", "FILE_CACHE_PREFERENCES_LAST_DECRYPTED_FILE_VERSION_ID", version),
                        ("string", "FILE_CACHE_PREFERENCES_LAST_DECRYPTED_FILE_NAME", item.name),
                    ]
                ),
                SignatureRole.PREFS_FILE,
            )

    def syncplicity_virtual_file_system(self) -> None:
        decrypted = self.placed(SignatureRole.CACHE_DIR)
        files = [
            {
                "_id": item.index,
                "File_ID": SYNCPLICITY_ID_BASE + item.index,
                "File_Name": item.name,
                "Is_Favorite": int(item.offline),
                "Server_Length": item.size,
                "Local_Length": item.size if item.index in decrypted else 0,
                "Is_Deleted": int(item.deleted),
                "Thumbnail_URL": None,
            }
            for item in self.files
        ]
        queue = [
            {"_id": i, "Name": item.name, "Path": f"/Syncplicity/{item.name}"}
            for i, item in enumerate((f for f in self.files if f.offline), start=1)
        ]
        self.put(
            INTERNAL,
            _SYNCPLICITY_DATA + "/databases/VIRTUAL_FILE_SYSTEM.db",
            self.store(
                models.VirtualFileSystemBase.metadata,
                {"Files": files, "Files_and_Folders_to_Synchronize": queue},
            ),
            SignatureRole.METADATA_STORE,
        )
        log = self.session_log(
            {
                "login": "Authenticated",
                "start": "Download begin",
                "done": "Download end",
                "offline": "Sync requested",
                "delete": "Deleted",
            },
            path_prefix="/Syncplicity/",
        )
        self.put(
            INTERNAL,
            _SYNCPLICITY_DATA + "/app_log_syncplicity/00000000000000000000.log.gz.tmp",
            gzip.compress(log, mtime=0),
            SignatureRole.LOG_FILE,
        )

    def syncplicity_ios(self) -> None:
        # the file table has no rows for 04.jpg and 08.mp3
        rows = [
            {
                "Z_PK": item.index,
                "Z_ENT": 1,
                "Z_OPT": 1,
                "ZLENGTH": item.size,
                "ZFILEID": SYNCPLICITY_ID_BASE + item.index,
                "ZDELETED": int(item.deleted),
                "ZFILENAME": item.name,
                "ZEXT": item.kind,
                "ZTHUMBNAILURL": None,
            }
            for item in self.files
            if item.index not in (4, 8)
        ]
        self.put(
            INTERNAL,
            self.ios_path("Documents/syncplicity.sqlite"),
            self.store(models.SyncplicityCoreDataBase.metadata, {"ZFILES": rows}),
            SignatureRole.METADATA_STORE,
        )
        self.put(
            INTERNAL,
            self.ios_path("Library/Preferences/com.syncplicity.ios/syncplicity.plist"),
            plistlib.dumps(
                {
                    "FirstName": "Test",
                    "LastName": "Examiner",
                    "AccountType": "free",
                    "Email": DEFAULT_EMAIL,
                },
                fmt=plistlib.FMT_BINARY,
            ),
            SignatureRole.PREFS_FILE,
        )
        self.put(
            INTERNAL,
            self.ios_path("Library/Caches/syncplicity_0.log"),
            self.session_log(
                {
                    "login": "Token sync",
                    "start": "Download started",
                    "done": "Download completed",
                    "offline": "Favorite set",
                    "delete": "File removed",
                }
            ),
            SignatureRole.LOG_FILE,
        )

    # --- assembly ------------------------------------------------------------

    def metadata_writer(self) -> Callable[[], None]:
        writers: Dict[Tuple[Provider, Platform], Callable[[], None]] = {
            (Provider.DROPBOX, Platform.ANDROID): self.dropbox_android,
            (Provider.DROPBOX, Platform.IOS): self.dropbox_ios,
            (Provider.BOX, Platform.ANDROID): self.box_android,
            (Provider.BOX, Platform.IOS): self.box_ios,
            (Provider.SUGARSYNC, Platform.ANDROID): self.sugarsync_android,
            (Provider.SUGARSYNC, Platform.IOS): self.sugarsync_ios,
            (Provider.SYNCPLICITY, Platform.ANDROID): self.syncplicity_android,
            (Provider.SYNCPLICITY, Platform.IOS): self.syncplicity_ios,
        }
        return writers[(self.identity.provider, self.identity.platform)]

    def build(self) -> GeneratedCorpus:
        self.place_files()
        self.metadata_writer()()
        raw, offsets = self.raw_image()
        column = expected_column(self.identity, self.scenario.device_state)
        reconstructed = self.identity.provider in RECONSTRUCTED
        if reconstructed:
            self.notes.append(
                "expected cells for this provider were rebuilt from per-device union sets"
            )
        manifest = Manifest(
            scenario=self.scenario,
            expected_cells={item.name: column[item.index - 1] for item in self.files},
            expected_hits=sorted(self.hits),
            files={
                item.name: {"size": item.size, "md5": item.md5, "sha1": item.sha1}
                for item in self.files
            },
            carve_offsets=offsets,
            reconstructed=reconstructed,
            notes=self.notes,
        )
        logger.info(
            "[CORPUS] %s: %d files, raw image %s",
            self.scenario.slug,
            sum(len(files) for files in self.trees.values()),
            f"{len(raw)} bytes" if raw is not None else "none",
        )
        return GeneratedCorpus(self.scenario, self.trees, raw, manifest)


def generate(scenario: Scenario, dataset: Optional[Sequence[DatasetFile]] = None) -> GeneratedCorpus:
    if not scenario.identity.cataloged:
        raise UncatalogedIdentityError(f"no corpus for {scenario.identity.label}")
    if dataset is None:
        dataset = builtin_dataset(scenario.seed)
    if sorted(item.index for item in dataset) != list(range(1, 21)):
        raise ValueError("dataset must hold the twenty indexed test files")
    return _CorpusBuilder(scenario, dataset).build()


def iter_scenarios(seed: int = 0) -> Iterator[Scenario]:
    for identity in catalog_identities():
        for state in DeviceState:
            yield Scenario(identity, state, seed)


__all__ = [
    "BOX_AUTH_TOKEN",
    "BOX_ID_BASE",
    "DEFAULT_EMAIL",
    "DOCUMENT_VIEW_EVENTS",
    "ExpectedHit",
    "GeneratedCorpus",
    "Manifest",
    "RAW_LABEL",
    "Scenario",
    "apple_time",
    "box_id",
    "generate",
    "iter_scenarios",
    "shared_prefs_xml",
    "view_time",
    "write_corpus",
]
