"""Syncplicity: CacheDatabase / VIRTUAL_FILE_SYSTEM on Android, syncplicity.sqlite on iOS."""

from __future__ import annotations

import logging
from typing import Any, Dict, List, Optional

from app.evidence import AccountInfo, CloudFileEntry, LogEvent, Platform, Provider
from app.services.analyzers.base import (
    ENCRYPTED_CACHE_KEY,
    AnalysisContext,
    ProviderAnalyzer,
    account_from_pairs,
    with_extras,
)
from app.services.analyzers.fieldmaps import (
    SYNCPLICITY_CACHE_DATABASE,
    SYNCPLICITY_IOS_FILES,
    SYNCPLICITY_VIRTUAL_FILE_SYSTEM,
    FieldMap,
)
from app.services.registry import SignatureRole

logger = logging.getLogger(__name__)

SYNC_TABLE = "Files_and_Folders_to_Synchronize"
DECRYPTED_NAME_KEY = "FILE_CACHE_PREFERENCES_LAST_DECRYPTED_FILE_NAME"
DECRYPTED_VERSION_KEY = "FILE_CACHE_PREFERENCES_LAST_DECRYPTED_FILE_VERSION_ID"

_STORE_MAPS: Dict[str, FieldMap] = {
    "cachedatabase.sqlite": SYNCPLICITY_CACHE_DATABASE,
    "virtual_file_system.db": SYNCPLICITY_VIRTUAL_FILE_SYSTEM,
    "syncplicity.sqlite": SYNCPLICITY_IOS_FILES,
}


def _sync_name(record: Dict[str, Any]) -> Optional[str]:
    for key, value in record.items():
        if key.lower() in ("name", "file_name", "filename") and isinstance(value, str):
            return value.rstrip("/").rsplit("/", 1)[-1]
    for value in record.values():
        if isinstance(value, str) and value:
            return value.rstrip("/").rsplit("/", 1)[-1]
    return None


class SyncplicityAnalyzer(ProviderAnalyzer):
    provider = Provider.SYNCPLICITY

    def __init__(self) -> None:
        self._sync_requested: List[str] = []

    def entries(self, ctx: AnalysisContext) -> List[CloudFileEntry]:
        entries: List[CloudFileEntry] = []
        for hit in ctx.hits_for(SignatureRole.METADATA_STORE):
            field_map = _STORE_MAPS.get(hit.resolved_path.rsplit("/", 1)[-1].lower())
            if field_map is None:
                ctx.warn(f"{hit.resolved_path}: no field map for this store")
                continue
            db = ctx.database(hit)
            if db is None:
                continue
            records = ctx.table_records(hit, db, field_map.table)
            entries.extend(ctx.mapped_entries(hit, field_map, records))
            if field_map is SYNCPLICITY_VIRTUAL_FILE_SYSTEM and db.has_table(SYNC_TABLE):
                for record in ctx.table_records(hit, db, SYNC_TABLE):
                    name = _sync_name(record)
                    if name:
                        self._sync_requested.append(name)
        return entries

    def annotate(
        self, ctx: AnalysisContext, entries: List[CloudFileEntry]
    ) -> List[CloudFileEntry]:
        by_name = {entry.name: i for i, entry in enumerate(entries)}
        result = list(entries)
        for name in self._sync_requested:
            index = by_name.get(name)
            if index is not None:
                result[index] = with_extras(result[index], sync_requested=True)
            else:
                ctx.warn(f"{name}: queued for synchronization but absent from the file table")

        for hit in ctx.hits_for(SignatureRole.PREFS_FILE, ".deleted.xml"):
            prefs = ctx.shared_prefs(hit)
            if prefs is None:
                continue
            name = prefs.get(DECRYPTED_NAME_KEY)
            if not name:
                continue
            extras = {
                ENCRYPTED_CACHE_KEY: True,
                "decrypted_version_id": prefs.get(DECRYPTED_VERSION_KEY),
                "deleted_mapping": hit.resolved_path,
            }
            index = by_name.get(name)
            if index is not None:
                result[index] = with_extras(result[index], **extras)
            else:
                by_name[name] = len(result)
                result.append(CloudFileEntry(name=name, extras=extras))
        return result

    def account(self, ctx: AnalysisContext) -> AccountInfo:
        for hit in ctx.hits_for(SignatureRole.PREFS_FILE):
            if hit.resolved_path.lower().endswith(".deleted.xml"):
                continue
            if ctx.identity.platform is Platform.IOS:
                value = ctx.plist(hit)
                pairs = value if isinstance(value, dict) else {}
            else:
                prefs = ctx.shared_prefs(hit)
                pairs = prefs.as_dict() if prefs is not None else {}
            account = account_from_pairs(pairs)
            if account.identified:
                return account
        return AccountInfo()

    def events(self, ctx: AnalysisContext) -> List[LogEvent]:
        format_id = (
            "syncplicity_ios_log"
            if ctx.identity.platform is Platform.IOS
            else "syncplicity_android_log"
        )
        events: List[LogEvent] = []
        for hit in ctx.hits_for(SignatureRole.LOG_FILE):
            events.extend(ctx.kv_log(hit, format_id))
        return events


__all__ = ["SyncplicityAnalyzer"]
