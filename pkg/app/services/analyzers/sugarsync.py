"""SugarSync: SugarSyncDB and sc_appdata on Android, Ringo.sqlite and ringo.appdata on iOS."""

from __future__ import annotations

import logging
import re
from dataclasses import replace
from typing import List

from app.evidence import AccountInfo, CloudFileEntry, LogEvent, Platform, Provider
from app.readers.codecs import parse_properties
from app.services.analyzers.base import AnalysisContext, ProviderAnalyzer, account_from_pairs
from app.services.analyzers.fieldmaps import SUGARSYNC_ANDROID_OFFLINE, SUGARSYNC_IOS_OFFLINE
from app.services.registry import SignatureRole

logger = logging.getLogger(__name__)

OFFLINE_TABLE = re.compile(r"^rec_to_offline_file_(?P<user>\w+)$", re.IGNORECASE)


class SugarSyncAnalyzer(ProviderAnalyzer):
    provider = Provider.SUGARSYNC

    def __init__(self) -> None:
        self._user_ids: List[str] = []

    def entries(self, ctx: AnalysisContext) -> List[CloudFileEntry]:
        entries: List[CloudFileEntry] = []
        for hit in ctx.hits_for(SignatureRole.METADATA_STORE):
            db = ctx.database(hit)
            if db is None:
                continue
            if ctx.identity.platform is Platform.IOS:
                records = ctx.table_records(hit, db, SUGARSYNC_IOS_OFFLINE.table)
                entries.extend(ctx.mapped_entries(hit, SUGARSYNC_IOS_OFFLINE, records))
                continue
            tables = [t for t in db.tables() if OFFLINE_TABLE.match(t)]
            if not tables:
                ctx.warn(f"{hit.resolved_path}: no rec_to_offline_file table")
            for table in tables:
                user_id = OFFLINE_TABLE.match(table).group("user")
                self._user_ids.append(user_id)
                for entry in ctx.mapped_entries(
                    hit, SUGARSYNC_ANDROID_OFFLINE, ctx.table_records(hit, db, table)
                ):
                    # every row of this table is a file kept for offline use
                    entries.append(replace(entry, favorite=True))
        return entries

    def account(self, ctx: AnalysisContext) -> AccountInfo:
        account = AccountInfo()
        for hit in ctx.hits_for(SignatureRole.PREFS_FILE):
            data = ctx.read(hit)
            if data is None:
                continue
            account = account_from_pairs(parse_properties(data))
            if account.identified:
                break
        if account.user_id is None and self._user_ids:
            account = replace(account, user_id=self._user_ids[0])
        return account

    def events(self, ctx: AnalysisContext) -> List[LogEvent]:
        events: List[LogEvent] = []
        for hit in ctx.hits_for(SignatureRole.LOG_FILE):
            events.extend(ctx.kv_log(hit, "sugarsync_log"))
        return events


__all__ = ["SugarSyncAnalyzer"]
