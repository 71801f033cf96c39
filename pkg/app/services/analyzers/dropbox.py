"""Dropbox: db.db / prefs.db / log.txt on Android, Dropbox.sqlite and plists on iOS."""

from __future__ import annotations

import logging
from dataclasses import replace
from typing import Any, Dict, List

from app.errors import FormatError
from app.evidence import AccountInfo, CloudFileEntry, LogEvent, Platform, Provider
from app.readers.codecs import parse_json_lines_log
from app.readers.plist import plist_strings
from app.services.analyzers.base import (
    AnalysisContext,
    ProviderAnalyzer,
    account_from_pairs,
    first_email,
)
from app.services.locator import ArtifactHit
from app.services.analyzers.fieldmaps import (
    DROPBOX_ANDROID_FILES,
    DROPBOX_IOS_FAVORITES,
    DROPBOX_IOS_FILES,
)
from app.services.registry import SignatureRole

logger = logging.getLogger(__name__)

ACCOUNT_PREFS_TABLE = "DropboxAccountPrefs"


class DropboxAnalyzer(ProviderAnalyzer):
    provider = Provider.DROPBOX

    def entries(self, ctx: AnalysisContext) -> List[CloudFileEntry]:
        entries: List[CloudFileEntry] = []
        for hit in ctx.hits_for(SignatureRole.METADATA_STORE):
            name = hit.resolved_path.rsplit("/", 1)[-1].lower()
            if name == "favoritefiles.plist":
                entries.extend(self._favorites(ctx, hit))
                continue
            field_map = (
                DROPBOX_IOS_FILES if ctx.identity.platform is Platform.IOS else DROPBOX_ANDROID_FILES
            )
            db = ctx.database(hit)
            if db is None:
                continue
            records = ctx.table_records(hit, db, field_map.table)
            entries.extend(ctx.mapped_entries(hit, field_map, records))
        return entries

    def _favorites(self, ctx: AnalysisContext, hit: ArtifactHit) -> List[CloudFileEntry]:
        value = ctx.plist(hit)
        if isinstance(value, dict):
            # some builds wrap the list in a single-key dictionary
            lists = [v for v in value.values() if isinstance(v, list)]
            value = lists[0] if len(lists) == 1 else None
        if not isinstance(value, list):
            if value is not None:
                ctx.warn(f"{hit.resolved_path}: expected an array of favorites")
            return []
        records = [item for item in value if isinstance(item, dict)]
        return [
            replace(entry, favorite=True)
            for entry in ctx.mapped_entries(hit, DROPBOX_IOS_FAVORITES, records)
        ]

    def account(self, ctx: AnalysisContext) -> AccountInfo:
        if ctx.identity.platform is Platform.IOS:
            for hit in ctx.hits_for(SignatureRole.PREFS_FILE):
                value = ctx.plist(hit)
                if value is None:
                    continue
                email = first_email(plist_strings(value))
                if email:
                    return AccountInfo(email=email)
            return AccountInfo()

        for hit in ctx.hits_for(SignatureRole.PREFS_FILE, "prefs.db"):
            db = ctx.database(hit)
            if db is None:
                continue
            pairs: Dict[str, Any] = {}
            texts: List[str] = []
            for record in ctx.table_records(hit, db, ACCOUNT_PREFS_TABLE):
                values = [v for v in record.values() if isinstance(v, str)]
                texts.extend(values)
                if len(values) >= 2:
                    pairs.setdefault(values[0], values[1])
            account = account_from_pairs(pairs, first_email(texts))
            if account.identified:
                return account
        return AccountInfo()

    def events(self, ctx: AnalysisContext) -> List[LogEvent]:
        events: List[LogEvent] = []
        for hit in ctx.hits_for(SignatureRole.LOG_FILE):
            name = hit.resolved_path.rsplit("/", 1)[-1].lower()
            if name == "analytics.log":
                data = ctx.read(hit)
                if data is not None:
                    try:
                        events.extend(
                            parse_json_lines_log(data, ctx.warnings, hit.resolved_path)
                        )
                    except FormatError as exc:
                        ctx.warn(f"{hit.resolved_path}: {exc}")
            elif name == "run.log":
                events.extend(ctx.kv_log(hit, "dropbox_ios_run"))
            else:
                events.extend(ctx.kv_log(hit, "dropbox_android_log"))
        return events


__all__ = ["DropboxAnalyzer"]
