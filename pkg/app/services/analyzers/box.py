"""Box: json_static_model and shared_prefs on Android, BoxCoreDataStore on iOS."""

from __future__ import annotations

import logging
from typing import Any, Dict, Iterator, List, Optional, Sequence

from app.errors import FormatError
from app.evidence import AccountInfo, CloudFileEntry, Platform, Provider
from app.readers.codecs import parse_json
from app.services.analyzers.base import (
    ENCRYPTED_CACHE_KEY,
    AnalysisContext,
    ProviderAnalyzer,
    account_from_pairs,
    reconstruct_box_url,
    with_extras,
)
from app.services.analyzers.fieldmaps import BOX_ANDROID_FILES, BOX_IOS_FILES
from app.services.registry import SignatureRole

logger = logging.getLogger(__name__)

_USER_COLUMNS = ("ZEMAIL", "ZUSERNAME", "ZAUTHTOKEN")


def _file_objects(value: Any) -> Iterator[Dict[str, Any]]:
    """Every JSON object that describes a file (has mFileName), depth first."""

    stack = [value]
    while stack:
        item = stack.pop()
        if isinstance(item, dict):
            if "mFileName" in item:
                yield item
            stack.extend(reversed(list(item.values())))
        elif isinstance(item, list):
            stack.extend(reversed(item))


class BoxAnalyzer(ProviderAnalyzer):
    provider = Provider.BOX

    def entries(self, ctx: AnalysisContext) -> List[CloudFileEntry]:
        entries: List[CloudFileEntry] = []
        for hit in ctx.hits_for(SignatureRole.METADATA_STORE):
            if ctx.identity.platform is Platform.IOS:
                db = ctx.database(hit)
                if db is None:
                    continue
                records = [
                    r
                    for r in ctx.table_records(hit, db, BOX_IOS_FILES.table)
                    if not any(r.get(column) for column in _USER_COLUMNS)
                ]
                entries.extend(ctx.mapped_entries(hit, BOX_IOS_FILES, records))
                continue
            data = ctx.read(hit)
            if data is None:
                continue
            try:
                model = parse_json(data, ctx.warnings)
            except FormatError as exc:
                ctx.warn(f"{hit.resolved_path}: {exc}")
                continue
            entries.extend(ctx.mapped_entries(hit, BOX_ANDROID_FILES, _file_objects(model)))
        return entries

    def annotate(
        self, ctx: AnalysisContext, entries: List[CloudFileEntry]
    ) -> List[CloudFileEntry]:
        by_id = {e.remote_id: i for i, e in enumerate(entries) if e.remote_id}
        result = list(entries)

        def mark(file_id: str, create: bool = False, **extras: Any) -> None:
            index = by_id.get(file_id)
            if index is not None:
                result[index] = with_extras(result[index], **extras)
            elif create:
                by_id[file_id] = len(result)
                result.append(
                    CloudFileEntry(
                        name=f"box_file_{file_id}",
                        remote_id=file_id,
                        extras=extras,
                        synthetic_name=True,
                    )
                )

        for hit in ctx.hits_for(SignatureRole.PREFS_FILE):
            name = hit.resolved_path.rsplit("/", 1)[-1].lower()
            if name not in (
                "downloaded_files.xml",
                "preview_num_pages.xml",
                "offlinefilesharedpreferences.xml",
            ):
                continue
            prefs = ctx.shared_prefs(hit)
            if prefs is None:
                continue
            for pref in prefs.entries:
                file_id = pref.name.strip()
                if name == "downloaded_files.xml":
                    # opaque value, kept as written
                    mark(file_id, downloaded_files=pref.value)
                elif name == "preview_num_pages.xml":
                    mark(file_id, preview_pages=pref.value)
                else:
                    mark(file_id, True, **{ENCRYPTED_CACHE_KEY: True, "offline_saved": pref.value})
        return result

    def account(self, ctx: AnalysisContext) -> AccountInfo:
        if ctx.identity.platform is Platform.IOS:
            for hit in ctx.hits_for(SignatureRole.METADATA_STORE):
                db = ctx.database(hit)
                if db is None:
                    continue
                for record in ctx.table_records(hit, db, BOX_IOS_FILES.table):
                    if any(record.get(column) for column in _USER_COLUMNS):
                        return AccountInfo(
                            email=record.get("ZEMAIL"),
                            display_name=record.get("ZUSERNAME"),
                            auth_token=record.get("ZAUTHTOKEN"),
                            user_id=_text(record.get("ZBOXID")),
                        )
            return AccountInfo()

        bound_email = next(
            (hit.bindings["EMAIL"] for hit in ctx.hits if "EMAIL" in hit.bindings), None
        )
        for hit in ctx.hits_for(SignatureRole.PREFS_FILE, "mypreference.xml"):
            prefs = ctx.shared_prefs(hit)
            if prefs is not None:
                return account_from_pairs(prefs.as_dict(), bound_email)
        return AccountInfo(email=bound_email)

    def download_urls(
        self,
        ctx: AnalysisContext,
        account: AccountInfo,
        entries: Sequence[CloudFileEntry],
    ) -> Dict[str, str]:
        if not account.auth_token:
            return {}
        urls: Dict[str, str] = {}
        for entry in entries:
            if not entry.remote_id:
                continue
            try:
                urls[entry.name] = reconstruct_box_url(account.auth_token, entry.remote_id)
            except ValueError as exc:
                ctx.warn(f"{entry.name}: no download URL: {exc}")
        if urls:
            ctx.note(
                "download URLs use the legacy API host; newer accounts may need "
                f"{ctx.settings.box_alternate_host} instead"
            )
        return urls


def _text(value: Any) -> Optional[str]:
    if value is None:
        return None
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    return str(value)


__all__ = ["BoxAnalyzer"]
