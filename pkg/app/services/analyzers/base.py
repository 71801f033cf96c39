"""Shared analyzer pipeline: store reading, object collection, linking, classification."""

from __future__ import annotations

import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from app.config import Settings, get_settings
from app.errors import EvidenceNotFoundError, FormatError, UnknownTableError
from app.evidence import (
    AccountInfo,
    AppIdentity,
    AppSnapshot,
    CloudFileEntry,
    LogEvent,
    ObjectOrigin,
    Provider,
    RecoveredObject,
    RecoveryStatus,
    SnapshotEntry,
    SnapshotSource,
    classify_status,
    dedupe_entries,
)
from app.readers.codecs import SharedPref, parse_kv_log, parse_shared_prefs
from app.readers.plist import PlistValue, parse_plist
from app.readers.sqlite import Database, open_db, read_rows
from app.services.analyzers.fieldmaps import FieldMap
from app.services.image import EvidenceTree
from app.services.locator import ArtifactHit
from app.services.registry import SignatureRole

logger = logging.getLogger(__name__)

EMAIL_RE = re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}")

BOX_DOWNLOAD_HOST = "www.box.net"

_ROLE_ORIGINS = {
    SignatureRole.CACHE_DIR: ObjectOrigin.CACHE_PATH,
    SignatureRole.OFFLINE_DIR: ObjectOrigin.OFFLINE_DIR,
    SignatureRole.THUMBNAIL_DIR: ObjectOrigin.THUMBNAIL_DIR,
    SignatureRole.PREVIEW_DIR: ObjectOrigin.PREVIEW_DIR,
}

ENCRYPTED_CACHE_KEY = "encrypted_cache"


def reconstruct_box_url(token: str, file_id: str, host: str = BOX_DOWNLOAD_HOST) -> str:
    token = (token or "").strip()
    file_id = (str(file_id) if file_id is not None else "").strip()
    if not token or not file_id:
        raise ValueError("auth token and file id are both required")
    if "/" in token or "/" in file_id:
        raise ValueError("auth token and file id must not contain '/'")
    return f"https://{host}/api/1.0/download/{token}/{file_id}"


def verify_entry_hash(entry: CloudFileEntry, obj: RecoveredObject) -> bool:
    if entry.hash is None:
        raise ValueError(f"{entry.name}: entry carries no hash to verify against")
    return obj.digest(entry.hash.algorithm) == entry.hash.hex


def with_extras(entry: CloudFileEntry, **extras: Any) -> CloudFileEntry:
    merged = dict(entry.extras)
    merged.update(extras)
    return replace(entry, extras=merged)


def first_email(values: Iterable[Any]) -> Optional[str]:
    for value in values:
        if isinstance(value, str):
            match = EMAIL_RE.search(value)
            if match:
                return match.group(0)
    return None


def account_from_pairs(pairs: Mapping[str, Any], fallback_email: Optional[str] = None) -> AccountInfo:
    """Classifies preference keys into account fields; unrecognized keys go to extras."""

    found: Dict[str, Any] = {}
    first_name = last_name = None
    extras: Dict[str, Any] = {}
    for key, value in pairs.items():
        folded = re.sub(r"[^a-z]", "", key.lower())
        text = str(value) if value is not None else ""
        if "token" in folded:
            found.setdefault("auth_token", text)
        elif "password" in folded:
            found.setdefault("password_hash", text)
        elif "email" in folded or "login" in folded:
            email = first_email([text])
            if email:
                found.setdefault("email", email)
            else:
                extras[key] = value
        elif folded in ("userid", "uid", "ownerid") or folded.endswith("userid"):
            found.setdefault("user_id", text)
        elif folded == "firstname":
            first_name = text
        elif folded == "lastname":
            last_name = text
        elif folded in ("displayname", "username", "name", "fullname"):
            found.setdefault("display_name", text)
        else:
            extras[key] = value
    if "display_name" not in found and (first_name or last_name):
        found["display_name"] = " ".join(part for part in (first_name, last_name) if part)
    if "email" not in found and fallback_email:
        found["email"] = fallback_email
    return AccountInfo(extras=extras, **found)


@dataclass
class AnalysisContext:
    identity: AppIdentity
    hits: Sequence[ArtifactHit]
    trees: Mapping[str, EvidenceTree]
    settings: Settings
    warnings: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def warn(self, message: str) -> None:
        logger.warning("[ANALYZE] %s: %s", self.identity.label, message)
        self.warnings.append(message)

    def note(self, message: str) -> None:
        if message not in self.notes:
            self.notes.append(message)

    def hits_for(self, role: SignatureRole, suffix: Optional[str] = None) -> List[ArtifactHit]:
        """Hits of a role, optionally narrowed to paths whose file name matches suffix."""

        found = [hit for hit in self.hits if hit.role is role]
        if suffix is not None:
            wanted = suffix.lower()
            found = [
                hit
                for hit in found
                if hit.resolved_path.rsplit("/", 1)[-1].lower().endswith(wanted)
            ]
        return found

    def tree(self, hit: ArtifactHit) -> EvidenceTree:
        return self.trees[hit.tree]

    def read(self, hit: ArtifactHit) -> Optional[bytes]:
        try:
            return self.tree(hit).read(hit.resolved_path)
        except (EvidenceNotFoundError, OSError) as exc:
            self.warn(f"{hit.resolved_path}: cannot read: {exc}")
            return None

    def database(self, hit: ArtifactHit) -> Optional[Database]:
        data = self.read(hit)
        if data is None:
            return None
        try:
            return open_db(data)
        except FormatError as exc:
            self.warn(f"{hit.resolved_path}: {exc}")
            return None

    def table_records(self, hit: ArtifactHit, db: Database, table: str) -> List[Dict[str, Any]]:
        try:
            rows = read_rows(db, table, self.warnings)
        except UnknownTableError:
            self.warn(f"{hit.resolved_path}: table {table} not found")
            return []
        except FormatError as exc:
            self.warn(f"{hit.resolved_path}: table {table}: {exc}")
            return []
        return [dict(row.values) for row in rows]

    def mapped_entries(
        self,
        hit: ArtifactHit,
        field_map: FieldMap,
        records: Iterable[Mapping[str, Any]],
    ) -> List[CloudFileEntry]:
        entries = []
        for record in records:
            entry = field_map.to_entry(record, hit.resolved_path, self.warnings)
            if entry is not None:
                entries.append(entry)
        logger.debug(
            "[ANALYZE] %s %s: %d entries", hit.resolved_path, field_map.table, len(entries)
        )
        return entries

    def kv_log(self, hit: ArtifactHit, format_id: str) -> List[LogEvent]:
        data = self.read(hit)
        if data is None:
            return []
        return parse_kv_log(data, format_id, self.warnings, hit.resolved_path)

    def plist(self, hit: ArtifactHit) -> PlistValue:
        data = self.read(hit)
        if data is None:
            return None
        issues: List[str] = []
        try:
            value = parse_plist(data, issues)
        except FormatError as exc:
            self.warn(f"{hit.resolved_path}: {exc}")
            return None
        for issue in issues:
            self.warn(f"{hit.resolved_path}: {issue}")
        return value

    def shared_prefs(self, hit: ArtifactHit) -> Optional[SharedPref]:
        data = self.read(hit)
        if data is None:
            return None
        try:
            return parse_shared_prefs(data, hit.resolved_path, self.warnings)
        except FormatError as exc:
            self.warn(f"{hit.resolved_path}: {exc}")
            return None


class ProviderAnalyzer:
    """Per-provider hooks; the pipeline in analyze_hits does the rest."""

    provider: Provider

    def entries(self, ctx: AnalysisContext) -> List[CloudFileEntry]:
        return []

    def annotate(
        self, ctx: AnalysisContext, entries: List[CloudFileEntry]
    ) -> List[CloudFileEntry]:
        return entries

    def account(self, ctx: AnalysisContext) -> AccountInfo:
        return AccountInfo()

    def events(self, ctx: AnalysisContext) -> List[LogEvent]:
        return []

    def download_urls(
        self,
        ctx: AnalysisContext,
        account: AccountInfo,
        entries: Sequence[CloudFileEntry],
    ) -> Dict[str, str]:
        return {}


def collect_objects(ctx: AnalysisContext) -> List[RecoveredObject]:
    claimed: Set[Tuple[str, str]] = {
        (hit.tree, hit.resolved_path) for hit in ctx.hits if not hit.role.is_directory
    }
    seen: Set[Tuple[str, str]] = set()
    objects: List[RecoveredObject] = []
    for hit in ctx.hits:
        if hit.role is SignatureRole.ENCRYPTED_CACHE_DIR:
            count = len(ctx.tree(hit).list_dir(hit.resolved_path))
            ctx.note(f"{count} encrypted files under {hit.resolved_path} are opaque")
            continue
        origin = _ROLE_ORIGINS.get(hit.role)
        if origin is None:
            continue
        tree = ctx.tree(hit)
        for path in tree.list_dir(hit.resolved_path):
            key = (hit.tree, path)
            if key in claimed or key in seen:
                continue
            seen.add(key)
            if tree.size(path) == 0:
                ctx.warn(f"{path}: empty file ignored")
                continue
            try:
                content = tree.read(path)
            except (EvidenceNotFoundError, OSError) as exc:
                ctx.warn(f"{path}: cannot read: {exc}")
                continue
            objects.append(
                RecoveredObject.from_bytes(
                    path.rsplit("/", 1)[-1], origin, content, path=path, tree=hit.tree
                )
            )
    return objects


@dataclass
class _Index:
    entries: Dict[str, CloudFileEntry]
    folded: Dict[str, List[str]] = field(default_factory=lambda: defaultdict(list))
    remote: Dict[str, List[str]] = field(default_factory=lambda: defaultdict(list))
    hashes: Dict[Tuple[str, str], List[str]] = field(default_factory=lambda: defaultdict(list))
    sizes: Dict[int, List[str]] = field(default_factory=lambda: defaultdict(list))

    def add(self, entry: CloudFileEntry) -> None:
        self.entries[entry.name] = entry
        self.folded[entry.name.lower()].append(entry.name)
        if entry.remote_id:
            self.remote[entry.remote_id].append(entry.name)
        if entry.hash is not None:
            self.hashes[(entry.hash.algorithm.value, entry.hash.hex)].append(entry.name)
        if entry.size_bytes is not None and not entry.synthetic_name:
            self.sizes[entry.size_bytes].append(entry.name)

    def target(self, obj: RecoveredObject) -> Optional[str]:
        base = obj.logical_name.rsplit("/", 1)[-1]
        if base in self.entries:
            return base
        folded = self.folded.get(base.lower(), [])
        if len(folded) == 1:
            return folded[0]
        for key in (obj.stem, obj.stem.split("_", 1)[0]):
            names = self.remote.get(key)
            if names:
                return sorted(names)[0]
        for algorithm, digest in (("md5", obj.md5), ("sha1", obj.sha1)):
            names = self.hashes.get((algorithm, digest))
            if names:
                return sorted(names)[0]
        if obj.origin is ObjectOrigin.CARVED:
            names = self.sizes.get(obj.length, [])
            if len(names) == 1:
                return names[0]
        return None


def link_objects(
    entries: Sequence[CloudFileEntry],
    objects: Sequence[RecoveredObject],
    claim_unlinked: bool = True,
) -> Tuple[List[CloudFileEntry], Dict[str, List[RecoveredObject]], List[RecoveredObject]]:
    """Attaches objects to entries: name, remote id, hash, then unique size for carved data.

    Returns (entries including ones created for unlinked objects, objects per entry
    name, carved objects left unclaimed).
    """

    index = _Index({})
    for entry in entries:
        index.add(entry)
    linked: Dict[str, List[RecoveredObject]] = defaultdict(list)
    unclaimed: List[RecoveredObject] = []
    for obj in objects:
        name = index.target(obj)
        if name is None:
            if obj.origin is ObjectOrigin.CARVED:
                if not claim_unlinked:
                    unclaimed.append(obj)
                    continue
                entry = CloudFileEntry(
                    name=obj.logical_name, size_bytes=obj.length, synthetic_name=True
                )
            else:
                entry = CloudFileEntry(name=obj.logical_name.rsplit("/", 1)[-1])
            index.add(entry)
            name = entry.name
        linked[name].append(obj)
    return list(index.entries.values()), dict(linked), unclaimed


def _object_key(obj: RecoveredObject) -> Tuple[str, str, int]:
    return obj.origin.value, obj.path or "", obj.offset or 0


def snapshot_entries(
    entries: Sequence[CloudFileEntry],
    linked: Mapping[str, Sequence[RecoveredObject]],
    warnings: Optional[List[str]] = None,
) -> Tuple[SnapshotEntry, ...]:
    result = []
    for entry in sorted(entries, key=lambda e: e.name):
        objects = tuple(sorted(linked.get(entry.name, ()), key=_object_key))
        status = classify_status(entry, objects, warnings)
        if status is RecoveryStatus.NOT_OBSERVED and entry.extras.get(ENCRYPTED_CACHE_KEY):
            status = RecoveryStatus.ENCRYPTED_CACHE_ONLY
        result.append(SnapshotEntry(entry=entry, status=status, objects=objects))
    return tuple(result)


def analyze_hits(
    analyzer: ProviderAnalyzer,
    identity: AppIdentity,
    hits: Sequence[ArtifactHit],
    trees: Mapping[str, EvidenceTree],
    carved: Sequence[RecoveredObject] = (),
    *,
    claim_unlinked: bool = True,
    settings: Optional[Settings] = None,
) -> Tuple[AppSnapshot, List[RecoveredObject]]:
    ctx = AnalysisContext(identity, hits, trees, settings or get_settings())

    if identity.unknown_version:
        candidates = sorted({c for hit in hits for c in hit.candidates})
        ctx.note(
            "app version not determined; candidate versions: "
            + (", ".join(candidates) if candidates else "none")
        )
    if any(hit.ambiguous for hit in hits):
        ctx.warn("artifact evidence matches more than one app version or provider")
    if not ctx.hits_for(SignatureRole.METADATA_STORE):
        ctx.warn("no metadata store found")

    entries = dedupe_entries(analyzer.entries(ctx), ctx.warnings)
    entries = analyzer.annotate(ctx, entries)
    objects = collect_objects(ctx) + list(carved)
    all_entries, linked, unclaimed = link_objects(entries, objects, claim_unlinked)
    if carved:
        ctx.note("carving recovers contiguous files only; fragmented files are not reassembled")

    account = analyzer.account(ctx)
    events = tuple(analyzer.events(ctx))
    urls = analyzer.download_urls(ctx, account, all_entries)
    snapshot = AppSnapshot(
        identity=identity,
        account=account,
        entries=snapshot_entries(all_entries, linked, ctx.warnings),
        events=events,
        warnings=tuple(ctx.warnings),
        notes=tuple(ctx.notes),
        download_urls=dict(sorted(urls.items())),
        sources=tuple(
            sorted(
                {
                    SnapshotSource(
                        hit.role.value, hit.resolved_path, hit.tree, hit.signature.paper_ref
                    )
                    for hit in hits
                },
                key=lambda s: (s.tree, s.path, s.role),
            )
        ),
    )
    logger.info(
        "[ANALYZE] %s: %d entries, %d events, %d warnings",
        identity.label,
        len(snapshot.entries),
        len(snapshot.events),
        len(snapshot.warnings),
    )
    return snapshot, unclaimed


__all__ = [
    "AnalysisContext",
    "EMAIL_RE",
    "ENCRYPTED_CACHE_KEY",
    "ProviderAnalyzer",
    "account_from_pairs",
    "analyze_hits",
    "collect_objects",
    "first_email",
    "link_objects",
    "reconstruct_box_url",
    "snapshot_entries",
    "verify_entry_hash",
    "with_extras",
]
