"""Stable JSON report schema, its text projection, and the run sidecar."""

from __future__ import annotations

import datetime as dt
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from app import __version__
from app.errors import FormatError
from app.evidence import (
    AccountInfo,
    AppIdentity,
    AppSnapshot,
    CloudFileEntry,
    ContentHash,
    Epoch,
    HashAlgorithm,
    LogEvent,
    ObjectOrigin,
    Platform,
    Provider,
    RecoveredObject,
    RecoveryStatus,
    SnapshotEntry,
    SnapshotSource,
    TaggedTimestamp,
    is_provenance_warning,
)
from app.services.merge import MergedDataset, MergedItem, MergeRecord, count_recovered
from app.services.storage import dump_json, save_json, save_text, split_output

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
TOOL_NAME = "cloudsift"


@dataclass(frozen=True)
class ReportInput:
    label: str
    kind: str
    sha1: str


@dataclass(frozen=True)
class Report:
    inputs: Tuple[ReportInput, ...] = ()
    snapshots: Tuple[AppSnapshot, ...] = ()
    merged: Tuple[MergedDataset, ...] = ()
    unclaimed_carved: Tuple[RecoveredObject, ...] = ()
    warnings: Tuple[str, ...] = ()
    notes: Tuple[str, ...] = ()
    tool_version: str = __version__

    @property
    def partial(self) -> bool:
        return any(
            not is_provenance_warning(warning)
            for snapshot in self.snapshots
            for warning in snapshot.warnings
        )


@dataclass
class Sidecar:
    """Run facts that would break report determinism: wall clock and host paths."""

    report: str
    generated_at: str
    inputs: Dict[str, str] = field(default_factory=dict)

    @classmethod
    def now(cls, report: str, inputs: Mapping[str, str]) -> "Sidecar":
        stamp = dt.datetime.now(dt.timezone.utc).replace(microsecond=0).isoformat()
        return cls(report=report, generated_at=stamp, inputs=dict(sorted(inputs.items())))

    def to_dict(self) -> Dict[str, Any]:
        return {"report": self.report, "generated_at": self.generated_at, "inputs": self.inputs}


# --- serialization -------------------------------------------------------------


def _timestamp(value: Optional[TaggedTimestamp]) -> Optional[Dict[str, Any]]:
    if value is None:
        return None
    return {"epoch": value.epoch.value, "value": value.value}


def _hash(value: Optional[ContentHash]) -> Optional[Dict[str, str]]:
    if value is None:
        return None
    return {"algorithm": value.algorithm.value, "hex": value.hex}


def _identity(identity: AppIdentity) -> Dict[str, str]:
    return {
        "provider": identity.provider.value,
        "platform": identity.platform.value,
        "app_version": identity.app_version,
    }


def _object(obj: RecoveredObject) -> Dict[str, Any]:
    return {
        "logical_name": obj.logical_name,
        "origin": obj.origin.value,
        "length": obj.length,
        "md5": obj.md5,
        "sha1": obj.sha1,
        "path": obj.path,
        "tree": obj.tree,
        "offset": obj.offset,
    }


def _entry(item: SnapshotEntry) -> Dict[str, Any]:
    entry = item.entry
    return {
        "name": entry.name,
        "status": item.status.value,
        "remote_id": entry.remote_id,
        "size_bytes": entry.size_bytes,
        "hash": _hash(entry.hash),
        "created": _timestamp(entry.created),
        "modified": _timestamp(entry.modified),
        "last_viewed": _timestamp(entry.last_viewed),
        "favorite": entry.favorite,
        "deleted_flag": entry.deleted_flag,
        "thumbnail_url": entry.thumbnail_url,
        "source_artifact": entry.source_artifact,
        "extras": dict(entry.extras),
        "synthetic_name": entry.synthetic_name,
        "objects": [_object(obj) for obj in item.objects],
    }


def _event(event: LogEvent) -> Dict[str, Any]:
    return {
        "timestamp": _timestamp(event.timestamp),
        "event_kind": event.event_kind,
        "attributes": dict(event.attributes),
        "source": event.source,
    }


def snapshot_to_dict(snapshot: AppSnapshot) -> Dict[str, Any]:
    account = snapshot.account
    return {
        "identity": _identity(snapshot.identity),
        "account": {
            "email": account.email,
            "display_name": account.display_name,
            "user_id": account.user_id,
            "auth_token": account.auth_token,
            "password_hash": account.password_hash,
            "extras": dict(account.extras),
        },
        "entries": [_entry(item) for item in snapshot.entries],
        "recovered_count": sum(1 for item in snapshot.entries if item.status.recovered),
        "events": [_event(event) for event in snapshot.events],
        "warnings": list(snapshot.warnings),
        "notes": list(snapshot.notes),
        "download_urls": dict(snapshot.download_urls),
        "sources": [
            {"role": s.role, "path": s.path, "tree": s.tree, "paper_ref": s.paper_ref}
            for s in snapshot.sources
        ],
    }


def merged_to_dict(dataset: MergedDataset) -> Dict[str, Any]:
    return {
        "provider": dataset.provider.value if dataset.provider is not None else None,
        "count_recovered": count_recovered(dataset),
        "items": [
            {
                "name": item.name,
                "hash": _hash(item.hash),
                "best_status": item.best_status.value,
                "provenance": {device: s.value for device, s in item.provenance.items()},
                "conflicts": list(item.conflicts),
            }
            for item in dataset.items
        ],
        "records": [
            {
                "name": record.name,
                "device": record.device,
                "status": record.status.value,
                "synthetic": record.synthetic,
                "digests": [list(digest) for digest in sorted(record.digests)],
            }
            for record in dataset.records
        ],
    }


def report_to_dict(report: Report) -> Dict[str, Any]:
    return {
        "schema": SCHEMA_VERSION,
        "tool": {"name": TOOL_NAME, "version": report.tool_version},
        "inputs": [
            {"label": item.label, "kind": item.kind, "sha1": item.sha1} for item in report.inputs
        ],
        "snapshots": [snapshot_to_dict(s) for s in report.snapshots],
        "merged": [merged_to_dict(d) for d in report.merged],
        "unclaimed_carved": [_object(obj) for obj in report.unclaimed_carved],
        "warnings": list(report.warnings),
        "notes": list(report.notes),
    }


def serialize(report: Report) -> str:
    return dump_json(report_to_dict(report))


# --- parsing -------------------------------------------------------------------


def _parse_timestamp(raw: Optional[Mapping[str, Any]]) -> Optional[TaggedTimestamp]:
    if raw is None:
        return None
    return TaggedTimestamp(Epoch(raw["epoch"]), raw["value"])


def _parse_hash(raw: Optional[Mapping[str, Any]]) -> Optional[ContentHash]:
    if raw is None:
        return None
    return ContentHash(HashAlgorithm(raw["algorithm"]), raw["hex"])


def _parse_identity(raw: Mapping[str, Any]) -> AppIdentity:
    return AppIdentity(Provider(raw["provider"]), Platform(raw["platform"]), raw["app_version"])


def _parse_object(raw: Mapping[str, Any]) -> RecoveredObject:
    return RecoveredObject(
        logical_name=raw["logical_name"],
        origin=ObjectOrigin(raw["origin"]),
        length=raw["length"],
        md5=raw["md5"],
        sha1=raw["sha1"],
        path=raw.get("path"),
        tree=raw.get("tree"),
        offset=raw.get("offset"),
    )


def _parse_entry(raw: Mapping[str, Any]) -> SnapshotEntry:
    entry = CloudFileEntry(
        name=raw["name"],
        remote_id=raw.get("remote_id"),
        size_bytes=raw.get("size_bytes"),
        hash=_parse_hash(raw.get("hash")),
        created=_parse_timestamp(raw.get("created")),
        modified=_parse_timestamp(raw.get("modified")),
        last_viewed=_parse_timestamp(raw.get("last_viewed")),
        favorite=raw.get("favorite"),
        deleted_flag=raw.get("deleted_flag"),
        thumbnail_url=raw.get("thumbnail_url"),
        source_artifact=raw.get("source_artifact"),
        extras=dict(raw.get("extras") or {}),
        synthetic_name=bool(raw.get("synthetic_name")),
    )
    return SnapshotEntry(
        entry=entry,
        status=RecoveryStatus(raw["status"]),
        objects=tuple(_parse_object(obj) for obj in raw.get("objects", ())),
    )


def snapshot_from_dict(raw: Mapping[str, Any]) -> AppSnapshot:
    account = raw.get("account") or {}
    return AppSnapshot(
        identity=_parse_identity(raw["identity"]),
        account=AccountInfo(
            email=account.get("email"),
            display_name=account.get("display_name"),
            user_id=account.get("user_id"),
            auth_token=account.get("auth_token"),
            password_hash=account.get("password_hash"),
            extras=dict(account.get("extras") or {}),
        ),
        entries=tuple(_parse_entry(item) for item in raw.get("entries", ())),
        events=tuple(
            LogEvent(
                timestamp=_parse_timestamp(event.get("timestamp")),
                event_kind=event["event_kind"],
                attributes=dict(event.get("attributes") or {}),
                source=event.get("source"),
            )
            for event in raw.get("events", ())
        ),
        warnings=tuple(raw.get("warnings", ())),
        notes=tuple(raw.get("notes", ())),
        download_urls=dict(raw.get("download_urls") or {}),
        sources=tuple(
            SnapshotSource(s["role"], s["path"], s["tree"], s["paper_ref"])
            for s in raw.get("sources", ())
        ),
    )


def merged_from_dict(raw: Mapping[str, Any]) -> MergedDataset:
    provider = raw.get("provider")
    return MergedDataset(
        provider=Provider(provider) if provider is not None else None,
        items=tuple(
            MergedItem(
                name=item["name"],
                hash=_parse_hash(item.get("hash")),
                best_status=RecoveryStatus(item["best_status"]),
                provenance={
                    device: RecoveryStatus(status)
                    for device, status in (item.get("provenance") or {}).items()
                },
                conflicts=tuple(item.get("conflicts", ())),
            )
            for item in raw.get("items", ())
        ),
        records=tuple(
            MergeRecord(
                name=record["name"],
                device=record["device"],
                status=RecoveryStatus(record["status"]),
                synthetic=bool(record.get("synthetic")),
                digests=frozenset(tuple(digest) for digest in record.get("digests", ())),
            )
            for record in raw.get("records", ())
        ),
    )


def report_from_dict(raw: Mapping[str, Any]) -> Report:
    if not isinstance(raw, Mapping):
        raise FormatError("report must be a JSON object")
    schema = raw.get("schema")
    if schema != SCHEMA_VERSION:
        raise FormatError(f"unsupported report schema: {schema!r}")
    try:
        return Report(
            inputs=tuple(
                ReportInput(item["label"], item["kind"], item["sha1"])
                for item in raw.get("inputs", ())
            ),
            snapshots=tuple(snapshot_from_dict(s) for s in raw.get("snapshots", ())),
            merged=tuple(merged_from_dict(d) for d in raw.get("merged", ())),
            unclaimed_carved=tuple(_parse_object(o) for o in raw.get("unclaimed_carved", ())),
            warnings=tuple(raw.get("warnings", ())),
            notes=tuple(raw.get("notes", ())),
            tool_version=(raw.get("tool") or {}).get("version", __version__),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed report: {exc}") from None


def parse(text: str) -> Report:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"report is not valid JSON: {exc}") from None
    return report_from_dict(raw)


def load_report(path: str) -> Report:
    with open(path, "r", encoding="utf-8") as handle:
        return parse(handle.read())


# --- text projection ------------------------------------------------------------


def _status_counts(snapshot: AppSnapshot) -> str:
    counts: Dict[str, int] = {}
    for item in snapshot.entries:
        counts[item.status.value] = counts.get(item.status.value, 0) + 1
    return ", ".join(f"{status}={count}" for status, count in sorted(counts.items()))


def render_text(report: Report) -> str:
    lines: List[str] = [f"{TOOL_NAME} {report.tool_version} report (schema {SCHEMA_VERSION})"]
    for item in report.inputs:
        lines.append(f"input {item.label} [{item.kind}] sha1={item.sha1}")
    for snapshot in report.snapshots:
        account = snapshot.account
        lines.append("")
        lines.append(f"== {snapshot.identity.label}")
        lines.append(
            "account: "
            + ", ".join(
                f"{name}={value}"
                for name, value in (
                    ("email", account.email),
                    ("display_name", account.display_name),
                    ("user_id", account.user_id),
                    ("auth_token", account.auth_token),
                )
                if value
            )
        )
        lines.append(f"statuses: {_status_counts(snapshot)}")
        width = max((len(item.entry.name) for item in snapshot.entries), default=4)
        for item in snapshot.entries:
            lines.append(f"  {item.entry.name:<{width}}  {item.status.value}")
        lines.append(f"events: {len(snapshot.events)}")
        for name, url in snapshot.download_urls.items():
            lines.append(f"url {name}: {url}")
        lines.extend(f"warning: {message}" for message in snapshot.warnings)
        lines.extend(f"note: {message}" for message in snapshot.notes)
    for dataset in report.merged:
        provider = dataset.provider.value if dataset.provider is not None else "-"
        lines.append("")
        lines.append(f"== merged {provider}: {count_recovered(dataset)} recovered")
        for item in dataset.items:
            devices = ", ".join(f"{d}={s.value}" for d, s in item.provenance.items())
            lines.append(f"  {item.name}  {item.best_status.value}  ({devices})")
    if report.unclaimed_carved:
        lines.append("")
        lines.append(f"unclaimed carved objects: {len(report.unclaimed_carved)}")
    lines.extend(f"warning: {message}" for message in report.warnings)
    lines.extend(f"note: {message}" for message in report.notes)
    return "\n".join(lines) + "\n"


def write_report(
    report: Report,
    out_path: str,
    input_paths: Mapping[str, str],
    fmt: str = "json",
) -> Tuple[str, str]:
    """Writes the report and <name>.run.json beside it; returns both paths."""

    directory, name = split_output(out_path)
    text = serialize(report) if fmt == "json" else render_text(report)
    path = save_text(directory, name, text).path
    sidecar = Sidecar.now(name, input_paths)
    sidecar_path = save_json(directory, f"{name}.run.json", sidecar.to_dict()).path
    logger.info("[REPORT] %s (%d snapshots, %d merged)", path, len(report.snapshots), len(report.merged))
    return path, sidecar_path


__all__ = [
    "Report",
    "ReportInput",
    "SCHEMA_VERSION",
    "Sidecar",
    "load_report",
    "merged_from_dict",
    "merged_to_dict",
    "parse",
    "render_text",
    "report_from_dict",
    "report_to_dict",
    "serialize",
    "snapshot_from_dict",
    "snapshot_to_dict",
    "write_report",
]
