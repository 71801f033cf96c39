"""Union of per-device snapshots of one provider account."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from app.errors import MixedProviderError
from app.evidence import (
    AppSnapshot,
    ContentHash,
    HashAlgorithm,
    ObjectOrigin,
    Provider,
    RecoveryStatus,
    SnapshotEntry,
    strongest,
)

logger = logging.getLogger(__name__)

Digest = Tuple[str, str]

# renditions do not share bytes with the file they depict
_RENDITIONS = (ObjectOrigin.THUMBNAIL_DIR, ObjectOrigin.PREVIEW_DIR)


@dataclass(frozen=True)
class MergeRecord:
    name: str
    device: str
    status: RecoveryStatus
    synthetic: bool = False
    digests: FrozenSet[Digest] = frozenset()

    @classmethod
    def from_entry(cls, device: str, item: SnapshotEntry) -> "MergeRecord":
        digests = set()
        if item.entry.hash is not None:
            digests.add((item.entry.hash.algorithm.value, item.entry.hash.hex))
        for obj in item.objects:
            if obj.origin in _RENDITIONS:
                continue
            digests.add((HashAlgorithm.MD5.value, obj.md5))
            digests.add((HashAlgorithm.SHA1.value, obj.sha1))
        return cls(
            name=item.entry.name,
            device=device,
            status=item.status,
            synthetic=item.entry.synthetic_name,
            digests=frozenset(digests),
        )


@dataclass(frozen=True)
class MergedItem:
    name: str
    hash: Optional[ContentHash]
    best_status: RecoveryStatus
    provenance: Mapping[str, RecoveryStatus] = field(default_factory=dict)
    conflicts: Tuple[str, ...] = ()

    @property
    def key(self) -> Tuple[str, str]:
        return self.name, self.hash.hex if self.hash is not None else ""


@dataclass(frozen=True)
class MergedDataset:
    provider: Optional[Provider]
    items: Tuple[MergedItem, ...] = ()
    records: Tuple[MergeRecord, ...] = ()

    def item(self, name: str) -> Optional[MergedItem]:
        for item in self.items:
            if item.name == name:
                return item
        return None


def _record_order(record: MergeRecord) -> Tuple[str, str, str, bool, List[Digest]]:
    return record.name, record.device, record.status.value, record.synthetic, sorted(record.digests)


class _UnionFind:
    def __init__(self, size: int) -> None:
        self.parent = list(range(size))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _components(records: Sequence[MergeRecord]) -> List[List[MergeRecord]]:
    """Groups records that share any digest; input order fixes output order."""

    uf = _UnionFind(len(records))
    owner: Dict[Digest, int] = {}
    for i, record in enumerate(records):
        for digest in sorted(record.digests):
            if digest in owner:
                uf.union(owner[digest], i)
            else:
                owner[digest] = i
    groups: Dict[int, List[MergeRecord]] = defaultdict(list)
    for i, record in enumerate(records):
        groups[uf.find(i)].append(record)
    return [groups[root] for root in sorted(groups)]


def _key_hash(records: Iterable[MergeRecord]) -> Optional[ContentHash]:
    digests = {digest for record in records for digest in record.digests}
    for algorithm in (HashAlgorithm.MD5, HashAlgorithm.SHA1):
        values = sorted(hex_ for alg, hex_ in digests if alg == algorithm.value)
        if values:
            return ContentHash(algorithm, values[0])
    return None


class _Cluster:
    def __init__(self, name: str, records: List[MergeRecord]) -> None:
        self.name = name
        self.records = list(records)
        self.conflicts: List[str] = []

    @property
    def digests(self) -> FrozenSet[Digest]:
        return frozenset(d for record in self.records for d in record.digests)

    @property
    def sort_key(self) -> Tuple[str, str]:
        found = _key_hash(self.records)
        return self.name, found.hex if found is not None else ""

    def to_item(self) -> MergedItem:
        by_device: Dict[str, List[RecoveryStatus]] = defaultdict(list)
        for record in self.records:
            by_device[record.device].append(record.status)
        provenance = {device: strongest(s) for device, s in sorted(by_device.items())}
        return MergedItem(
            name=self.name,
            hash=_key_hash(self.records),
            best_status=strongest(provenance.values()),
            provenance=provenance,
            conflicts=tuple(sorted(set(self.conflicts))),
        )


def _build(provider: Optional[Provider], records: Iterable[MergeRecord]) -> MergedDataset:
    unique = sorted(set(records), key=_record_order)
    named: Dict[str, List[MergeRecord]] = defaultdict(list)
    anonymous: List[MergeRecord] = []
    for record in unique:
        (anonymous if record.synthetic else named[record.name]).append(record)

    clusters: List[_Cluster] = []
    for name in sorted(named):
        group = named[name]
        hashed = [r for r in group if r.digests]
        bare = [r for r in group if not r.digests]
        parts = [_Cluster(name, part) for part in _components(hashed)]
        parts.sort(key=lambda c: c.sort_key)
        if not parts:
            parts = [_Cluster(name, bare)]
        elif bare:
            # records without any hash cannot pick a side; the first content keeps them
            parts[0].records.extend(bare)
            if len(parts) > 1:
                parts[0].conflicts.append(
                    f"{len(bare)} hash-less record(s) attached to one of {len(parts)} contents"
                )
        if len(parts) > 1:
            for part in parts:
                part.conflicts.append(f"{name} has {len(parts)} distinct contents across devices")
        clusters.extend(parts)

    for component in _components(anonymous):
        digests = frozenset(d for record in component for d in record.digests)
        targets = sorted(
            (c for c in clusters if c.digests & digests), key=lambda c: c.sort_key
        )
        if targets:
            targets[0].records.extend(component)
        else:
            clusters.append(_Cluster(min(r.name for r in component), component))

    items = sorted((cluster.to_item() for cluster in clusters), key=lambda item: item.key)
    return MergedDataset(provider=provider, items=tuple(items), records=tuple(unique))


def merge_snapshots(labeled: Sequence[Tuple[str, AppSnapshot]]) -> MergedDataset:
    providers = {snapshot.identity.provider for _, snapshot in labeled}
    if len(providers) > 1:
        raise MixedProviderError(
            "cannot merge snapshots of different providers: "
            + ", ".join(sorted(p.value for p in providers))
        )
    records = [
        MergeRecord.from_entry(device, item)
        for device, snapshot in labeled
        for item in snapshot.entries
    ]
    dataset = _build(next(iter(providers)) if providers else None, records)
    logger.info(
        "[MERGE] %d snapshots -> %d items, %d recovered",
        len(labeled),
        len(dataset.items),
        count_recovered(dataset),
    )
    return dataset


def combine_datasets(datasets: Sequence[MergedDataset]) -> MergedDataset:
    providers = {d.provider for d in datasets if d.provider is not None}
    if len(providers) > 1:
        raise MixedProviderError("cannot combine datasets of different providers")
    return _build(
        next(iter(providers)) if providers else None,
        [record for dataset in datasets for record in dataset.records],
    )


def count_recovered(dataset: MergedDataset) -> int:
    return sum(1 for item in dataset.items if item.best_status.recovered)


__all__ = [
    "MergeRecord",
    "MergedDataset",
    "MergedItem",
    "combine_datasets",
    "count_recovered",
    "merge_snapshots",
]
