"""Per-provider interpretation of located artifacts into AppSnapshots."""

from __future__ import annotations

from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Type, Union

from app.config import Settings
from app.evidence import AppIdentity, AppSnapshot, Provider, RecoveredObject
from app.services.analyzers.base import (
    ProviderAnalyzer,
    analyze_hits,
    reconstruct_box_url,
    verify_entry_hash,
)
from app.services.analyzers.box import BoxAnalyzer
from app.services.analyzers.dropbox import DropboxAnalyzer
from app.services.analyzers.sugarsync import SugarSyncAnalyzer
from app.services.analyzers.syncplicity import SyncplicityAnalyzer
from app.services.image import EvidenceTree
from app.services.locator import ArtifactHit

ANALYZERS: Dict[Provider, Type[ProviderAnalyzer]] = {
    Provider.BOX: BoxAnalyzer,
    Provider.DROPBOX: DropboxAnalyzer,
    Provider.SUGARSYNC: SugarSyncAnalyzer,
    Provider.SYNCPLICITY: SyncplicityAnalyzer,
}

Trees = Union[EvidenceTree, Sequence[EvidenceTree], Mapping[str, EvidenceTree]]


def _tree_map(trees: Trees) -> Dict[str, EvidenceTree]:
    if isinstance(trees, EvidenceTree):
        return {trees.label: trees}
    if isinstance(trees, Mapping):
        return dict(trees)
    return {tree.label: tree for tree in trees}


def analyze_with_unclaimed(
    identity: AppIdentity,
    hits: Sequence[ArtifactHit],
    trees: Trees,
    carved: Sequence[RecoveredObject] = (),
    *,
    claim_unlinked: bool = True,
    settings: Optional[Settings] = None,
) -> Tuple[AppSnapshot, List[RecoveredObject]]:
    """Like analyze, also returning carved objects no entry claimed."""

    foreign = [hit for hit in hits if hit.identity.provider is not identity.provider]
    if foreign:
        raise ValueError(
            f"hits for {foreign[0].identity.label} passed to the {identity.provider.value} analyzer"
        )
    analyzer = ANALYZERS[identity.provider]()
    return analyze_hits(
        analyzer,
        identity,
        hits,
        _tree_map(trees),
        carved,
        claim_unlinked=claim_unlinked,
        settings=settings,
    )


def analyze(
    identity: AppIdentity,
    hits: Sequence[ArtifactHit],
    trees: Trees,
    carved: Sequence[RecoveredObject] = (),
    *,
    settings: Optional[Settings] = None,
) -> AppSnapshot:
    snapshot, _ = analyze_with_unclaimed(identity, hits, trees, carved, settings=settings)
    return snapshot


__all__ = [
    "ANALYZERS",
    "analyze",
    "analyze_with_unclaimed",
    "reconstruct_box_url",
    "verify_entry_hash",
]
