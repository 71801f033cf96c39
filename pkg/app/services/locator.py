"""Resolves registry signatures against evidence trees."""

from __future__ import annotations

import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

from app.evidence import UNKNOWN_VERSION, AppIdentity, Platform, Provider
from app.services.image import EvidenceTree
from app.services.registry import IOS_APPLICATIONS, PathSignature, SignatureRole

logger = logging.getLogger(__name__)

_APPROOT = re.compile(r"^[A-Za-z0-9-]{32,36}$")
_PLACEHOLDER = re.compile(r"\{(APPROOT|EMAIL|USERID|X)\}")


@dataclass(frozen=True)
class ArtifactHit:
    signature: PathSignature
    resolved_path: str
    bindings: Mapping[str, str] = field(default_factory=dict)
    tree: str = ""
    ambiguous: bool = False
    candidates: Tuple[str, ...] = ()

    @property
    def role(self) -> SignatureRole:
        return self.signature.role

    @property
    def identity(self) -> AppIdentity:
        return self.signature.identity

    @property
    def group(self) -> str:
        return self.bindings.get("APPROOT", "")


def compile_pattern(pattern: str, flags: int = 0) -> "re.Pattern[str]":
    parts: List[str] = []
    last = 0
    for match in _PLACEHOLDER.finditer(pattern):
        parts.append(re.escape(pattern[last : match.start()]))
        name = match.group(1)
        body = r"[A-Za-z0-9-]{32,36}" if name == "APPROOT" else r"[^/]+"
        parts.append(f"(?P<{name}>{body})")
        last = match.end()
    parts.append(re.escape(pattern[last:]))
    return re.compile("".join(parts), flags)


def _match_signature(
    tree: EvidenceTree,
    signature: PathSignature,
    paths: Sequence[str],
    parents: Sequence[str],
) -> List[Tuple[str, Dict[str, str]]]:
    candidates = parents if signature.role.is_directory else paths
    for flags in (0, re.IGNORECASE):
        if flags and not tree.case_fallback:
            break
        regex = compile_pattern(signature.pattern, flags)
        found: Dict[str, Dict[str, str]] = {}
        for path in candidates:
            match = regex.fullmatch(path)
            if match:
                found[path] = {k: v for k, v in match.groupdict().items() if v is not None}
        if found:
            if flags and not signature.role.is_directory and not _PLACEHOLDER.search(signature.pattern):
                if len(found) != 1:
                    return []
            return sorted(found.items())
    return []


def _parent_dirs(paths: Iterable[str]) -> List[str]:
    parents: Set[str] = set()
    for path in paths:
        head = path.rsplit("/", 1)[0]
        if head:
            parents.add(head)
    return sorted(parents)


def _ios_app_folders(
    tree: EvidenceTree,
    registry: Sequence[PathSignature],
) -> Dict[str, Set[Provider]]:
    """App folder name -> providers whose metadata store is present in it."""

    prefix = IOS_APPLICATIONS + "/"
    folders: Set[str] = set()
    for path in tree.paths():
        if path.lower().startswith(prefix.lower()):
            name = path[len(prefix) :].split("/", 1)[0]
            if _APPROOT.match(name):
                folders.add(name)
    probes = [
        s
        for s in registry
        if s.identity.platform is Platform.IOS
        and s.role is SignatureRole.METADATA_STORE
        and "{APPROOT}" in s.pattern
    ]
    result: Dict[str, Set[Provider]] = {}
    for folder in sorted(folders):
        providers = {
            probe.identity.provider
            for probe in probes
            if tree.resolve(probe.pattern.replace("{APPROOT}", folder)) is not None
        }
        result[folder] = providers
    return result


def _infer_version(
    provider: Provider,
    platform: Platform,
    matched: Sequence[PathSignature],
    registry: Sequence[PathSignature],
) -> Tuple[str, Tuple[str, ...], bool]:
    """Returns (version, candidate versions, conflicting evidence)."""

    versions_by_key: Dict[Tuple[str, str], Set[str]] = defaultdict(set)
    all_versions: Set[str] = set()
    for signature in registry:
        identity = signature.identity
        if identity.provider is provider and identity.platform is platform:
            versions_by_key[signature.key].add(identity.app_version)
            all_versions.add(identity.app_version)
    compatible = set(all_versions)
    discriminated: Set[str] = set()
    for signature in matched:
        versions = versions_by_key.get(signature.key, set())
        compatible &= versions if versions else compatible
        if len(versions) == 1:
            discriminated |= versions
    if len(discriminated) == 1:
        return next(iter(discriminated)), tuple(sorted(discriminated)), False
    if len(all_versions) == 1 and not discriminated:
        only = next(iter(all_versions))
        return only, (only,), False
    return UNKNOWN_VERSION, tuple(sorted(discriminated or compatible)), len(discriminated) > 1


def scan(
    trees: Union[EvidenceTree, Sequence[EvidenceTree]],
    registry: Sequence[PathSignature],
) -> List[ArtifactHit]:
    if isinstance(trees, EvidenceTree):
        trees = [trees]

    raw: List[ArtifactHit] = []
    for tree in trees:
        paths = tree.paths()
        if not paths:
            continue
        parents = _parent_dirs(paths)
        folders = _ios_app_folders(tree, registry)
        for signature in registry:
            for resolved, bindings in _match_signature(tree, signature, paths, parents):
                ambiguous = False
                approot = bindings.get("APPROOT")
                if approot is not None:
                    providers = folders.get(approot, set())
                    if signature.identity.provider not in providers:
                        continue
                    ambiguous = len(providers) > 1
                raw.append(
                    ArtifactHit(
                        signature=signature,
                        resolved_path=resolved,
                        bindings=bindings,
                        tree=tree.label,
                        ambiguous=ambiguous,
                    )
                )

    groups: Dict[Tuple[Provider, Platform, str], List[ArtifactHit]] = defaultdict(list)
    for hit in raw:
        identity = hit.signature.identity
        groups[(identity.provider, identity.platform, hit.group)].append(hit)

    hits: List[ArtifactHit] = []
    for (provider, platform, group), members in sorted(groups.items()):
        version, candidates, conflicting = _infer_version(
            provider, platform, [m.signature for m in members], registry
        )
        identity = AppIdentity(provider, platform, version)
        seen: Set[Tuple[str, str, str, str]] = set()
        for hit in members:
            key = (hit.tree, hit.signature.role.value, hit.signature.pattern, hit.resolved_path)
            if key in seen:
                continue
            seen.add(key)
            hits.append(
                replace(
                    hit,
                    signature=replace(hit.signature, identity=identity),
                    ambiguous=hit.ambiguous or conflicting,
                    candidates=candidates,
                )
            )
        logger.info(
            "[SCAN] %s%s: %d hits", identity.label, f" ({group})" if group else "", len(members)
        )
    hits.sort(key=lambda h: (h.identity, h.group, h.tree, h.resolved_path, h.role.value))
    return hits


def group_hits(hits: Iterable[ArtifactHit]) -> Dict[Tuple[AppIdentity, str], List[ArtifactHit]]:
    grouped: Dict[Tuple[AppIdentity, str], List[ArtifactHit]] = defaultdict(list)
    for hit in hits:
        grouped[(hit.identity, hit.group)].append(hit)
    return dict(sorted(grouped.items()))


__all__ = ["ArtifactHit", "compile_pattern", "group_hits", "scan"]
