from __future__ import annotations

import logging
import random
from functools import lru_cache
from typing import List, Optional

from app.config import Settings
from app.evidence import AppSnapshot, Provider, RecoveryStatus, strongest
from app.main import run_analysis
from app.services.corpus import Scenario, builtin_dataset, cell_for_status, generate
from app.services.report import Report

SETTINGS = Settings(
    registry_path=None,
    log_level=logging.INFO,
    case_fallback=True,
    carve_max_bytes=None,
    box_alternate_host="mobile-api.box.com",
)

# 0x80..0xEF: no ASCII, no 0xFF, so no carve header can start inside filler
_FILLER = bytes(0x80 + i % 0x70 for i in range(256))


def filler(rng: random.Random, count: int) -> bytes:
    return rng.randbytes(count).translate(_FILLER)


@lru_cache(maxsize=None)
def analyze_scenario(scenario: Scenario) -> Report:
    corpus = generate(scenario)
    return run_analysis(corpus.evidence_trees(), corpus.raw_image(), SETTINGS)


def snapshot_for(report: Report, provider: Provider) -> AppSnapshot:
    found = [s for s in report.snapshots if s.identity.provider is provider]
    assert len(found) == 1, f"expected one {provider.value} snapshot, got {len(found)}"
    return found[0]


def file_status(snapshot: AppSnapshot, name: str, md5: str) -> RecoveryStatus:
    """Strongest status over entries named like the file or holding its exact bytes."""

    statuses = [
        item.status
        for item in snapshot.entries
        if item.entry.name == name or any(obj.md5 == md5 for obj in item.objects)
    ]
    return strongest(statuses)


def observed_column(snapshot: AppSnapshot, seed: int = 0) -> str:
    return "".join(
        cell_for_status(file_status(snapshot, item.name, item.md5))
        for item in builtin_dataset(seed)
    )


def recovered_names(snapshot: AppSnapshot) -> List[str]:
    return sorted(
        item.name
        for item in builtin_dataset()
        if file_status(snapshot, item.name, item.md5).recovered
    )


def entry_status(snapshot: AppSnapshot, name: str) -> Optional[RecoveryStatus]:
    item = snapshot.entry(name)
    return item.status if item is not None else None
