"""Deterministic synthetic evidence for every cataloged app and device state."""

from app.services.corpus.dataset import DatasetFile, Manipulation, builtin_dataset
from app.services.corpus.tables import (
    EXPECTED_UNION,
    MERGE_TRIPLES,
    cell_for_status,
    expected_column,
)
from app.services.corpus.writer import (
    GeneratedCorpus,
    Manifest,
    Scenario,
    generate,
    iter_scenarios,
    write_corpus,
)

__all__ = [
    "DatasetFile",
    "EXPECTED_UNION",
    "GeneratedCorpus",
    "MERGE_TRIPLES",
    "Manifest",
    "Manipulation",
    "Scenario",
    "builtin_dataset",
    "cell_for_status",
    "expected_column",
    "generate",
    "iter_scenarios",
    "write_corpus",
]
