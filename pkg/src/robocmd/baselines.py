"""Non-neural reference parsers.

The KNN baseline predicts the logical form of the Jaccard-nearest command in
its index; it can only ever emit forms it has seen, so it scores zero on any
logical split by construction. The grammar oracle chart-parses the input
against the generation grammar and returns the paired annotation; it is
exact on generated data and fails on anything outside the grammar.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .grammar import CorpusPair, SynchronousGrammar, chart_parse
from .logic import LogicalForm, lf_to_str
from .metrics import jaccard_distance
from .ontology import Ontology


class EmptyIndex(ValueError):
    pass


@dataclass(frozen=True)
class KnnEntry:
    token_set: frozenset[str]
    lf: LogicalForm
    source_index: int


@dataclass(frozen=True)
class KnnIndex:
    entries: tuple[KnnEntry, ...]
    k: int = 1

    @classmethod
    def build(cls, pairs: Sequence[CorpusPair], k: int = 1) -> "KnnIndex":
        """Index over training plus validation pairs."""
        entries = tuple(
            KnnEntry(frozenset(p.command), p.lf, idx) for idx, p in enumerate(pairs)
        )
        return cls(entries, k)


def knn_predict(index: KnnIndex, command: Sequence[str]) -> LogicalForm:
    """Logical form of the nearest entry by Jaccard distance over command
    token sets. Ties break toward the smallest source index; for k > 1 the
    neighbors vote by canonical form, ties again by smallest index."""
    if not index.entries:
        raise EmptyIndex("knn index is empty")
    query = frozenset(t.lower() for t in command)
    ranked = sorted(
        index.entries,
        key=lambda e: (jaccard_distance(query, e.token_set), e.source_index),
    )
    if index.k == 1:
        return ranked[0].lf
    neighbors = ranked[: index.k]
    votes = Counter(lf_to_str(e.lf) for e in neighbors)
    top = max(votes.values())
    for entry in neighbors:  # first neighbor among the winning forms
        if votes[lf_to_str(entry.lf)] == top:
            return entry.lf
    raise AssertionError("unreachable")


def oracle_predict(
    grammar: SynchronousGrammar,
    command: Sequence[str],
    ont: Ontology | None = None,
) -> Optional[LogicalForm]:
    """Chart-parse the command with the generation grammar; None means the
    command is outside the grammar and is scored incorrect."""
    if not command:
        return None
    return chart_parse(grammar, command, ont)
