"""String and set distances: Levenshtein (character), Jaccard (word), and the
paraphrase quality gate built on both.

The gate flags a paraphrase that is nearly identical to its source (too few
character edits AND too much word overlap) or that shares almost no words
with it — the latter almost always means information was dropped.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import kernels


class Verdict(str, Enum):
    TOO_SIMILAR = "TooSimilar"
    TOO_DIFFERENT = "TooDifferent"
    ACCEPTABLE = "Acceptable"


@dataclass(frozen=True)
class Thresholds:
    """Defaults are conservative and configurable; TooSimilar requires both
    low character distance and low word distance."""

    levenshtein_low: int = 5
    jaccard_low: float = 0.2
    jaccard_high: float = 0.9


@dataclass(frozen=True)
class ParaphraseJudgment:
    levenshtein: int
    jaccard_distance: float
    verdict: Verdict


def _char_ids(text: str) -> np.ndarray:
    return np.frombuffer(text.encode("utf-32-le"), dtype=np.int32)


def levenshtein(a: Sequence, b: Sequence) -> int:
    """Minimum insert/delete/substitute edits. Strings are compared by
    character; other sequences element-wise."""
    if isinstance(a, str) != isinstance(b, str):
        raise TypeError("both arguments must be strings, or both sequences")
    if isinstance(a, str):
        ids_a = _char_ids(a)
        ids_b = _char_ids(b)
    else:
        table: dict = {}
        ids_a = np.empty(len(a), dtype=np.int32)
        for k, item in enumerate(a):
            ids_a[k] = table.setdefault(item, len(table))
        ids_b = np.empty(len(b), dtype=np.int32)
        for k, item in enumerate(b):
            ids_b[k] = table.setdefault(item, len(table))
    return int(kernels.levenshtein_ids(ids_a, ids_b))


def jaccard_distance(a: Iterable, b: Iterable) -> float:
    """1 - |a∩b| / |a∪b| over sets; two empty sets have distance 0."""
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        return 0.0
    return 1.0 - len(sa & sb) / len(union)


def word_set(text: str) -> set[str]:
    """Lowercase, whitespace-split, trailing punctuation stripped."""
    words = set()
    for tok in text.lower().split():
        tok = tok.rstrip(string.punctuation)
        if tok:
            words.add(tok)
    return words


def judge_paraphrase(
    original: str, paraphrase: str, thresholds: Thresholds = Thresholds()
) -> ParaphraseJudgment:
    if not original or not paraphrase:
        raise ValueError("both texts must be nonempty")
    lev = levenshtein(original, paraphrase)
    jac = jaccard_distance(word_set(original), word_set(paraphrase))
    if lev < thresholds.levenshtein_low and jac < thresholds.jaccard_low:
        verdict = Verdict.TOO_SIMILAR
    elif jac > thresholds.jaccard_high:
        verdict = Verdict.TOO_DIFFERENT
    else:
        verdict = Verdict.ACCEPTABLE
    return ParaphraseJudgment(lev, jac, verdict)
