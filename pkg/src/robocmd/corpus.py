"""Corpus containers, the two split protocols, and vocabulary construction.

Split assignment orders items by a seeded hash and cuts at the exact ratio
boundaries, so results are deterministic for a given seed and stable under
small corpus changes. The command split keeps string-identical commands in
one part; the logical split partitions distinct logical forms and tags each
pair by its form's part, simultaneously in the generated and paraphrased
datasets so the two can be combined without leakage.
"""

from __future__ import annotations

import hashlib
import json
import logging
from collections import Counter, OrderedDict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .grammar import CorpusPair
from .logic import PredicateRegistry, parse_lf_str, print_lf

log = logging.getLogger(__name__)

TRAIN, VALIDATION, TEST, UNASSIGNED = "train", "validation", "test", "unassigned"
SPLIT_NAMES = (TRAIN, VALIDATION, TEST)
DEFAULT_RATIOS = (0.7, 0.1, 0.2)


class TooFewPairs(ValueError):
    pass


class TooFewForms(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    pairs: tuple[CorpusPair, ...]
    origin: str  # "generated" | "paraphrased"
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        if self.tags and len(self.tags) != len(self.pairs):
            raise ValueError("tags must parallel pairs")

    def tag_of(self, index: int) -> str:
        return self.tags[index] if self.tags else UNASSIGNED

    def subset(self, tag: str) -> list[CorpusPair]:
        return [p for p, t in zip(self.pairs, self.tags) if t == tag]

    def counts(self) -> dict[str, int]:
        return dict(Counter(self.tags)) if self.tags else {UNASSIGNED: len(self.pairs)}


def _hash_order(seed: int, keys: Iterable[str]) -> list[str]:
    def key_fn(key: str) -> str:
        return hashlib.blake2b(f"{seed}:{key}".encode("utf-8"), digest_size=16).hexdigest()

    return sorted(keys, key=key_fn)


def _check_ratios(ratios: Sequence[float]) -> None:
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must be three positive numbers summing to 1, got {ratios}")


def split_by_command(
    ds: Dataset, ratios: Sequence[float] = DEFAULT_RATIOS, seed: int = 0
) -> Dataset:
    """Partition pairs so no command string straddles splits. Boundaries fall
    at floor(r_train*N) and floor(r_val*N) pairs; a duplicate-command group is
    assigned as a block to the first unfilled part."""
    _check_ratios(ratios)
    n = len(ds.pairs)
    if n < 10:
        raise TooFewPairs(f"need at least 10 pairs, got {n}")
    groups: OrderedDict[str, list[int]] = OrderedDict()
    for idx, pair in enumerate(ds.pairs):
        groups.setdefault(pair.command_str, []).append(idx)
    n_train = int(ratios[0] * n)
    n_val = int(ratios[1] * n)
    tags = [TEST] * n
    assigned_train = assigned_val = 0
    for command in _hash_order(seed, groups):
        indices = groups[command]
        if assigned_train < n_train:
            for i in indices:
                tags[i] = TRAIN
            assigned_train += len(indices)
        elif assigned_val < n_val:
            for i in indices:
                tags[i] = VALIDATION
            assigned_val += len(indices)
    return replace(ds, tags=tuple(tags))


def split_by_logical_form(
    gen: Dataset,
    para: Dataset,
    ratios: Sequence[float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> tuple[Dataset, Dataset]:
    """Partition the pool of distinct logical forms and tag every pair by its
    form's part, in both datasets at once. Proportions approximate the ratios
    over combined pair counts."""
    _check_ratios(ratios)
    gen_counts = Counter(p.lf_str for p in gen.pairs)
    para_counts = Counter(p.lf_str for p in para.pairs)
    missing = [lf for lf in para_counts if lf not in gen_counts]
    if missing:
        log.warning(
            "%d paraphrase logical form(s) never occur in the generated data", len(missing)
        )
    forms = set(gen_counts) | set(para_counts)
    if len(forms) < 10:
        raise TooFewForms(f"need at least 10 distinct logical forms, got {len(forms)}")
    total = len(gen.pairs) + len(para.pairs)
    n_train = int(ratios[0] * total)
    n_val = int(ratios[1] * total)
    assignment: dict[str, str] = {}
    assigned_train = assigned_val = 0
    for lf in _hash_order(seed, forms):
        weight = gen_counts[lf] + para_counts[lf]
        if assigned_train < n_train:
            assignment[lf] = TRAIN
            assigned_train += weight
        elif assigned_val < n_val:
            assignment[lf] = VALIDATION
            assigned_val += weight
        else:
            assignment[lf] = TEST

    def tag(ds: Dataset) -> Dataset:
        return replace(ds, tags=tuple(assignment[p.lf_str] for p in ds.pairs))

    return tag(gen), tag(para)


# -- vocabulary --------------------------------------------------------------

PAD, START, END, UNK = "<pad>", "<s>", "</s>", "<unk>"
RESERVED = (PAD, START, END, UNK)
PAD_ID, START_ID, END_ID, UNK_ID = 0, 1, 2, 3


@dataclass(frozen=True)
class Vocabulary:
    id_to_token: tuple[str, ...]
    token_to_id: dict[str, int] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.token_to_id:
            object.__setattr__(
                self, "token_to_id", {t: i for i, t in enumerate(self.id_to_token)}
            )

    def __len__(self) -> int:
        return len(self.id_to_token)

    def encode(self, tokens: Sequence[str]) -> list[int]:
        return [self.token_to_id.get(t, UNK_ID) for t in tokens]

    def decode(self, ids: Sequence[int]) -> list[str]:
        return [self.id_to_token[i] for i in ids]

    @classmethod
    def build(cls, token_seqs: Iterable[Sequence[str]], min_count: int = 1) -> "Vocabulary":
        counts: Counter[str] = Counter()
        for seq in token_seqs:
            counts.update(seq)
        kept = sorted(
            (t for t, c in counts.items() if c >= min_count and t not in RESERVED),
            key=lambda t: (-counts[t], t),
        )
        return cls(tuple(RESERVED) + tuple(kept))

    def to_json(self) -> str:
        return json.dumps(list(self.id_to_token))

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        return cls(tuple(json.loads(text)))


def build_vocab(
    train_pairs: Sequence[CorpusPair], min_count: int = 1
) -> tuple[Vocabulary, Vocabulary]:
    """Source vocabulary over command tokens and target vocabulary over
    logical-form tokens, from training pairs only."""
    source = Vocabulary.build((p.command for p in train_pairs), min_count)
    target = Vocabulary.build((print_lf(p.lf) for p in train_pairs), min_count)
    return source, target


# -- JSON-lines corpus files --------------------------------------------------


def write_jsonl(path: str | Path, ds: Dataset) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for idx, pair in enumerate(ds.pairs):
            row = {
                "command": pair.command_str,
                "lf": pair.lf_str,
                "category": pair.category,
                "anonymized": pair.anonymized,
            }
            if ds.tags:
                row["split"] = ds.tags[idx]
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def read_jsonl(path: str | Path, registry: PredicateRegistry, origin: str) -> Dataset:
    pairs: list[CorpusPair] = []
    tags: list[str] = []
    tagged = False
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            pairs.append(
                CorpusPair(
                    tuple(row["command"].split()),
                    parse_lf_str(row["lf"], registry),
                    int(row.get("category", 0)),
                    bool(row.get("anonymized", False)),
                )
            )
            if "split" in row:
                tagged = True
                tags.append(row["split"])
            else:
                tags.append(UNASSIGNED)
    return Dataset(tuple(pairs), origin, tuple(tags) if tagged else ())
