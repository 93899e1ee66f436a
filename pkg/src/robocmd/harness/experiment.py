"""Experiment engine: one (train-source, test-source, split, model) cell at a
time, or the whole results matrix from a declarative config.

Training sources may combine the generated and paraphrased datasets; under a
logical split the two are split synchronously so combining them leaks no
test forms into training (checked, not assumed). Every cell is deterministic
given its seed, and matrix runs cache per-cell results keyed by a config
hash so interrupted runs resume.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..baselines import KnnIndex, knn_predict, oracle_predict
from ..corpus import (
    Dataset,
    TEST,
    TRAIN,
    VALIDATION,
    build_vocab,
    read_jsonl,
    split_by_command,
    split_by_logical_form,
)
from ..grammar import SynchronousGrammar, enumerate_anonymized, load_grammar_file
from ..logic import PredicateRegistry, lf_to_str, print_lf
from ..neural import ModelConfig, Seq2SeqModel, decode_beam, load_pretrained_vectors, train
from ..ontology import Ontology
from .. import data as bundled

log = logging.getLogger(__name__)

GEN, PARA, GEN_PLUS_PARA = "gen", "para", "gen+para"
COMMAND, LOGICAL = "command", "logical"


class LeakError(AssertionError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    train_source: str  # gen | para | gen+para
    test_source: str  # gen | para
    split: str  # command | logical
    model: str  # oracle | knn | seq2seq
    seed: int = 0
    model_config: Optional[ModelConfig] = None
    vectors_path: Optional[str] = None
    name: str = ""

    def __post_init__(self):
        if self.train_source not in (GEN, PARA, GEN_PLUS_PARA):
            raise ValueError(f"bad train_source {self.train_source!r}")
        if self.test_source not in (GEN, PARA):
            raise ValueError(f"bad test_source {self.test_source!r}")
        if self.split not in (COMMAND, LOGICAL):
            raise ValueError(f"bad split {self.split!r}")
        if self.model not in ("oracle", "knn", "seq2seq"):
            raise ValueError(f"bad model {self.model!r}")

    @property
    def cell_key(self) -> str:
        return f"{self.train_source}->{self.test_source}/{self.split}"


def _split_datasets(spec: ExperimentSpec, gen: Dataset, para: Dataset):
    if spec.split == COMMAND:
        return split_by_command(gen, seed=spec.seed), split_by_command(para, seed=spec.seed)
    return split_by_logical_form(gen, para, seed=spec.seed)


def leak_check(train_pairs, test_pairs) -> None:
    """No logical form from the test pool may appear in training."""
    train_forms = {p.lf_str for p in train_pairs}
    leaked = {p.lf_str for p in test_pairs} & train_forms
    if leaked:
        raise LeakError(f"{len(leaked)} test logical form(s) leaked into training")


def assemble(spec: ExperimentSpec, gen: Dataset, para: Dataset):
    """Train/validation/test pair lists for a spec, with the logical-split
    leak check applied before any training happens."""
    gen_split, para_split = _split_datasets(spec, gen, para)
    by_name = {GEN: gen_split, PARA: para_split}
    sources = [GEN, PARA] if spec.train_source == GEN_PLUS_PARA else [spec.train_source]
    train_pairs = [p for s in sources for p in by_name[s].subset(TRAIN)]
    val_pairs = [p for s in sources for p in by_name[s].subset(VALIDATION)]
    test_pairs = by_name[spec.test_source].subset(TEST)
    if spec.split == LOGICAL:
        leak_check(train_pairs, test_pairs)
    return train_pairs, val_pairs, test_pairs


def run_experiment(
    spec: ExperimentSpec,
    gen: Dataset,
    para: Dataset,
    grammar: SynchronousGrammar,
    ont: Ontology,
) -> tuple[float, dict]:
    """Exact-match accuracy (percentage) of the spec's model on its test set,
    plus details: inputs, predictions, golds, and the train report if any.
    Unparseable or failed predictions count as wrong, never skipped."""
    train_pairs, val_pairs, test_pairs = assemble(spec, gen, para)
    if not test_pairs:
        raise ValueError("empty test set")
    golds = [p.lf_str for p in test_pairs]
    inputs = [p.command_str for p in test_pairs]
    details: dict = {"inputs": inputs, "golds": golds, "n_train": len(train_pairs)}

    if spec.model == "oracle":
        predictions = []
        for pair in test_pairs:
            lf = oracle_predict(grammar, pair.command, ont)
            predictions.append("" if lf is None else lf_to_str(lf))
    elif spec.model == "knn":
        index = KnnIndex.build(train_pairs + val_pairs, k=1)
        predictions = [lf_to_str(knn_predict(index, p.command)) for p in test_pairs]
    else:
        cfg = spec.model_config or ModelConfig()
        cfg = cfg.replace(seed=spec.seed)
        src_vocab, tgt_vocab = build_vocab(train_pairs)
        frozen = None
        if spec.vectors_path:
            frozen = load_pretrained_vectors(spec.vectors_path, src_vocab)
        model = Seq2SeqModel(cfg, src_vocab, tgt_vocab, frozen)
        model, report = train(model, train_pairs, val_pairs, cfg)
        details["train_report"] = report.to_dict()
        predictions = []
        for pair in test_pairs:
            hyps = decode_beam(model, list(pair.command))
            predictions.append(" ".join(hyps[0].tokens) if hyps else "")

    details["predictions"] = predictions
    correct = sum(1 for pred, gold in zip(predictions, golds) if pred == gold)
    return 100.0 * correct / len(test_pairs), details


# -- results matrix ----------------------------------------------------------


@dataclass
class ResultsTable:
    """Rows per model variant, one cell per (regime, split); cells hold
    exact-match accuracy percentages or an error marker."""

    cells: dict[str, dict[str, float | None]] = field(default_factory=dict)
    errors: dict[str, dict[str, str]] = field(default_factory=dict)

    def set(self, model: str, cell_key: str, accuracy: float) -> None:
        self.cells.setdefault(model, {})[cell_key] = accuracy

    def set_error(self, model: str, cell_key: str, message: str) -> None:
        self.cells.setdefault(model, {})[cell_key] = None
        self.errors.setdefault(model, {})[cell_key] = message

    def column_keys(self) -> list[str]:
        keys: list[str] = []
        for row in self.cells.values():
            for key in row:
                if key not in keys:
                    keys.append(key)
        return keys

    def render(self) -> str:
        columns = self.column_keys()
        width = max([len(c) for c in columns] + [7]) + 2
        name_width = max([len(m) for m in self.cells] + [5]) + 2
        lines = ["".ljust(name_width) + "".join(c.rjust(width) for c in columns)]
        for model, row in self.cells.items():
            cells = []
            for key in columns:
                value = row.get(key)
                cells.append(("ERR" if value is None else f"{value:.1f}").rjust(width))
            lines.append(model.ljust(name_width) + "".join(cells))
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps({"cells": self.cells, "errors": self.errors}, sort_keys=True, indent=2)


def default_matrix_config() -> dict:
    return {
        "seed": 0,
        "grammar": None,  # bundled
        "ontology": None,
        "predicates": None,
        "generated": None,  # None: enumerate the grammar
        "paraphrased": None,  # None: bundled paraphrase fixture
        "regimes": [[GEN, GEN], [GEN, PARA], [PARA, PARA], [GEN_PLUS_PARA, PARA]],
        "splits": [COMMAND, LOGICAL],
        "models": [{"name": "grammar-oracle", "type": "oracle"}, {"name": "knn", "type": "knn"}],
    }


def _load_matrix_inputs(config: dict):
    registry = PredicateRegistry.load(config.get("predicates") or bundled.data_path(bundled.PREDICATES))
    grammar = load_grammar_file(config.get("grammar") or bundled.data_path(bundled.GRAMMAR), registry)
    ont = Ontology.load(config.get("ontology") or bundled.data_path(bundled.ONTOLOGY))
    if config.get("generated"):
        gen = read_jsonl(config["generated"], registry, origin="generated")
    else:
        gen = Dataset(tuple(enumerate_anonymized(grammar)), "generated")
    para_path = config.get("paraphrased") or bundled.data_path(bundled.PARAPHRASES)
    para = read_jsonl(para_path, registry, origin="paraphrased")
    return registry, grammar, ont, gen, para


def _cell_hash(model_entry: dict, train_source: str, test_source: str, split: str, seed: int) -> str:
    payload = json.dumps(
        {"model": model_entry, "train": train_source, "test": test_source,
         "split": split, "seed": seed},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def reproduce_matrix(config: dict, out_dir: str | Path | None = None) -> tuple[ResultsTable, dict]:
    """Run every configured (model x regime x split) cell. Results are cached
    per cell under ``out_dir/cells`` and reused on rerun; a failed cell is
    recorded and the rest proceed."""
    merged = default_matrix_config()
    merged.update(config)
    config = merged
    registry, grammar, ont, gen, para = _load_matrix_inputs(config)
    table = ResultsTable()
    manifest: dict = {
        "seed": config["seed"],
        "config_hash": hashlib.sha256(
            json.dumps(config, sort_keys=True, default=str).encode()
        ).hexdigest()[:16],
        "cells": [],
    }
    cells_dir = None
    if out_dir is not None:
        cells_dir = Path(out_dir) / "cells"
        cells_dir.mkdir(parents=True, exist_ok=True)

    for model_entry in config["models"]:
        model_name = model_entry["name"]
        for train_source, test_source in config["regimes"]:
            for split in config["splits"]:
                cell_key = f"{train_source}->{test_source}/{split}"
                cell_id = _cell_hash(model_entry, train_source, test_source, split, config["seed"])
                cached = cells_dir / f"{cell_id}.json" if cells_dir else None
                entry = {"model": model_name, "cell": cell_key, "id": cell_id}
                if cached is not None and cached.exists():
                    result = json.loads(cached.read_text())
                    table.set(model_name, cell_key, result["accuracy"])
                    entry.update(result, cached=True)
                    manifest["cells"].append(entry)
                    continue
                model_cfg = None
                if model_entry.get("config"):
                    model_cfg = ModelConfig(**model_entry["config"])
                vectors = model_entry.get("vectors")
                if vectors == "bundled":
                    vectors = str(bundled.data_path(bundled.VECTORS))
                spec = ExperimentSpec(
                    train_source=train_source,
                    test_source=test_source,
                    split=split,
                    model=model_entry["type"],
                    seed=config["seed"],
                    model_config=model_cfg,
                    vectors_path=vectors,
                    name=model_name,
                )
                started = time.time()
                try:
                    accuracy, _ = run_experiment(spec, gen, para, grammar, ont)
                except Exception as exc:  # cell failures must not sink the run
                    log.exception("cell %s / %s failed", model_name, cell_key)
                    table.set_error(model_name, cell_key, str(exc))
                    entry.update(error=str(exc), wall_time=time.time() - started)
                    manifest["cells"].append(entry)
                    continue
                wall = time.time() - started
                table.set(model_name, cell_key, accuracy)
                result = {"accuracy": accuracy, "wall_time": wall, "seed": config["seed"]}
                if cached is not None:
                    cached.write_text(json.dumps(result, sort_keys=True))
                entry.update(result, cached=False)
                manifest["cells"].append(entry)

    if out_dir is not None:
        out = Path(out_dir)
        (out / "results.txt").write_text(table.render() + "\n")
        (out / "results.json").write_text(table.to_json() + "\n")
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")
    return table, manifest
