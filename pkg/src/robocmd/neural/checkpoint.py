"""Model checkpoints: one ``.npz`` holding config, vocabularies, parameter
tensors, and the frozen embedding, tagged with a format version."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..corpus import Vocabulary
from .config import ModelConfig
from .model import Seq2SeqModel

FORMAT_VERSION = 1


def save_model(path: str | Path, model: Seq2SeqModel) -> None:
    meta = {
        "format_version": FORMAT_VERSION,
        "config": json.loads(model.cfg.to_json()),
        "src_vocab": list(model.src_vocab.id_to_token),
        "tgt_vocab": list(model.tgt_vocab.id_to_token),
        "dtype": model.dtype.name,
        "has_frozen": model.frozen is not None,
    }
    arrays = {f"param/{k}": v for k, v in model.params.items()}
    if model.frozen is not None:
        arrays["frozen"] = model.frozen
    np.savez_compressed(path, meta=json.dumps(meta, sort_keys=True), **arrays)


def load_model(path: str | Path) -> Seq2SeqModel:
    with np.load(path, allow_pickle=False) as data:
        meta = json.loads(str(data["meta"]))
        if meta.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta.get('format_version')}")
        cfg = ModelConfig(**meta["config"])
        src_vocab = Vocabulary(tuple(meta["src_vocab"]))
        tgt_vocab = Vocabulary(tuple(meta["tgt_vocab"]))
        frozen = data["frozen"] if meta["has_frozen"] else None
        model = Seq2SeqModel(cfg, src_vocab, tgt_vocab, frozen, dtype=np.dtype(meta["dtype"]))
        for key in data.files:
            if key.startswith("param/"):
                model.params[key[len("param/") :]][...] = data[key]
    return model
