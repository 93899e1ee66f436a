"""Training loop: teacher-forced cross-entropy, Adam, per-epoch validation by
beam decoding scored with exact match, early stopping with best-weight
restore. Deterministic for a fixed config seed."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ..corpus import END_ID, PAD_ID, START_ID, Vocabulary
from ..grammar import CorpusPair
from ..logic import print_lf
from .adam import Adam
from .beam import decode_beam
from .config import ModelConfig
from .model import EmptyTrainSet, NaNLoss, Seq2SeqModel

log = logging.getLogger(__name__)


@dataclass
class TrainReport:
    train_loss: list[float] = field(default_factory=list)
    train_token_acc: list[float] = field(default_factory=list)
    validation_exact: list[float] = field(default_factory=list)
    best_epoch: int = 0  # 1-based
    stopped_early: bool = False
    wall_time: float = 0.0
    config_json: str = ""

    def to_dict(self) -> dict:
        return {
            "train_loss": self.train_loss,
            "train_token_acc": self.train_token_acc,
            "validation_exact": self.validation_exact,
            "best_epoch": self.best_epoch,
            "stopped_early": self.stopped_early,
            "wall_time": self.wall_time,
            "config": self.config_json,
        }


def _encode_pairs(pairs, src_vocab: Vocabulary, tgt_vocab: Vocabulary):
    encoded = []
    for pair in pairs:
        src = src_vocab.encode(pair.command)
        tgt = tgt_vocab.encode(print_lf(pair.lf))
        encoded.append((src, [START_ID] + tgt + [END_ID]))
    return encoded


def _make_batch(items, dtype):
    srcs = [src for src, _ in items]
    tgts = [tgt for _, tgt in items]
    s_len = max(len(s) for s in srcs)
    t_len = max(len(t) for t in tgts) - 1
    batch = len(items)
    src_ids = np.full((batch, s_len), PAD_ID, dtype=np.intp)
    src_mask = np.zeros((batch, s_len), dtype=dtype)
    tgt_in = np.full((batch, t_len), PAD_ID, dtype=np.intp)
    tgt_out = np.full((batch, t_len), PAD_ID, dtype=np.intp)
    tgt_mask = np.zeros((batch, t_len), dtype=dtype)
    for row, (src, tgt) in enumerate(items):
        src_ids[row, : len(src)] = src
        src_mask[row, : len(src)] = 1.0
        steps = len(tgt) - 1
        tgt_in[row, :steps] = tgt[:-1]
        tgt_out[row, :steps] = tgt[1:]
        tgt_mask[row, :steps] = 1.0
    return {
        "src_ids": src_ids,
        "src_mask": src_mask,
        "tgt_in": tgt_in,
        "tgt_out": tgt_out,
        "tgt_mask": tgt_mask,
    }


def validation_exact_match(model: Seq2SeqModel, pairs, beam_width=None) -> float:
    """Fraction of pairs whose top beam hypothesis equals the gold canonical
    token sequence."""
    if not pairs:
        return 0.0
    hits = 0
    for pair in pairs:
        hyps = decode_beam(model, list(pair.command), beam_width=beam_width)
        if hyps and hyps[0].tokens == print_lf(pair.lf):
            hits += 1
    return hits / len(pairs)


def train(
    model: Seq2SeqModel,
    train_pairs: list[CorpusPair],
    validation_pairs: list[CorpusPair],
    cfg: ModelConfig | None = None,
) -> tuple[Seq2SeqModel, TrainReport]:
    """Train in place and return the model restored to its best-validation
    weights, plus the per-epoch report."""
    cfg = cfg or model.cfg
    if not train_pairs:
        raise EmptyTrainSet("no training pairs")
    longest_target = max(len(print_lf(p.lf)) for p in train_pairs)
    if cfg.max_decode_len < longest_target + 2:
        raise ValueError(
            f"max_decode_len {cfg.max_decode_len} < longest training target "
            f"{longest_target} + 2"
        )

    encoded = _encode_pairs(train_pairs, model.src_vocab, model.tgt_vocab)
    optimizer = Adam(
        model.params, lr=cfg.learning_rate, betas=cfg.adam_betas, eps=cfg.adam_eps
    )
    shuffle_rng = np.random.default_rng(cfg.seed + 1)
    report = TrainReport(config_json=cfg.to_json())
    best_acc = -1.0
    best_params = model.copy_params()
    start_time = time.time()

    for epoch in range(1, cfg.max_epochs + 1):
        order = shuffle_rng.permutation(len(encoded))
        losses = []
        accs = []
        for lo in range(0, len(order), cfg.batch_size):
            rows = order[lo : lo + cfg.batch_size]
            batch = _make_batch([encoded[r] for r in rows], model.dtype)
            loss, grads, aux = model.loss_and_grads(batch, training=True)
            if not np.isfinite(loss):
                raise NaNLoss(
                    f"non-finite loss at epoch {epoch}",
                    {"epoch": epoch, "batch_start": int(lo), "loss": loss},
                )
            optimizer.step(grads)
            losses.append(loss)
            accs.append(aux["token_acc"])
        val_acc = validation_exact_match(model, validation_pairs, cfg.beam_width)
        report.train_loss.append(float(np.mean(losses)))
        report.train_token_acc.append(float(np.mean(accs)))
        report.validation_exact.append(val_acc)
        if val_acc > best_acc:
            best_acc = val_acc
            report.best_epoch = epoch
            best_params = model.copy_params()
        log.debug(
            "epoch %d loss %.4f token-acc %.3f val %.3f",
            epoch, report.train_loss[-1], report.train_token_acc[-1], val_acc,
        )
        if epoch - report.best_epoch >= cfg.patience:
            report.stopped_early = True
            break

    model.set_params(best_params)
    report.wall_time = time.time() - start_time
    return model, report
