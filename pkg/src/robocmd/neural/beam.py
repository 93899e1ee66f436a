"""Beam-search and greedy decoding.

Hypotheses are ranked by their sum of token log-probabilities divided by
generated length; expansion stops at the end token or the length cap. With
a width of 1 the search degenerates to greedy argmax decoding, token for
token.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..corpus import END_ID, START_ID


@dataclass(frozen=True)
class BeamHypothesis:
    tokens: list[str]
    score: float  # length-normalized log-probability
    log_prob: float
    finished: bool


def decode_beam(model, src_tokens, beam_width=None, max_len=None) -> list[BeamHypothesis]:
    """Ranked hypotheses for one command, best first."""
    cfg = model.cfg
    width = beam_width or cfg.beam_width
    limit = max_len or cfg.max_decode_len
    memory, attn_mask, state = model.start_state(list(src_tokens))

    # live beams: (token ids, cumulative logp, row index into state arrays)
    live = [([START_ID], 0.0)]
    h, c, ctx = state
    finished: list[tuple[list[int], float]] = []

    for _ in range(limit):
        prev_ids = [toks[-1] for toks, _ in live]
        logp, (h, c, ctx) = model.step(prev_ids, (h, c, ctx), memory, attn_mask)
        candidates = []
        for row, (toks, lp) in enumerate(live):
            row_logp = logp[row]
            # only the top `width` continuations of a hypothesis can survive
            top = np.argsort(-row_logp, kind="stable")[:width]
            for tok in top:
                candidates.append((lp + float(row_logp[tok]), row, int(tok)))
        candidates.sort(key=lambda item: (-item[0], item[1], item[2]))
        new_live = []
        keep_rows = []
        for total, row, tok in candidates[:width]:
            toks = live[row][0] + [tok]
            if tok == END_ID:
                finished.append((toks, total))
            else:
                new_live.append((toks, total))
                keep_rows.append(row)
        if not new_live or len(finished) >= width:
            live = []
            break
        live = new_live
        rows = np.array(keep_rows, dtype=np.intp)
        h, c, ctx = h[rows], c[rows], ctx[rows]

    results = []
    for toks, lp in finished:
        generated = len(toks) - 1  # excludes the start token
        results.append(
            BeamHypothesis(_to_tokens(model, toks), lp / max(generated, 1), lp, True)
        )
    for toks, lp in live:  # length cap hit without the end token
        generated = len(toks) - 1
        results.append(
            BeamHypothesis(_to_tokens(model, toks), lp / max(generated, 1), lp, False)
        )
    results.sort(key=lambda hyp: -hyp.score)
    return results[:width]


def _to_tokens(model, ids: list[int]) -> list[str]:
    body = [i for i in ids[1:] if i != END_ID]
    return model.tgt_vocab.decode(body)


def greedy_decode(model, src_tokens, max_len=None) -> list[str]:
    """Argmax chain until the end token or the length cap."""
    limit = max_len or model.cfg.max_decode_len
    memory, attn_mask, state = model.start_state(list(src_tokens))
    ids = [START_ID]
    for _ in range(limit):
        logp, state = model.step([ids[-1]], state, memory, attn_mask)
        tok = int(np.argmax(logp[0]))
        ids.append(tok)
        if tok == END_ID:
            break
    return _to_tokens(model, ids)
