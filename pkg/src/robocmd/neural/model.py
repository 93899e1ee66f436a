"""Sequence-to-sequence parser: dual-channel embeddings, bidirectional LSTM
encoder, LSTM decoder with input feeding and bilinear attention, softmax
output layer. Forward and backward passes are written against numpy plus the
fused gate kernels; no autodiff framework is involved, which is why
``gradcheck`` exists.

Shapes (batch B, source length S, target steps T):

* source embedding: [frozen channel | tunable channel], (B, S, F+E)
* encoder states: forward/backward concatenation, (B, S, 2*He)
* bridge: tanh-linear of the two final states -> decoder (h0, c0)
* decoder input at step t: [embedding of previous target token | previous
  attention context], (B, E + 2*He)
* attention: score_i = h_dec^T W enc_i, softmax over unmasked positions
* output layer: logits from [h_dec | context]

Padded source positions carry the previous LSTM state through and are masked
out of attention; padded target positions are masked out of the loss.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..corpus import END_ID, PAD_ID, START_ID, Vocabulary
from .config import ModelConfig

INIT_SCALE = 0.08
NEG_BIG = -np.inf


class EmptyTrainSet(ValueError):
    pass


class NaNLoss(RuntimeError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def bilinear_attention(decoder_state, encoder_states, weight, mask=None):
    """Context vector and weights for one decoder state.

    ``decoder_state`` (Hd,), ``encoder_states`` (S, 2He), ``weight``
    (Hd, 2He). Scores are decoder_state^T W enc_i; weights softmax over
    positions where ``mask`` is true (all, when omitted).
    """
    scores = encoder_states @ (decoder_state @ weight)
    if mask is not None:
        scores = np.where(np.asarray(mask, dtype=bool), scores, NEG_BIG)
    weights = kernels.softmax_rows(scores[None, :])[0]
    context = weights @ encoder_states
    return context, weights


class Seq2SeqModel:
    """Trainable parameters plus vocabularies. All state is plain arrays; a
    trained model is safe to share between threads for decoding."""

    def __init__(
        self,
        cfg: ModelConfig,
        src_vocab: Vocabulary,
        tgt_vocab: Vocabulary,
        frozen_embedding: np.ndarray | None = None,
        dtype=np.float32,
    ):
        if frozen_embedding is not None:
            frozen_embedding = np.asarray(frozen_embedding, dtype=dtype)
            if frozen_embedding.shape[0] != len(src_vocab):
                raise ValueError("frozen embedding rows must match source vocabulary")
            cfg = cfg.replace(frozen_embed_dim=int(frozen_embedding.shape[1]))
        else:
            cfg = cfg.replace(frozen_embed_dim=0)
        self.cfg = cfg
        self.src_vocab = src_vocab
        self.tgt_vocab = tgt_vocab
        self.dtype = np.dtype(dtype)
        self.frozen = frozen_embedding
        self.rng = np.random.default_rng(cfg.seed)
        self.params = self._init_params()

    # -- parameters -------------------------------------------------------

    def _init_params(self) -> dict[str, np.ndarray]:
        cfg = self.cfg
        enc_in = cfg.tunable_embed_dim + cfg.frozen_embed_dim
        dec_in = cfg.tunable_embed_dim + 2 * cfg.encoder_hidden
        he, hd = cfg.encoder_hidden, cfg.decoder_hidden

        def uniform(*shape):
            return self.rng.uniform(-INIT_SCALE, INIT_SCALE, shape).astype(self.dtype)

        params = {
            "src_embed": uniform(len(self.src_vocab), cfg.tunable_embed_dim),
            "tgt_embed": uniform(len(self.tgt_vocab), cfg.tunable_embed_dim),
            "enc_fwd_Wx": uniform(enc_in, 4 * he),
            "enc_fwd_Wh": uniform(he, 4 * he),
            "enc_fwd_b": uniform(4 * he),
            "enc_bwd_Wx": uniform(enc_in, 4 * he),
            "enc_bwd_Wh": uniform(he, 4 * he),
            "enc_bwd_b": uniform(4 * he),
            "bridge_W": uniform(2 * he, 2 * hd),
            "bridge_b": uniform(2 * hd),
            "dec_Wx": uniform(dec_in, 4 * hd),
            "dec_Wh": uniform(hd, 4 * hd),
            "dec_b": uniform(4 * hd),
            "attn_W": uniform(hd, 2 * he),
            "out_W": uniform(hd + 2 * he, len(self.tgt_vocab)),
            "out_b": uniform(len(self.tgt_vocab)),
        }
        for gate_bias in ("enc_fwd_b", "enc_bwd_b", "dec_b"):
            hidden = params[gate_bias].shape[0] // 4
            params[gate_bias][hidden : 2 * hidden] += 1.0  # forget-gate bias
        return params

    def copy_params(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.params.items()}

    def set_params(self, params: dict[str, np.ndarray]) -> None:
        for k, v in params.items():
            self.params[k][...] = v

    def frozen_checksum(self) -> float:
        return 0.0 if self.frozen is None else float(np.abs(self.frozen).sum())

    # -- embedding --------------------------------------------------------

    def embed_source_ids(self, ids: np.ndarray) -> np.ndarray:
        """Concatenated [frozen | tunable] rows for an id array of any shape."""
        tunable = self.params["src_embed"][ids]
        if self.frozen is None:
            return tunable
        return np.concatenate([self.frozen[ids], tunable], axis=-1)

    def embed_tokens(self, tokens: list[str]) -> np.ndarray:
        """Per-token embedding vectors for a tokenized command. Tokens missing
        from the tunable vocabulary use the UNK row; tokens missing from the
        pretrained file contribute a zero frozen part."""
        ids = np.array(self.src_vocab.encode(tokens), dtype=np.intp)
        return self.embed_source_ids(ids)

    # -- encoder ----------------------------------------------------------

    def _run_lstm(self, x, mask, Wx, Wh, b):
        """Carry-masked LSTM over (B, S, Din). Returns hidden states (B, S, H),
        final (h, c), and the per-step cache for the backward pass."""
        batch, steps, _ = x.shape
        hidden = Wh.shape[0]
        h = np.zeros((batch, hidden), dtype=x.dtype)
        c = np.zeros((batch, hidden), dtype=x.dtype)
        states = np.empty((batch, steps, hidden), dtype=x.dtype)
        cache = []
        for t in range(steps):
            pre = x[:, t] @ Wx + h @ Wh + b
            h_raw, c_raw, i, f, g, o, ct = kernels.lstm_gates_forward(pre, c)
            m = mask[:, t : t + 1]
            h_new = m * h_raw + (1.0 - m) * h
            c_new = m * c_raw + (1.0 - m) * c
            cache.append((h, c, i, f, g, o, ct))
            h, c = h_new, c_new
            states[:, t] = h
        return states, h, c, cache

    def _lstm_backward(self, x, mask, Wx, Wh, d_states, d_final_h, cache, grads, prefix):
        """Backward through a carry-masked LSTM. ``d_states`` is the gradient
        on the per-step hidden outputs; ``d_final_h`` lands on the last state.
        Returns gradient w.r.t. x."""
        batch, steps, _ = x.shape
        dx = np.zeros_like(x)
        dh_carry = d_final_h.copy()
        dc_carry = np.zeros_like(d_final_h)
        for t in range(steps - 1, -1, -1):
            h_prev, c_prev, i, f, g, o, ct = cache[t]
            dh_total = d_states[:, t] + dh_carry
            dc_total = dc_carry
            m = mask[:, t : t + 1]
            dh_raw = m * dh_total
            dc_raw = m * dc_total
            dpre, dc_prev_gate = kernels.lstm_gates_backward(
                np.ascontiguousarray(dh_raw), np.ascontiguousarray(dc_raw),
                c_prev, i, f, g, o, ct,
            )
            grads[prefix + "Wx"] += x[:, t].T @ dpre
            grads[prefix + "Wh"] += h_prev.T @ dpre
            grads[prefix + "b"] += dpre.sum(axis=0)
            dx[:, t] = dpre @ Wx.T
            dh_carry = (1.0 - m) * dh_total + dpre @ Wh.T
            dc_carry = (1.0 - m) * dc_total + dc_prev_gate
        return dx

    def encode(self, src_ids, src_mask, training=False, dropout_mask=None):
        """Bidirectional encoding. Returns a dict with attention memory
        (dropout applied only in training), bridge states, and caches."""
        p = self.params
        emb = self.embed_source_ids(src_ids)
        batch, steps = src_ids.shape

        lengths = src_mask.sum(axis=1).astype(np.intp)
        pos = np.arange(steps, dtype=np.intp)[None, :].repeat(batch, axis=0)
        rev_idx = np.where(pos < lengths[:, None], lengths[:, None] - 1 - pos, pos)
        batch_idx = np.arange(batch, dtype=np.intp)[:, None]

        fwd_states, fwd_final_h, _, fwd_cache = self._run_lstm(
            emb, src_mask, p["enc_fwd_Wx"], p["enc_fwd_Wh"], p["enc_fwd_b"]
        )
        emb_rev = emb[batch_idx, rev_idx]
        bwd_states_rev, bwd_final_h, _, bwd_cache = self._run_lstm(
            emb_rev, src_mask, p["enc_bwd_Wx"], p["enc_bwd_Wh"], p["enc_bwd_b"]
        )
        bwd_states = bwd_states_rev[batch_idx, rev_idx]
        enc_out = np.concatenate([fwd_states, bwd_states], axis=2)

        if training and self.cfg.encoder_dropout > 0.0:
            if dropout_mask is None:
                keep = 1.0 - self.cfg.encoder_dropout
                dropout_mask = (
                    self.rng.random(enc_out.shape) < keep
                ).astype(enc_out.dtype) / keep
            memory = enc_out * dropout_mask
        else:
            dropout_mask = None
            memory = enc_out

        bridge_in = np.concatenate([fwd_final_h, bwd_final_h], axis=1)
        bridge_act = np.tanh(bridge_in @ p["bridge_W"] + p["bridge_b"])
        hd = self.cfg.decoder_hidden
        h0 = np.ascontiguousarray(bridge_act[:, :hd])
        c0 = np.ascontiguousarray(bridge_act[:, hd:])
        return {
            "emb": emb,
            "src_ids": src_ids,
            "src_mask": src_mask,
            "rev_idx": rev_idx,
            "batch_idx": batch_idx,
            "emb_rev": emb_rev,
            "fwd_cache": fwd_cache,
            "bwd_cache": bwd_cache,
            "memory": memory,
            "dropout_mask": dropout_mask,
            "bridge_in": bridge_in,
            "bridge_act": bridge_act,
            "h0": h0,
            "c0": c0,
        }

    # -- decoder ----------------------------------------------------------

    def _decode_step(self, prev_ids, h, c, ctx, memory, attn_mask):
        """One decoder step for a row batch. Returns (log-probs, h, c, ctx,
        cache)."""
        p = self.params
        emb = p["tgt_embed"][prev_ids]
        x = np.concatenate([emb, ctx], axis=1)
        pre = x @ p["dec_Wx"] + h @ p["dec_Wh"] + p["dec_b"]
        h_new, c_new, i, f, g, o, ct = kernels.lstm_gates_forward(pre, c)
        u = h_new @ p["attn_W"]
        scores = np.einsum("bk,bsk->bs", u, memory)
        scores = np.where(attn_mask > 0, scores, NEG_BIG)
        alpha = kernels.softmax_rows(np.ascontiguousarray(scores))
        ctx_new = np.einsum("bs,bsk->bk", alpha, memory)
        oin = np.concatenate([h_new, ctx_new], axis=1)
        logits = oin @ p["out_W"] + p["out_b"]
        shifted = logits - logits.max(axis=1, keepdims=True)
        logz = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        logp = shifted - logz
        cache = {
            "prev_ids": prev_ids,
            "x": x,
            "h_prev": h,
            "c_prev": c,
            "gates": (i, f, g, o, ct),
            "u": u,
            "alpha": alpha,
            "ctx_new": ctx_new,
            "h_new": h_new,
            "oin": oin,
            "probs": np.exp(logp),
        }
        return logp, h_new, c_new, ctx_new, cache

    # -- training loss ----------------------------------------------------

    def loss_and_grads(self, batch, training=True, dropout_mask=None):
        """Teacher-forced mean cross-entropy per target token and gradients
        for every trainable tensor. ``batch`` carries src_ids, src_mask,
        tgt_in, tgt_out, tgt_mask."""
        loss, caches, enc = self._forward(batch, training, dropout_mask)
        grads = self._backward(batch, caches, enc)
        return loss, grads, {"token_acc": self._token_acc(batch, caches)}

    def loss_only(self, batch, training=True, dropout_mask=None):
        loss, _, _ = self._forward(batch, training, dropout_mask)
        return loss

    def _forward(self, batch, training, dropout_mask):
        enc = self.encode(batch["src_ids"], batch["src_mask"], training, dropout_mask)
        tgt_in, tgt_out, tgt_mask = batch["tgt_in"], batch["tgt_out"], batch["tgt_mask"]
        batch_size, steps = tgt_in.shape
        h, c = enc["h0"], enc["c0"]
        ctx = np.zeros((batch_size, 2 * self.cfg.encoder_hidden), dtype=h.dtype)
        total = 0.0
        caches = []
        denom = tgt_mask.sum()
        rows = np.arange(batch_size)
        for t in range(steps):
            logp, h, c, ctx, cache = self._decode_step(
                tgt_in[:, t], h, c, ctx, enc["memory"], batch["src_mask"]
            )
            total += -(logp[rows, tgt_out[:, t]] * tgt_mask[:, t]).sum()
            caches.append(cache)
        return float(total / denom), caches, enc

    def _token_acc(self, batch, caches)  -> float:
        tgt_out, tgt_mask = batch["tgt_out"], batch["tgt_mask"]
        correct = 0.0
        for t, cache in enumerate(caches):
            pred = cache["probs"].argmax(axis=1)
            correct += ((pred == tgt_out[:, t]) * tgt_mask[:, t]).sum()
        return float(correct / tgt_mask.sum())

    def _backward(self, batch, caches, enc):
        p = self.params
        grads = {k: np.zeros_like(v) for k, v in p.items()}
        tgt_out, tgt_mask = batch["tgt_out"], batch["tgt_mask"]
        batch_size, steps = tgt_out.shape
        denom = tgt_mask.sum()
        rows = np.arange(batch_size)
        hd = self.cfg.decoder_hidden
        emb_dim = self.cfg.tunable_embed_dim

        memory = enc["memory"]
        d_memory = np.zeros_like(memory)
        dh_next = np.zeros((batch_size, hd), dtype=memory.dtype)
        dc_next = np.zeros_like(dh_next)
        dctx_next = np.zeros((batch_size, memory.shape[2]), dtype=memory.dtype)
        d_tgt_embed = grads["tgt_embed"]

        for t in range(steps - 1, -1, -1):
            cache = caches[t]
            dlogits = cache["probs"].copy()
            dlogits[rows, tgt_out[:, t]] -= 1.0
            dlogits *= (tgt_mask[:, t] / denom)[:, None]

            grads["out_W"] += cache["oin"].T @ dlogits
            grads["out_b"] += dlogits.sum(axis=0)
            doin = dlogits @ p["out_W"].T
            dh = doin[:, :hd]
            dctx = doin[:, hd:] + dctx_next

            # attention backward
            alpha, u = cache["alpha"], cache["u"]
            dalpha = np.einsum("bk,bsk->bs", dctx, memory)
            d_memory += alpha[:, :, None] * dctx[:, None, :]
            dscores = alpha * (dalpha - (alpha * dalpha).sum(axis=1, keepdims=True))
            du = np.einsum("bs,bsk->bk", dscores, memory)
            d_memory += dscores[:, :, None] * u[:, None, :]
            grads["attn_W"] += cache["h_new"].T @ du
            dh = dh + du @ p["attn_W"].T

            # LSTM cell backward
            i, f, g, o, ct = cache["gates"]
            dh_total = np.ascontiguousarray(dh + dh_next)
            dc_total = np.ascontiguousarray(dc_next)
            dpre, dc_prev = kernels.lstm_gates_backward(
                dh_total, dc_total, cache["c_prev"], i, f, g, o, ct
            )
            grads["dec_Wx"] += cache["x"].T @ dpre
            grads["dec_Wh"] += cache["h_prev"].T @ dpre
            grads["dec_b"] += dpre.sum(axis=0)
            dx = dpre @ p["dec_Wx"].T
            np.add.at(d_tgt_embed, cache["prev_ids"], dx[:, :emb_dim])
            dctx_next = dx[:, emb_dim:]
            dh_next = dpre @ p["dec_Wh"].T
            dc_next = dc_prev

        self._encoder_backward(enc, d_memory, dh_next, dc_next, grads)
        return grads

    def _encoder_backward(self, enc, d_memory, dh0, dc0, grads):
        p = self.params
        he = self.cfg.encoder_hidden

        # bridge
        dbridge_act = np.concatenate([dh0, dc0], axis=1)
        dbridge_pre = dbridge_act * (1.0 - enc["bridge_act"] ** 2)
        grads["bridge_W"] += enc["bridge_in"].T @ dbridge_pre
        grads["bridge_b"] += dbridge_pre.sum(axis=0)
        dbridge_in = dbridge_pre @ p["bridge_W"].T
        dfwd_final = dbridge_in[:, :he]
        dbwd_final = dbridge_in[:, he:]

        d_enc_out = d_memory if enc["dropout_mask"] is None else d_memory * enc["dropout_mask"]
        d_fwd_states = np.ascontiguousarray(d_enc_out[:, :, :he])
        d_bwd_states = np.ascontiguousarray(d_enc_out[:, :, he:])
        batch_idx, rev_idx = enc["batch_idx"], enc["rev_idx"]
        d_bwd_states_rev = d_bwd_states[batch_idx, rev_idx]

        demb = self._lstm_backward(
            enc["emb"], enc["src_mask"], p["enc_fwd_Wx"], p["enc_fwd_Wh"],
            d_fwd_states, dfwd_final, enc["fwd_cache"], grads, "enc_fwd_",
        )
        demb_rev = self._lstm_backward(
            enc["emb_rev"], enc["src_mask"], p["enc_bwd_Wx"], p["enc_bwd_Wh"],
            d_bwd_states_rev, dbwd_final, enc["bwd_cache"], grads, "enc_bwd_",
        )
        demb += demb_rev[batch_idx, rev_idx]

        tunable_part = demb[:, :, self.cfg.frozen_embed_dim :]
        ids = enc["src_ids"]
        np.add.at(
            grads["src_embed"],
            ids.reshape(-1),
            tunable_part.reshape(-1, tunable_part.shape[2]),
        )

    # -- inference --------------------------------------------------------

    def start_state(self, src_tokens: list[str]):
        """Encode one command for decoding. Returns (memory, attn_mask,
        state) where state is the (h, c, ctx) triple for a beam of size 1."""
        ids = np.array([self.src_vocab.encode(src_tokens)], dtype=np.intp)
        mask = np.ones((1, ids.shape[1]), dtype=self.dtype)
        enc = self.encode(ids, mask, training=False)
        state = (enc["h0"], enc["c0"], np.zeros((1, 2 * self.cfg.encoder_hidden), dtype=self.dtype))
        return enc["memory"], mask, state

    def step(self, prev_ids, state, memory, attn_mask):
        """Decoder step over a row batch of hypotheses. prev_ids (k,), state
        arrays (k, ...), memory (1, S, 2He) broadcast by row duplication."""
        h, c, ctx = state
        k = len(prev_ids)
        mem = np.repeat(memory, k, axis=0) if memory.shape[0] != k else memory
        msk = np.repeat(attn_mask, k, axis=0) if attn_mask.shape[0] != k else attn_mask
        logp, h2, c2, ctx2, _ = self._decode_step(
            np.asarray(prev_ids, dtype=np.intp), h, c, ctx, mem, msk
        )
        return logp, (h2, c2, ctx2)
