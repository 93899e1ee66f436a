"""Pure numpy implementations of the hot kernels.

Same contracts as the compiled extension in ``_ckern.pyx``; used as the
fallback when the extension is not built. The matrix products that surround
these kernels live in the caller either way — only the fused elementwise
work and the Levenshtein inner loop differ between backends.
"""

from __future__ import annotations

import numpy as np


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def lstm_gates_forward(pre, c_prev):
    """Fused LSTM cell pointwise math.

    ``pre`` is the gate preactivation (B, 4H) laid out [i | f | g | o];
    ``c_prev`` is (B, H). Returns ``(h, c, i, f, g, o, ct)`` where ``ct`` is
    tanh(c), all (B, H); the gate activations are kept for the backward pass.
    """
    hidden = c_prev.shape[-1]
    i = sigmoid(pre[:, :hidden])
    f = sigmoid(pre[:, hidden : 2 * hidden])
    g = np.tanh(pre[:, 2 * hidden : 3 * hidden])
    o = sigmoid(pre[:, 3 * hidden :])
    c = f * c_prev + i * g
    ct = np.tanh(c)
    h = o * ct
    return h, c, i, f, g, o, ct


def lstm_gates_backward(dh, dc, c_prev, i, f, g, o, ct):
    """Backward of :func:`lstm_gates_forward`.

    ``dh``/``dc`` are gradients w.r.t. the cell outputs h and c. Returns
    ``(dpre, dc_prev)`` with ``dpre`` shaped (B, 4H).
    """
    do = dh * ct
    dc_total = dc + dh * o * (1.0 - ct * ct)
    di = dc_total * g
    df = dc_total * c_prev
    dg = dc_total * i
    dc_prev = dc_total * f
    dpre = np.concatenate(
        [
            di * i * (1.0 - i),
            df * f * (1.0 - f),
            dg * (1.0 - g * g),
            do * o * (1.0 - o),
        ],
        axis=1,
    )
    return dpre, dc_prev


def softmax_rows(x: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax. Rows may contain -inf (masked entries)."""
    shifted = x - np.max(x, axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / np.sum(ex, axis=-1, keepdims=True)


def levenshtein_ids(a: np.ndarray, b: np.ndarray) -> int:
    """Edit distance between two int32 id sequences (insert/delete/substitute,
    unit costs)."""
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    prev = list(range(m + 1))
    cur = [0] * (m + 1)
    for x in range(1, n + 1):
        cur[0] = x
        ax = a[x - 1]
        for y in range(1, m + 1):
            cost = 0 if ax == b[y - 1] else 1
            cur[y] = min(prev[y] + 1, cur[y - 1] + 1, prev[y - 1] + cost)
        prev, cur = cur, prev
    return prev[m]
