# cython: language_level=3
"""Compiled kernels: fused LSTM gate math, row softmax, Levenshtein.

Mirrors ``robocmd.kernels.pure``; keep the two in sync. The fused gate
kernels avoid the half-dozen temporaries numpy materializes per LSTM step,
which is where training time goes at desk-scale batch sizes.
"""

import numpy as np

cimport cython
cimport numpy as cnp
from libc.math cimport exp, tanh, INFINITY

cnp.import_array()

ctypedef fused real:
    float
    double


cdef inline real _sigmoid(real x) noexcept nogil:
    cdef double e
    if x >= 0:
        return <real>(1.0 / (1.0 + exp(-x)))
    e = exp(x)
    return <real>(e / (1.0 + e))


def _empty_like_2d(arr, rows, cols):
    return np.empty((rows, cols), dtype=arr.dtype)


@cython.boundscheck(False)
@cython.wraparound(False)
def lstm_gates_forward(real[:, ::1] pre, real[:, ::1] c_prev):
    """See ``pure.lstm_gates_forward``: pre is (B, 4H) laid out [i|f|g|o]."""
    cdef Py_ssize_t batch = c_prev.shape[0]
    cdef Py_ssize_t hidden = c_prev.shape[1]
    if pre.shape[0] != batch or pre.shape[1] != 4 * hidden:
        raise ValueError("preactivation shape must be (B, 4H)")

    h_np = _empty_like_2d(np.asarray(pre), batch, hidden)
    c_np = _empty_like_2d(np.asarray(pre), batch, hidden)
    i_np = _empty_like_2d(np.asarray(pre), batch, hidden)
    f_np = _empty_like_2d(np.asarray(pre), batch, hidden)
    g_np = _empty_like_2d(np.asarray(pre), batch, hidden)
    o_np = _empty_like_2d(np.asarray(pre), batch, hidden)
    ct_np = _empty_like_2d(np.asarray(pre), batch, hidden)

    cdef real[:, ::1] h = h_np
    cdef real[:, ::1] c = c_np
    cdef real[:, ::1] ig = i_np
    cdef real[:, ::1] fg = f_np
    cdef real[:, ::1] gg = g_np
    cdef real[:, ::1] og = o_np
    cdef real[:, ::1] ct = ct_np

    cdef Py_ssize_t b, k
    cdef real iv, fv, gv, ov, cv
    with nogil:
        for b in range(batch):
            for k in range(hidden):
                iv = _sigmoid(pre[b, k])
                fv = _sigmoid(pre[b, hidden + k])
                gv = <real>tanh(pre[b, 2 * hidden + k])
                ov = _sigmoid(pre[b, 3 * hidden + k])
                cv = fv * c_prev[b, k] + iv * gv
                ig[b, k] = iv
                fg[b, k] = fv
                gg[b, k] = gv
                og[b, k] = ov
                c[b, k] = cv
                ct[b, k] = <real>tanh(cv)
                h[b, k] = ov * ct[b, k]
    return h_np, c_np, i_np, f_np, g_np, o_np, ct_np


@cython.boundscheck(False)
@cython.wraparound(False)
def lstm_gates_backward(
    real[:, ::1] dh,
    real[:, ::1] dc,
    real[:, ::1] c_prev,
    real[:, ::1] i,
    real[:, ::1] f,
    real[:, ::1] g,
    real[:, ::1] o,
    real[:, ::1] ct,
):
    cdef Py_ssize_t batch = dh.shape[0]
    cdef Py_ssize_t hidden = dh.shape[1]

    dpre_np = _empty_like_2d(np.asarray(dh), batch, 4 * hidden)
    dc_prev_np = _empty_like_2d(np.asarray(dh), batch, hidden)
    cdef real[:, ::1] dpre = dpre_np
    cdef real[:, ::1] dc_prev = dc_prev_np

    cdef Py_ssize_t b, k
    cdef real dov, dct, di, df, dg
    with nogil:
        for b in range(batch):
            for k in range(hidden):
                dov = dh[b, k] * ct[b, k]
                dct = dc[b, k] + dh[b, k] * o[b, k] * (1.0 - ct[b, k] * ct[b, k])
                di = dct * g[b, k]
                df = dct * c_prev[b, k]
                dg = dct * i[b, k]
                dc_prev[b, k] = dct * f[b, k]
                dpre[b, k] = di * i[b, k] * (1.0 - i[b, k])
                dpre[b, hidden + k] = df * f[b, k] * (1.0 - f[b, k])
                dpre[b, 2 * hidden + k] = dg * (1.0 - g[b, k] * g[b, k])
                dpre[b, 3 * hidden + k] = dov * o[b, k] * (1.0 - o[b, k])
    return dpre_np, dc_prev_np


@cython.boundscheck(False)
@cython.wraparound(False)
def softmax_rows(real[:, ::1] x):
    """Row-wise stable softmax; rows may contain -inf for masked entries."""
    cdef Py_ssize_t rows = x.shape[0]
    cdef Py_ssize_t cols = x.shape[1]
    out_np = _empty_like_2d(np.asarray(x), rows, cols)
    cdef real[:, ::1] out = out_np
    cdef Py_ssize_t r, c
    cdef real m, s, v
    with nogil:
        for r in range(rows):
            m = x[r, 0]
            for c in range(1, cols):
                if x[r, c] > m:
                    m = x[r, c]
            s = 0
            for c in range(cols):
                if x[r, c] == -INFINITY:
                    out[r, c] = 0
                else:
                    v = <real>exp(x[r, c] - m)
                    out[r, c] = v
                    s += v
            for c in range(cols):
                out[r, c] /= s
    return out_np


@cython.boundscheck(False)
@cython.wraparound(False)
def levenshtein_ids(const cnp.int32_t[::1] a, const cnp.int32_t[::1] b):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m = b.shape[0]
    if n == 0:
        return m
    if m == 0:
        return n
    rows_np = np.zeros((2, m + 1), dtype=np.intp)
    rows_np[0] = np.arange(m + 1)
    cdef Py_ssize_t[:, ::1] rows = rows_np
    cdef Py_ssize_t x, y, cost, best, cur, prv
    cdef cnp.int32_t ax
    with nogil:
        for x in range(1, n + 1):
            cur = x & 1
            prv = 1 - cur
            rows[cur, 0] = x
            ax = a[x - 1]
            for y in range(1, m + 1):
                cost = 0 if ax == b[y - 1] else 1
                best = rows[prv, y] + 1
                if rows[cur, y - 1] + 1 < best:
                    best = rows[cur, y - 1] + 1
                if rows[prv, y - 1] + cost < best:
                    best = rows[prv, y - 1] + cost
                rows[cur, y] = best
    return int(rows[n & 1, m])
