"""Central finite-difference validation of the hand-derived backward pass.

Run on a small 64-bit model; every element of every trainable tensor is
perturbed both ways and the analytic gradient compared by relative error.
Dropout, when enabled, uses one fixed mask across all evaluations so the
loss stays a deterministic function of the parameters.
"""

from __future__ import annotations

import numpy as np


class GradientMismatch(AssertionError):
    def __init__(self, parameter: str, max_error: float):
        super().__init__(f"{parameter}: max relative error {max_error:.3e}")
        self.parameter = parameter
        self.max_error = max_error


def gradient_check(model, batch, epsilon=1e-5, tolerance=1e-4, floor=1e-5) -> dict[str, float]:
    """Max relative error per parameter tensor; raises GradientMismatch on the
    first tensor exceeding the tolerance.

    The error denominator is floored at ``floor``: central differences of a
    loss of order 1 carry ~1e-10 absolute noise at this epsilon, so elements
    whose true gradient sits below the floor are checked to an absolute
    tolerance of ``tolerance * floor`` instead of a meaningless ratio of two
    rounding errors."""
    if model.dtype != np.float64:
        raise ValueError("gradient checks require a float64 model")
    dropout_mask = None
    if model.cfg.encoder_dropout > 0.0:
        keep = 1.0 - model.cfg.encoder_dropout
        batch_size, s_len = batch["src_ids"].shape
        shape = (batch_size, s_len, 2 * model.cfg.encoder_hidden)
        dropout_mask = (
            np.random.default_rng(model.cfg.seed + 99).random(shape) < keep
        ).astype(np.float64) / keep

    _, analytic, _ = model.loss_and_grads(batch, training=True, dropout_mask=dropout_mask)

    report: dict[str, float] = {}
    for name in sorted(model.params):
        tensor = model.params[name]
        grad = analytic[name]
        numeric = np.zeros_like(tensor)
        flat = tensor.reshape(-1)
        numeric_flat = numeric.reshape(-1)
        for idx in range(flat.size):
            original = flat[idx]
            flat[idx] = original + epsilon
            loss_plus = model.loss_only(batch, training=True, dropout_mask=dropout_mask)
            flat[idx] = original - epsilon
            loss_minus = model.loss_only(batch, training=True, dropout_mask=dropout_mask)
            flat[idx] = original
            numeric_flat[idx] = (loss_plus - loss_minus) / (2.0 * epsilon)
        denom = np.maximum(np.maximum(np.abs(grad), np.abs(numeric)), floor)
        max_err = float(np.max(np.abs(grad - numeric) / denom))
        report[name] = max_err
        if max_err > tolerance:
            raise GradientMismatch(name, max_err)
    return report
