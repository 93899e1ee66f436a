"""Pretrained word-vector files: plain text, one ``token v1 ... vD`` per line.

The frozen embedding channel is built from such a file; vocabulary tokens
absent from the file get a zero row, and the matrix never changes during
training.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..corpus import Vocabulary


class MalformedLine(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InconsistentDimension(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def load_pretrained_vectors(path: str | Path, vocab: Vocabulary) -> np.ndarray:
    """(|vocab|, D) float32 matrix with D inferred from the first line. Rows
    for in-vocabulary tokens come verbatim from the file; others are zero."""
    dim: int | None = None
    matrix: np.ndarray | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) < 2:
                raise MalformedLine("expected 'token v1 ... vD'", lineno)
            token, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
                matrix = np.zeros((len(vocab), dim), dtype=np.float32)
            elif len(values) != dim:
                raise InconsistentDimension(
                    f"expected {dim} floats, got {len(values)}", lineno
                )
            try:
                row = np.array([float(v) for v in values], dtype=np.float32)
            except ValueError as exc:
                raise MalformedLine(f"bad float: {exc}", lineno) from exc
            idx = vocab.token_to_id.get(token)
            if idx is not None:
                matrix[idx] = row
    if matrix is None:
        raise MalformedLine("empty vector file", 0)
    return matrix
