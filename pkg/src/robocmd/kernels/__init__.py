"""Hot-loop kernels with a compiled fast path.

At import time the Cython extension is preferred when present; otherwise the
pure numpy fallback is used. Override with ROBOCMD_KERNELS=pure|c (asking for
``c`` without the extension built is an error rather than a silent
downgrade). Both backends implement the same functions with the same
numerics contracts; ``tests/test_kernels.py`` checks them against each other
and ``benchmarks/bench_kernels.py`` compares their speed.
"""

from __future__ import annotations

import os

from . import pure

_forced = os.environ.get("ROBOCMD_KERNELS")

if _forced == "pure":
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _ckern as _impl  # type: ignore[attr-defined]

        BACKEND = "c"
    except ImportError:
        if _forced == "c":
            raise ImportError(
                "ROBOCMD_KERNELS=c but the compiled extension is unavailable; "
                "reinstall with a C compiler or unset the variable"
            )
        _impl = pure
        BACKEND = "pure"

lstm_gates_forward = _impl.lstm_gates_forward
lstm_gates_backward = _impl.lstm_gates_backward
softmax_rows = _impl.softmax_rows
levenshtein_ids = _impl.levenshtein_ids
sigmoid = pure.sigmoid  # small helper, numpy path is fine everywhere

__all__ = [
    "BACKEND",
    "lstm_gates_forward",
    "lstm_gates_backward",
    "softmax_rows",
    "levenshtein_ids",
    "sigmoid",
]
