"""Kernel selection: compiled extension when available, pure Python otherwise.

Set SHANNONEVAL_KERNEL=py to force the fallback or =cy to require the
extension (import then fails loudly if it was not built).  Both kernels are
bit-identical by contract, so selection never changes results, only speed.
"""

import os

from . import kernel_py

_requested = os.environ.get("SHANNONEVAL_KERNEL", "").strip().lower()

if _requested in ("py", "python"):
    _impl = kernel_py
    kernel_name = "python"
else:
    try:
        from . import _kernel_cy as _impl  # type: ignore[attr-defined]

        kernel_name = "cython"
    except ImportError:
        if _requested in ("cy", "cython"):
            raise
        _impl = kernel_py
        kernel_name = "python"

score_tokens = _impl.score_tokens
match_fragments = _impl.match_fragments
# Test-facing full-distribution probe; only the Python kernel provides it.
candidate_surprisals = kernel_py.candidate_surprisals
