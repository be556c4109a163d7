"""Kernel selection: compiled recursions when built, numpy otherwise.

Set SKILLCHAIN_PURE_PYTHON=1 to force the numpy fallback (useful for
benchmark baselines and debugging).
"""

from __future__ import annotations

import os

from . import _hmm_np

if os.environ.get("SKILLCHAIN_PURE_PYTHON"):
    impl = _hmm_np
else:
    try:
        from . import _hmm_cy as impl  # type: ignore[no-redef]
    except ImportError:
        impl = _hmm_np


def kernel_backend() -> str:
    """Name of the kernel implementation selected at import."""
    return impl.BACKEND_NAME
