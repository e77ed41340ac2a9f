"""Kernel backend selection.

The compiled extension is preferred when importable; set
``SEG_CORESET_BACKEND=python`` to force the pure-Python fallback or
``SEG_CORESET_BACKEND=compiled`` to require the extension.
"""

import os

from . import _kernels_py

_mode = os.environ.get("SEG_CORESET_BACKEND", "auto").lower()

if _mode not in ("auto", "compiled", "python"):
    raise ImportError(f"SEG_CORESET_BACKEND must be auto|compiled|python, got {_mode!r}")

kernels = _kernels_py
if _mode in ("auto", "compiled"):
    try:
        from . import _kernels as _compiled

        kernels = _compiled
    except ImportError:
        if _mode == "compiled":
            raise ImportError(
                "SEG_CORESET_BACKEND=compiled but the extension is not built; "
                "run `pip install -e . --no-build-isolation`"
            )

BACKEND = kernels.BACKEND_NAME


def get_kernels(backend: str = None):
    """Return the kernel module for an explicit backend name (benchmarks)."""
    if backend in (None, "auto"):
        return kernels
    if backend == "python":
        return _kernels_py
    if backend == "compiled":
        from . import _kernels as _compiled

        return _compiled
    raise ValueError(f"unknown backend {backend!r}")
