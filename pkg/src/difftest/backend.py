"""Kernel backend selection.

The compiled Cython extension is preferred when importable; otherwise the
pure-Python kernels are used.  DIFFTEST_BACKEND=python|compiled forces a
choice (raising if the compiled extension is requested but missing).
"""

from __future__ import annotations

import os

from .errors import ConfigurationError

_forced = os.environ.get("DIFFTEST_BACKEND", "").strip().lower()

if _forced == "python":
    from . import _kernels_py as kernels
elif _forced == "compiled":
    from . import _kernels as kernels  # type: ignore[no-redef]
elif _forced == "":
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]
else:
    raise ConfigurationError(f"DIFFTEST_BACKEND={_forced!r}; expected 'python' or 'compiled'")


def backend_name() -> str:
    return kernels.BACKEND
