"""Kernel backend selection: compiled extension if available, else pure Python.

``TRUVAR_BACKEND`` overrides the choice: ``compiled`` (error if missing),
``python``, or ``auto`` (default).
"""

import os


def _load():
    choice = os.environ.get("TRUVAR_BACKEND", "auto").lower()
    if choice not in ("auto", "compiled", "python"):
        raise ValueError(f"TRUVAR_BACKEND must be auto|compiled|python, got {choice!r}")
    if choice == "python":
        from . import _kernels_py

        return _kernels_py, "python"
    try:
        from . import _kernels  # type: ignore[attr-defined]

        return _kernels, "compiled"
    except ImportError:
        if choice == "compiled":
            raise ImportError(
                "TRUVAR_BACKEND=compiled but the truvar._kernels extension is not built; "
                "reinstall with a C toolchain or unset TRUVAR_BACKEND"
            ) from None
        from . import _kernels_py

        return _kernels_py, "python"


kernels, BACKEND = _load()
