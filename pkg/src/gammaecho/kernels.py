"""Propagation-kernel backend selection.

The compiled extension is preferred when it was built; the numpy
implementation is the fallback and the reference for cross-checking.  Set
GAMMAECHO_KERNEL=numpy (or =cython) to force a backend before import.
"""

import importlib
import os

from . import _kernel_np

_BACKENDS = {"numpy": "gammaecho._kernel_np", "cython": "gammaecho._kernel"}


def load_backend(name: str):
    """Import a specific backend module ("numpy" or "cython")."""
    try:
        module_name = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown kernel backend {name!r}") from None
    return importlib.import_module(module_name)


def available_backends() -> list[str]:
    out = []
    for name in _BACKENDS:
        try:
            load_backend(name)
        except ImportError:
            continue
        out.append(name)
    return out


def _select():
    forced = os.environ.get("GAMMAECHO_KERNEL")
    if forced:
        return load_backend(forced), forced
    try:
        return load_backend("cython"), "cython"
    except ImportError:
        return _kernel_np, "numpy"


_impl, BACKEND = _select()
propagate_slabs = _impl.propagate_slabs


def backend_name() -> str:
    """Backend selected at import time."""
    return BACKEND
