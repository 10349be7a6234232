"""Kernel backend selection.

Hot kernels come in two flavours: a numba ``@njit`` version and a pure-numpy
version that performs the same floating point operations in the same order.
The active flavour is chosen once at import time from ``PSPIN_EMBED_BACKEND``
(``numba`` or ``numpy``); if numba cannot be imported the numpy path is used.
"""
import logging
import os

log = logging.getLogger(__name__)

ENV_VAR = "PSPIN_EMBED_BACKEND"

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional speedup
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


def _resolve(requested):
    requested = (requested or "numba").strip().lower()
    if requested not in ("numba", "numpy"):
        raise ValueError(f"{ENV_VAR} must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba" and not HAS_NUMBA:
        log.warning("numba unavailable, falling back to the numpy backend")
        return "numpy"
    return requested


BACKEND = _resolve(os.environ.get(ENV_VAR))


def resolve_backend(name=None):
    """Return a concrete backend name; ``None`` means the import-time default."""
    return BACKEND if name is None else _resolve(name)
