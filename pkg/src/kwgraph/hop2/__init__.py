"""Distance-truncated 2-hop cover labeling with path reconstruction.

The compiled core (``_core``) is used when it was built; otherwise, or when
``KWGRAPH_PURE=1`` is set, the pure-Python ``_pycore`` takes over.  Both
produce identical labels.
"""
from __future__ import annotations

import os

from . import _pycore

if os.environ.get("KWGRAPH_PURE", "") not in ("", "0"):
    core = _pycore
else:
    try:
        from . import _core as core
    except ImportError:  # extension not built
        core = _pycore

BACKEND = "compiled" if core is not _pycore else "python"


def available_backends() -> dict:
    out = {"python": _pycore}
    try:
        from . import _core
        out["compiled"] = _core
    except ImportError:
        pass
    return out


from .index import (  # noqa: E402
    DISCONNECTED,
    IndexFormatError,
    LabelEntry,
    TwoHopIndex,
    build,
    default_d_max,
    rank_order,
)

__all__ = [
    "BACKEND",
    "DISCONNECTED",
    "IndexFormatError",
    "LabelEntry",
    "TwoHopIndex",
    "available_backends",
    "build",
    "core",
    "default_d_max",
    "rank_order",
]
