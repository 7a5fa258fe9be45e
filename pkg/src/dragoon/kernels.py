"""Backend selection for the hot loops.

The compiled extension is preferred; the numpy fallback is used when it is
missing or when the environment variable ``DRAGOON_PURE_PYTHON`` is set to a
non-empty value other than ``0``.
"""

from __future__ import annotations

import os

from . import _pykernels

_force_pure = os.environ.get("DRAGOON_PURE_PYTHON", "") not in ("", "0")

try:
    if _force_pure:
        raise ImportError("pure-python backend forced")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

gc_distances = _impl.gc_distances
gc_mean_distance = _impl.gc_mean_distance
assign_nearest = _impl.assign_nearest
kcenter_cost = _impl.kcenter_cost
bfs_hops = _impl.bfs_hops


def available_backends():
    """Return ``{name: module}`` for every backend importable in this process."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
