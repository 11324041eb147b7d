"""Graph kernel dispatch: compiled ``_core`` when built, else ``_pycore``.

Set ``EDMNET_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pycore

BACKEND = "python"
_impl = _pycore

if os.environ.get("EDMNET_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pycore

bfs_distances = _impl.bfs_distances
vertex_betweenness = _impl.vertex_betweenness
edge_betweenness = _impl.edge_betweenness


def implementations():
    """Available backends by name, for benchmarks and cross-checks."""
    found = {"python": _pycore}
    try:
        from . import _core

        found["cython"] = _core
    except ImportError:
        pass
    return found
