"""Kernel backend selection.

The compiled extension is used when it imports; set
``DUALRAIL_BACKEND=python`` to force the numpy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
apply_dense = _kernels_py.apply_dense
apply_diag = _kernels_py.apply_diag

if os.environ.get("DUALRAIL_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None
    if _compiled is not None:
        BACKEND = "compiled"
        apply_dense = _compiled.apply_dense
        apply_diag = _compiled.apply_diag


def backends():
    """Return every importable backend as ``{name: (apply_dense, apply_diag)}``."""
    found = {"python": (_kernels_py.apply_dense, _kernels_py.apply_diag)}
    try:
        from . import _kernels as compiled
    except ImportError:
        return found
    found["compiled"] = (compiled.apply_dense, compiled.apply_diag)
    return found
