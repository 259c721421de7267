"""Select the kernel backend at import time.

The compiled ``_core`` extension is preferred; setting ``SCENEQA_PURE_PYTHON=1``
or a failed build selects ``_pykernels`` instead. Both expose the same
functions and are tested against each other.
"""

import os

from . import _pykernels

_compiled = None
if not os.environ.get("SCENEQA_PURE_PYTHON"):
    try:
        from . import _core as _compiled
    except ImportError:
        _compiled = None

if _compiled is not None:
    BACKEND = "cython"
    relation_matrix = _compiled.relation_matrix
    pool_rotated = _compiled.pool_rotated
else:
    BACKEND = "python"
    relation_matrix = _pykernels.relation_matrix
    pool_rotated = _pykernels.pool_rotated

MEAN = _pykernels.MEAN
MAX = _pykernels.MAX


def available_backends():
    """Map of backend name to kernel module, for tests and benchmarks."""
    out = {"python": _pykernels}
    try:
        from . import _core
    except ImportError:
        return out
    out["cython"] = _core
    return out
