"""Backend selection for the hot loops.

The compiled extension is used when it imports; setting
``DOMPATH_PURE_PYTHON=1`` forces the pure-Python fallback.
"""

import os

if os.environ.get("DOMPATH_PURE_PYTHON", "") not in ("", "0"):
    from ._pykernels import explicit_sp, implicit_sp, label_correcting_sp, segment_table
    BACKEND = "python"
else:
    try:
        from ._ckernels import explicit_sp, implicit_sp, label_correcting_sp, segment_table
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        from ._pykernels import explicit_sp, implicit_sp, label_correcting_sp, segment_table
        BACKEND = "python"

__all__ = ["BACKEND", "explicit_sp", "implicit_sp", "label_correcting_sp", "segment_table"]
