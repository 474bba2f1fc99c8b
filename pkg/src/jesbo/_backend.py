"""Kernel backend selection.

Imports the compiled core when available, otherwise the NumPy fallback.
Set ``JESBO_PURE_PY=1`` to force the fallback (used by the backend
benchmark and tests).
"""

import os

if os.environ.get("JESBO_PURE_PY", "").strip() not in ("", "0"):
    from . import _core_py as kernels
else:
    try:
        from . import _core as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _core_py as kernels  # type: ignore[no-redef]

BACKEND = kernels.NAME

path_values = kernels.path_values
se_cross = kernels.se_cross
upper_trunc_var_ratio = kernels.upper_trunc_var_ratio
avg_trunc_entropy = kernels.avg_trunc_entropy
