"""Kernel backend selection.

The compiled extension is preferred; the pure-Python kernels are the
fallback when it is missing (source checkout without a build step).  Set
HOFSIM_BACKEND=python or =cython to force a choice; forcing cython on an
environment without the extension raises immediately rather than silently
degrading.
"""

import os
import warnings

_requested = os.environ.get("HOFSIM_BACKEND", "").strip().lower()

if _requested == "python":
    from . import _kernels_py as kernels
elif _requested == "cython":
    from . import _kernels_cy as kernels  # type: ignore[attr-defined]
else:
    try:
        from . import _kernels_cy as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

        warnings.warn(
            "compiled kernels unavailable; using the pure-Python fallback "
            "(build the extension with `pip install -e .` for full speed)",
            stacklevel=1,
        )

BACKEND = kernels.BACKEND_NAME

propagate_state = kernels.propagate_state
propagate_density = kernels.propagate_density
