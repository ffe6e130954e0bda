"""Kernel selection: compiled extension when importable, numpy fallback otherwise.

Set ``PARADIM_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("PARADIM_PURE_PYTHON") == "1":
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:  # extension not built
        from . import _kernels_py as kernels

BACKEND = kernels.BACKEND

__all__ = ["kernels", "BACKEND"]
