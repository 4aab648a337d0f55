"""Select the compiled GMP kernel when built, else the pure-Python one.

Set ``WEAKL1_PURE_PYTHON=1`` to force the fallback.
"""
import os

if os.environ.get("WEAKL1_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernel_py as _impl
else:
    try:
        from . import _kernel as _impl
    except ImportError:  # extension not built
        from . import _kernel_py as _impl

BACKEND = _impl.BACKEND
shape_range = _impl.shape_range
level_measure = _impl.level_measure
