"""Backend selection for the hot integration loop.

The compiled extension is used when it imports; otherwise the numpy twin.
Set ``SPINREACT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _rk4_py

if os.environ.get("SPINREACT_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _rk4 as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
rk4_integrate = _compiled.rk4_integrate if _compiled is not None else _rk4_py.rk4_integrate

__all__ = ["BACKEND", "rk4_integrate"]
