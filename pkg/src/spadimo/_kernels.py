"""Backend selection for the hot kernels.

The compiled extension is used when importable; setting
``SPADIMO_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _fallback

try:
    from . import _core as _compiled
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and os.environ.get("SPADIMO_PURE_PYTHON", "") not in ("1", "true", "yes"):
    BACKEND = "compiled"
    _impl = _compiled
else:
    BACKEND = "python"
    _impl = _fallback

jacobi_eigh = _impl.jacobi_eigh
qn_order_statistic = _impl.qn_order_statistic


def backends():
    """Mapping of available backend name -> kernel module."""
    out = {"python": _fallback}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out
