"""Backend selection for the hot moment kernel.

The compiled Cython module is used when it imports; set
``LIGHTWITNESS_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _pykernels

if os.environ.get("LIGHTWITNESS_PURE_PYTHON"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

offdiag_moments = _impl.offdiag_moments


def available_backends():
    """Map backend name -> module for every backend importable here."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
