"""Backend selection for the hot kernels.

The compiled ``_core`` module is used when importable; setting
``STOLARSKYFV_PURE_PYTHON=1`` forces the pure-Python fallback.
"""
import os

from . import _pure

BACKEND = "python"
_impl = _pure
if not os.environ.get("STOLARSKYFV_PURE_PYTHON"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pure

log_weight = _impl.log_weight
thomas = _impl.thomas
rk4_linear = _impl.rk4_linear


def available_backends():
    out = {"python": _pure}
    try:
        from . import _core

        out["cython"] = _core
    except ImportError:  # pragma: no cover
        pass
    return out
