"""Backend selection for the image accumulation kernels.

The compiled Cython module is preferred when it imported cleanly; setting
ROISAR_PURE_PYTHON=1 in the environment forces the numpy fallback.  Both
backends implement the same two functions with identical semantics.
"""

import os

from . import reference as _reference

if os.environ.get("ROISAR_PURE_PYTHON"):
    _backend = _reference
else:
    try:
        from . import _accel as _backend
    except ImportError:
        _backend = _reference

accumulate_rva = _backend.accumulate_rva
accumulate_profile = _backend.accumulate_profile


def backend_name() -> str:
    return _backend.BACKEND
