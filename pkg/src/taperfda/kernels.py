"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``TAPERFDA_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("TAPERFDA_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
philox4x32 = _impl.philox4x32
philox_uniforms = _impl.philox_uniforms
philox_normals = _impl.philox_normals
adaptive_neyman = _impl.adaptive_neyman
hard_threshold = _impl.hard_threshold
