"""Hot-loop kernels: compiled Cython when available, numpy otherwise.

Set ``STREAMPART_PURE_PYTHON=1`` to force the numpy versions.
"""
import os

from . import _pykernels as py

compiled = None
if not os.environ.get("STREAMPART_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled
    except ImportError:
        compiled = None

_impl = compiled if compiled is not None else py
BACKEND = "cython" if compiled is not None else "numpy"

stream_counts = _impl.stream_counts
lwd_pass = _impl.lwd_pass

__all__ = ["BACKEND", "compiled", "py", "stream_counts", "lwd_pass"]
