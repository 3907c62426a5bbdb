"""Hot-kernel backend selection.

The compiled Cython module is preferred; the numpy fallback is used when
the extension is missing or ``SCHOTTKY_LAB_PURE`` is set to a non-empty
value.  Both expose the same three functions.
"""

import os

from . import _slow

if os.environ.get("SCHOTTKY_LAB_PURE"):
    _impl = _slow
else:
    try:
        from . import _fast as _impl
    except ImportError:  # extension not built
        _impl = _slow

BACKEND = _impl.BACKEND
shell_displacements = _impl.shell_displacements
dfd = _impl.dfd
bbox_pairs = _impl.bbox_pairs

__all__ = ["BACKEND", "shell_displacements", "dfd", "bbox_pairs"]
