"""Kernel lane selection.

The compiled Cython extension is preferred; the numpy lane is used when
the extension is missing or TANGLESIM_PURE=1 is set.  `BACKEND` reports
which lane is active.
"""

import os

from . import pure

if os.environ.get("TANGLESIM_PURE"):
    _impl = pure
    BACKEND = "pure"
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = pure
        BACKEND = "pure"

LEVEL_CUTOFF = pure.LEVEL_CUTOFF

propagate = _impl.propagate
selection_scores = _impl.selection_scores
pick_weighted = _impl.pick_weighted
