"""Select the compiled kernels when available, else the numpy fallback.

Set ``GAMMAKIT_PURE=1`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("GAMMAKIT_PURE", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:  # extension not built
        _impl = _pykernels

NAME = "compiled" if _impl is not _pykernels else "python"

elem_sym_batch = _impl.elem_sym_batch
poly_eval_batch = _impl.poly_eval_batch
torus_grid_top = _impl.torus_grid_top
