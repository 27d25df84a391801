"""Simulation kernel backend selection.

The compiled extension is used when it imported cleanly; the pure-Python
module is a drop-in replacement with identical semantics and identical
random streams. Set POPPROTO_PURE=1 to force the pure backend.
"""

from __future__ import annotations

import os

from . import pure

_impl = pure
if os.environ.get("POPPROTO_PURE") != "1":
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = pure

BACKEND = "pure" if _impl is pure else "compiled"

maj_run = _impl.maj_run
le_run = _impl.le_run
fourstate_run = _impl.fourstate_run
clock_run = _impl.clock_run
rumor_run = _impl.rumor_run
maj_update_code = _impl.maj_update_code
le_update_code = _impl.le_update_code
