"""Hot-loop kernels with a compiled core and a pure-Python fallback.

The Cython extension `_ckern` is preferred; if it was not built (no
compiler at install time, CLAUSEVIZ_PURE=1, ...) the pure-Python mirror
`_pykern` is selected at import.  Both produce bit-identical results;
`IMPLEMENTATION` reports which one is active.  Set CLAUSEVIZ_FORCE_PURE=1
in the environment to skip the extension at import time.
"""

from __future__ import annotations

import os

from . import _pykern

if os.environ.get("CLAUSEVIZ_FORCE_PURE") == "1":
    _impl = _pykern
    IMPLEMENTATION = "python"
else:
    try:
        from . import _ckern as _impl
        IMPLEMENTATION = "cython"
    except ImportError:
        _impl = _pykern
        IMPLEMENTATION = "python"

repulsion_forces = _impl.repulsion_forces
propagate_round = _impl.propagate_round


def available_implementations() -> dict:
    """Name -> module for every kernel implementation importable here."""
    impls = {"python": _pykern}
    try:
        from . import _ckern
        impls["cython"] = _ckern
    except ImportError:
        pass
    return impls
