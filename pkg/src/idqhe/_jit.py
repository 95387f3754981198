"""Numba shim.

Set ``IDQHE_DISABLE_NUMBA=1`` to force the pure-numpy kernels. When numba is
missing the numpy path is used automatically.
"""

import logging
import os

logger = logging.getLogger(__name__)

_FLAG = os.environ.get("IDQHE_DISABLE_NUMBA", "").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("disabled by IDQHE_DISABLE_NUMBA")
    import numba

    njit = numba.njit
    NUMBA_ENABLED = True
except ImportError as exc:
    logger.debug("numba unavailable (%s), using numpy kernels", exc)

    def njit(pyfunc=None, **kwargs):
        def wrap(func):
            return func

        return wrap if pyfunc is None else wrap(pyfunc)

    NUMBA_ENABLED = False

BACKEND = "numba" if NUMBA_ENABLED else "numpy"
