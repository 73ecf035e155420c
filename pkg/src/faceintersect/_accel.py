"""Optional numba acceleration.

Set ``FI_DISABLE_NUMBA=1`` in the environment before importing the package to
force the pure-numpy code paths.  When numba is not installed the numpy paths
are used automatically.
"""

import os

_DISABLED = os.environ.get("FI_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:  # pragma: no cover - exercised implicitly
    if _DISABLED:
        raise ImportError
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _njit = None
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise returns ``None``.

    Callers keep a numpy implementation next to every jitted one and pick
    whichever is live, so a ``None`` here simply means "use numpy".
    """
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return None
        return lambda f: None
    return _njit(*args, **kwargs)
