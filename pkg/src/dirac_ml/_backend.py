"""Kernel backend selection and thread budget.

The hot finite-element kernels ship in two flavours: a numba-compiled
element loop and a vectorized pure-numpy fallback.  The active flavour is
chosen once at import time:

* ``DIRAC_ML_BACKEND=numpy`` forces the numpy fallback,
* ``DIRAC_ML_BACKEND=numba`` forces compilation (ImportError if numba is
  missing),
* unset: numba when importable, numpy otherwise.

``DIRAC_ML_THREADS`` caps the worker count used for embarrassingly
parallel sweeps (radial channels, study points).
"""

from __future__ import annotations

import os

_VALID = ("numba", "numpy")


def _pick_backend() -> str:
    req = os.environ.get("DIRAC_ML_BACKEND", "").strip().lower()
    if req and req not in _VALID:
        raise ValueError(f"DIRAC_ML_BACKEND must be one of {_VALID}, got {req!r}")
    if req == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if req == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _pick_backend()
USE_NUMBA = BACKEND == "numba"


def thread_count() -> int:
    """Worker budget for parallel sweeps (>= 1)."""
    raw = os.environ.get("DIRAC_ML_THREADS", "").strip()
    if raw:
        return max(1, int(raw))
    return max(1, os.cpu_count() or 1)
