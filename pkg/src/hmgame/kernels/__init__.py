"""Hot inner loops of the HMM core.

The numba build is used when numba imports cleanly; set ``HMG_DISABLE_NUMBA=1``
to force the pure-numpy path. Both backends are importable directly as
``hmgame.kernels.numpy_backend`` and ``hmgame.kernels.numba_backend`` (the
latter is ``None`` when numba is unavailable).
"""

import os

from . import _numpy as numpy_backend

try:
    from . import _numba as numba_backend
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_backend = None

_disabled = os.environ.get("HMG_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")
backend = numpy_backend if (_disabled or numba_backend is None) else numba_backend
BACKEND_NAME = "numpy" if backend is numpy_backend else "numba"

forward = backend.forward
backward = backend.backward
transition_counts = backend.transition_counts
sample_path = backend.sample_path

__all__ = [
    "BACKEND_NAME",
    "backend",
    "backward",
    "forward",
    "numba_backend",
    "numpy_backend",
    "sample_path",
    "transition_counts",
]
