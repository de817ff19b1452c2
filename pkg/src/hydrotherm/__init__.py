"""One-way coupled hydrothermal finite-element simulator for layered ground."""

import os as _os

# Numba fixes its thread pool size at import; allow more workers than cores.
_os.environ.setdefault("NUMBA_NUM_THREADS", str(max(_os.cpu_count() or 1, 8)))
_os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

from .errors import ConfigurationError, HydrothermError, MeshError, OutputError, SolverError  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "HydrothermError",
    "MeshError",
    "OutputError",
    "SolverError",
    "__version__",
]
