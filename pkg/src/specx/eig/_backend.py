"""Select the compiled kernels when available, else the NumPy fallback.

Set ``SPECX_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and by the backend-agreement tests).
"""
import os

if os.environ.get("SPECX_PURE_PYTHON", "") not in ("", "0"):
    from . import _fallback as kernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:  # extension not built
        from . import _fallback as kernels

BACKEND = kernels.BACKEND


def num_threads():
    """Thread cap for the compiled loops, from ``SPECX_THREADS``."""
    try:
        value = int(os.environ.get("SPECX_THREADS", "1"))
    except ValueError:
        return 1
    return max(1, value)
