"""Kernel backend selection.

The native extension is preferred when it was built; otherwise the numpy
fallback is used. Set TONEPIPE_PURE_PYTHON=1 to force the fallback (useful
for benchmarking and debugging).
"""

import os

if os.environ.get("TONEPIPE_PURE_PYTHON") == "1":
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]


def backend_name() -> str:
    """'native' when the compiled kernels are active, else 'numpy'."""
    return "native" if kernels.NATIVE else "numpy"
