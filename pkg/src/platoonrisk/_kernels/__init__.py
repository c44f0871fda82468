"""Hot-kernel backend selection.

The compiled Cython extension is used when importable; otherwise the pure
numpy reference implementation is selected.  Setting the environment variable
``PLATOONRISK_PURE=1`` forces the pure backend (useful for the benchmark and
for testing both code paths).
"""

import os

if os.environ.get("PLATOONRISK_PURE"):
    from . import _ref as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _ref as _impl

        BACKEND = "python"

sdde_chunk = _impl.sdde_chunk
integrand_trapezoid = _impl.integrand_trapezoid
jacobi_eigh = _impl.jacobi_eigh

__all__ = ["BACKEND", "sdde_chunk", "integrand_trapezoid", "jacobi_eigh"]
