"""Hot inner loops: compiled extension when available, NumPy fallback otherwise.

Set ``APWCERT_PURE_PYTHON=1`` to force the fallback (used by the backend
comparison tests and the benchmark).
"""
import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("APWCERT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

numerov_outward = _impl.numerov_outward
sph_jn_array = _impl.sph_jn_array
sph_in_scaled_array = _impl.sph_in_scaled_array
legendre_table = _impl.legendre_table

__all__ = [
    "BACKEND",
    "compiled_backend",
    "python_backend",
    "numerov_outward",
    "sph_jn_array",
    "sph_in_scaled_array",
    "legendre_table",
]
