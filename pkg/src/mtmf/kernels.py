"""Hot-kernel dispatch.

The compiled Cython core is used when it was built; otherwise the numpy
fallback in :mod:`mtmf._kernels_py` takes over.  Set ``MTMF_PURE_PYTHON=1``
to force the fallback.  Both produce bit-identical results.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("MTMF_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
power_derivative = _impl.power_derivative
series_sum = _impl.series_sum
count_compositions = _impl.count_compositions


def backends() -> dict:
    """All importable implementations keyed by name (for tests/benchmarks)."""
    out = {"python": _kernels_py}
    try:
        from . import _ckernels  # type: ignore[attr-defined]

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
