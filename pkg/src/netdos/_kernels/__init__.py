"""Hot sparse kernels with a compiled fast path and a numpy fallback.

The Cython extension is selected at import time when available; set
``NETDOS_PURE_PYTHON=1`` to force the numpy implementation. Each backend is
deterministic (same inputs, same bits, any thread count); across backends
results agree to summation roundoff. ``benchmarks/bench_spmv.py`` compares
their speed.
"""

from __future__ import annotations

import os

import numpy as np

_force_py = os.environ.get("NETDOS_PURE_PYTHON", "").strip() not in ("", "0")

if _force_py:
    from . import _csr_py as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _spmv as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from . import _csr_py as _impl  # type: ignore[no-redef]

        BACKEND = "numpy"


def csr_matvec(indptr, indices, data, x, out=None, threads=1):
    """y = A @ x for CSR arrays. Accepts x of shape (n,) or (n, k).

    Arrays must be int64/float64; `out`, when given, must be a C-contiguous
    (n, k) float64 buffer.
    """
    one_d = x.ndim == 1
    x2 = x[:, None] if one_d else x
    x2 = np.ascontiguousarray(x2, dtype=np.float64)
    n = indptr.shape[0] - 1
    if out is None:
        out = np.empty((n, x2.shape[1]))
    _impl.csr_matvec(indptr, indices, data, x2, out, threads)
    return out[:, 0] if one_d else out
