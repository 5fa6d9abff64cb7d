"""Numpy fallback for the CSR kernel; used when the extension is not built."""

import numpy as np

# Cap on the (nnz, cols) gather buffer, in float64 elements (~128 MB).
_BUFFER_ELEMS = 1 << 24


def csr_matvec(indptr, indices, data, x, out, threads=1):
    """out = A @ x via gather + segmented reduction. `threads` is ignored.

    The reduction runs over non-empty rows only: their starts are strictly
    increasing and each segment ends exactly at the next stored entry, which
    sidesteps np.add.reduceat's zero-length-segment behavior.
    """
    nnz = data.shape[0]
    if nnz == 0 or x.shape[1] == 0:
        out[:] = 0.0
        return None
    starts = indptr[:-1]
    nonempty = np.flatnonzero(indptr[1:] > starts)
    seg = starts[nonempty]
    ncol = x.shape[1]
    step = max(1, _BUFFER_ELEMS // nnz)
    out[:] = 0.0
    for lo in range(0, ncol, step):
        hi = min(ncol, lo + step)
        prod = data[:, None] * x[indices, lo:hi]
        out[nonempty, lo:hi] = np.add.reduceat(prod, seg, axis=0)
    return None
