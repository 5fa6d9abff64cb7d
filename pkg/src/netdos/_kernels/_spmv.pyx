# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled CSR kernel: sparse symmetric matrix times dense column block.

Rows are independent, so the optional OpenMP parallel path produces output
bit-identical to the serial path for any thread count.
"""

from cython.parallel import prange


cdef inline void _row(const long long[::1] indptr, const long long[::1] indices,
                      const double[::1] data, const double[:, ::1] x,
                      double[:, ::1] out, Py_ssize_t i, Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t jj, j, c
    cdef double w
    for c in range(k):
        out[i, c] = 0.0
    for jj in range(indptr[i], indptr[i + 1]):
        j = indices[jj]
        w = data[jj]
        for c in range(k):
            out[i, c] += w * x[j, c]


def csr_matvec(const long long[::1] indptr, const long long[::1] indices,
               const double[::1] data, const double[:, ::1] x,
               double[:, ::1] out, int threads=1):
    """out = A @ x for CSR arrays (indptr, indices, data); x is (n, k)."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t k = x.shape[1]
    cdef Py_ssize_t i
    if threads > 1:
        for i in prange(n, nogil=True, schedule="static", num_threads=threads):
            _row(indptr, indices, data, x, out, i, k)
    else:
        with nogil:
            for i in range(n):
                _row(indptr, indices, data, x, out, i, k)
    return None
