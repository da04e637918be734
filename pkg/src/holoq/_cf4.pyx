# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled ordered product of 3x3 hermitian exponentials.

Computes ``exp(-i dt B[M-1]) ... exp(-i dt B[0])`` one factor at a time,
re-orthonormalizing the running product after every factor.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin
from scipy.linalg.cython_lapack cimport zheev

cnp.import_array()


cdef inline void _expm_herm3(const double complex[:, ::1] b, double dt,
                             double complex *a, double *w, double complex *work,
                             double *rwork, double complex[:, ::1] out) noexcept nogil:
    cdef int n = 3, lda = 3, lwork = 16, info = 0
    cdef char jobz = b'V'
    cdef char uplo = b'U'
    cdef int i, j, k
    cdef double complex acc, ph[3]
    # column-major copy of the hermitian part
    for i in range(3):
        for j in range(3):
            a[i + 3 * j] = 0.5 * (b[i, j] + b[j, i].conjugate())
    zheev(&jobz, &uplo, &n, a, &lda, w, work, &lwork, rwork, &info)
    for k in range(3):
        ph[k] = cos(dt * w[k]) - 1j * sin(dt * w[k])
    for i in range(3):
        for j in range(3):
            acc = 0
            for k in range(3):
                acc = acc + a[i + 3 * k] * ph[k] * a[j + 3 * k].conjugate()
            out[i, j] = acc


cdef inline void _orthonormalize(double complex[:, ::1] u) noexcept nogil:
    # modified Gram-Schmidt on columns
    cdef int c, p, r
    cdef double complex proj
    cdef double nrm
    for c in range(3):
        for p in range(c):
            proj = 0
            for r in range(3):
                proj = proj + u[r, p].conjugate() * u[r, c]
            for r in range(3):
                u[r, c] = u[r, c] - proj * u[r, p]
        nrm = 0
        for r in range(3):
            nrm = nrm + u[r, c].real * u[r, c].real + u[r, c].imag * u[r, c].imag
        nrm = sqrt(nrm)
        for r in range(3):
            u[r, c] = u[r, c] / nrm


def expm_product(b_stack, double dt, int stride=0):
    """Ordered product of exponentials; see :func:`holoq._kernels_py.expm_product`."""
    cdef const double complex[:, :, ::1] bs = np.ascontiguousarray(b_stack, dtype=np.complex128)
    cdef Py_ssize_t m = bs.shape[0]
    cdef Py_ssize_t step, i, j, k, slot = 0
    cdef double complex[:, ::1] acc = np.eye(3, dtype=np.complex128)
    cdef double complex[:, ::1] tmp = np.empty((3, 3), dtype=np.complex128)
    cdef double complex[:, ::1] ex = np.empty((3, 3), dtype=np.complex128)
    cdef double complex a[9]
    cdef double complex work[16]
    cdef double w[3]
    cdef double rwork[9]
    cdef double complex s
    cdef double complex[:, :, ::1] traj
    if bs.shape[1] != 3 or bs.shape[2] != 3:
        raise ValueError("expected a stack of 3x3 matrices")
    if stride > 0:
        traj_arr = np.empty((m // stride + 1, 3, 3), dtype=np.complex128)
        traj = traj_arr
        traj[0, :, :] = acc
        slot = 1
    with nogil:
        for step in range(m):
            _expm_herm3(bs[step], dt, a, w, work, rwork, ex)
            for i in range(3):
                for j in range(3):
                    s = 0
                    for k in range(3):
                        s = s + ex[i, k] * acc[k, j]
                    tmp[i, j] = s
            acc[:, :] = tmp
            _orthonormalize(acc)
            if stride > 0 and (step + 1) % stride == 0:
                traj[slot, :, :] = acc
                slot += 1
    if stride > 0:
        return np.asarray(acc).copy(), traj_arr
    return np.asarray(acc).copy(), None
