# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled inner loops for the split-step propagator and the Wilson-line product.

Signatures and semantics mirror :mod:`gauge_optics._kernels_py` exactly.
"""
import numpy as np

ctypedef double complex cplx


def apply_potential(cplx[:, ::1] f, cplx[:, ::1] g,
                    const cplx[:, ::1] e11, const cplx[:, ::1] e12,
                    const cplx[:, ::1] e21, const cplx[:, ::1] e22,
                    const double[:, ::1] weight=None):
    """In place: (f, g) <- weight * E @ (f, g) at every grid point."""
    cdef Py_ssize_t n0 = f.shape[0], n1 = f.shape[1], i, j
    cdef cplx a, b
    cdef double w
    if weight is None:
        with nogil:
            for i in range(n0):
                for j in range(n1):
                    a = f[i, j]
                    b = g[i, j]
                    f[i, j] = e11[i, j] * a + e12[i, j] * b
                    g[i, j] = e21[i, j] * a + e22[i, j] * b
    else:
        with nogil:
            for i in range(n0):
                for j in range(n1):
                    a = f[i, j]
                    b = g[i, j]
                    w = weight[i, j]
                    f[i, j] = w * (e11[i, j] * a + e12[i, j] * b)
                    g[i, j] = w * (e21[i, j] * a + e22[i, j] * b)


def ordered_product(const cplx[:, :, ::1] factors):
    """F[n-1] @ ... @ F[1] @ F[0] for a stack of 2x2 matrices."""
    cdef Py_ssize_t n = factors.shape[0], k
    cdef cplx w00 = 1, w01 = 0, w10 = 0, w11 = 1
    cdef cplx t00, t01, t10, t11
    with nogil:
        for k in range(n):
            t00 = factors[k, 0, 0] * w00 + factors[k, 0, 1] * w10
            t01 = factors[k, 0, 0] * w01 + factors[k, 0, 1] * w11
            t10 = factors[k, 1, 0] * w00 + factors[k, 1, 1] * w10
            t11 = factors[k, 1, 0] * w01 + factors[k, 1, 1] * w11
            w00 = t00
            w01 = t01
            w10 = t10
            w11 = t11
    out = np.empty((2, 2), dtype=np.complex128)
    out[0, 0] = w00
    out[0, 1] = w01
    out[1, 0] = w10
    out[1, 1] = w11
    return out
