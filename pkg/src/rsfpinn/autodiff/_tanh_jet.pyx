# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled tanh-jet kernels; same contract as ``_kernels_py``."""
import numpy as np
from libc.math cimport tanh


def tanh_jet_forward(pre):
    pre = np.ascontiguousarray(pre, dtype=np.float64)
    cdef Py_ssize_t S = pre.shape[0]
    cdef Py_ssize_t K = (S - 1) // 2
    out = np.empty_like(pre)
    cdef double[:, ::1] p = pre.reshape(S, -1)
    cdef double[:, ::1] o = out.reshape(S, -1)
    cdef Py_ssize_t n = p.shape[1]
    cdef Py_ssize_t i, j
    cdef double t, s, ts, d
    with nogil:
        for i in range(n):
            t = tanh(p[0, i])
            s = 1.0 - t * t
            ts = t * s
            o[0, i] = t
            for j in range(1, K + 1):
                d = p[j, i]
                o[j, i] = s * d
                o[K + j, i] = s * p[K + j, i] - 2.0 * ts * d * d
    return out


def tanh_jet_backward(pre, post, grad):
    pre = np.ascontiguousarray(pre, dtype=np.float64)
    post = np.ascontiguousarray(post, dtype=np.float64)
    grad = np.ascontiguousarray(grad, dtype=np.float64)
    cdef Py_ssize_t S = pre.shape[0]
    cdef Py_ssize_t K = (S - 1) // 2
    gpre = np.empty_like(pre)
    cdef double[:, ::1] p = pre.reshape(S, -1)
    cdef double[:, ::1] q = post.reshape(S, -1)
    cdef double[:, ::1] g = grad.reshape(S, -1)
    cdef double[:, ::1] o = gpre.reshape(S, -1)
    cdef Py_ssize_t n = p.shape[1]
    cdef Py_ssize_t i, j
    cdef double t, s, ts, c3, gv, d, g1, g2
    with nogil:
        for i in range(n):
            t = q[0, i]
            s = 1.0 - t * t
            ts = t * s
            c3 = 2.0 * s * (1.0 - 3.0 * t * t)
            gv = g[0, i] * s
            for j in range(1, K + 1):
                d = p[j, i]
                g1 = g[j, i]
                g2 = g[K + j, i]
                gv = gv - 2.0 * ts * (g1 * d + g2 * p[K + j, i]) - c3 * g2 * d * d
                o[j, i] = g1 * s - 4.0 * ts * g2 * d
                o[K + j, i] = g2 * s
            o[0, i] = gv
    return gpre
