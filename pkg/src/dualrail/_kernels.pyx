# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled local-operator kernels (same contract as ``_kernels_py``)."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef object _layout(object d, object m, tuple targets):
    k = len(targets)
    strides = [d ** (m - 1 - t) for t in targets]
    local = np.indices((d,) * k).reshape(k, -1)
    offsets = np.zeros(d ** k, dtype=np.int64)
    for i in range(k):
        offsets += local[i] * strides[i]
    rest = [j for j in range(m) if j not in targets]
    bases = np.zeros(1, dtype=np.int64)
    for j in rest:
        s = d ** (m - 1 - j)
        bases = (bases[:, None] + np.arange(d, dtype=np.int64)[None, :] * s).reshape(-1)
    return np.ascontiguousarray(offsets, dtype=np.int64), np.ascontiguousarray(bases, dtype=np.int64)


_layout_cache = {}


cdef object _cached_layout(object d, object m, tuple targets):
    key = (d, m, targets)
    hit = _layout_cache.get(key)
    if hit is None:
        hit = _layout(d, m, targets)
        _layout_cache[key] = hit
    return hit


# Above this local dimension a BLAS matrix product beats the gather loop.
DENSE_BLAS_MIN = 32


cdef enum:
    BLOCK = 64


def apply_dense(psi, int d, int m, op, targets):
    cdef tuple tg = tuple(int(t) for t in targets)
    offs_a, bases_a = _cached_layout(d, m, tg)
    if offs_a.shape[0] >= DENSE_BLAS_MIN:
        return _apply_dense_blas(psi, d, m, op, tg)
    cdef const double[::1] src = np.ascontiguousarray(psi, dtype=np.complex128).reshape(-1).view(np.float64)
    opc = np.ascontiguousarray(op, dtype=np.complex128)
    cdef const double[:, ::1] ure = np.ascontiguousarray(opc.real)
    cdef const double[:, ::1] uim = np.ascontiguousarray(opc.imag)
    cdef const long long[::1] offs = offs_a
    cdef const long long[::1] bases = bases_a
    out_a = np.empty(src.shape[0] // 2, dtype=np.complex128)
    cdef double[::1] out = out_a.view(np.float64)
    cdef Py_ssize_t nb = bases.shape[0], D = offs.shape[0]
    cdef Py_ssize_t b0, nblk, bb, r, j, q
    cdef double ur, ui
    bufs = np.empty((4, D, BLOCK), dtype=np.float64)
    cdef double[:, ::1] xre = bufs[0]
    cdef double[:, ::1] xim = bufs[1]
    cdef double[::1] yre = bufs[2, 0]
    cdef double[::1] yim = bufs[3, 0]
    with nogil:
        b0 = 0
        while b0 < nb:
            nblk = nb - b0 if nb - b0 < BLOCK else BLOCK
            for j in range(D):
                for bb in range(nblk):
                    q = 2 * (bases[b0 + bb] + offs[j])
                    xre[j, bb] = src[q]
                    xim[j, bb] = src[q + 1]
            for r in range(D):
                for bb in range(nblk):
                    yre[bb] = 0.0
                    yim[bb] = 0.0
                for j in range(D):
                    ur = ure[r, j]
                    ui = uim[r, j]
                    if ur == 0.0 and ui == 0.0:
                        continue
                    for bb in range(nblk):
                        yre[bb] = yre[bb] + ur * xre[j, bb] - ui * xim[j, bb]
                        yim[bb] = yim[bb] + ur * xim[j, bb] + ui * xre[j, bb]
                for bb in range(nblk):
                    q = 2 * (bases[b0 + bb] + offs[r])
                    out[q] = yre[bb]
                    out[q + 1] = yim[bb]
            b0 = b0 + nblk
    return out_a


cdef object _apply_dense_blas(psi, int d, int m, op, tuple targets):
    k = len(targets)
    t = np.asarray(psi, dtype=np.complex128).reshape((d,) * m)
    t = np.moveaxis(t, targets, range(k))
    shape = t.shape
    out = np.asarray(op, dtype=np.complex128) @ t.reshape(d ** k, -1)
    out = np.moveaxis(out.reshape(shape), range(k), targets)
    return np.ascontiguousarray(out).reshape(-1)


def apply_diag(psi, int d, int m, diag, targets):
    cdef tuple tg = tuple(int(t) for t in targets)
    offs_a, bases_a = _cached_layout(d, m, tg)
    cdef const double[::1] src = np.ascontiguousarray(psi, dtype=np.complex128).reshape(-1).view(np.float64)
    cdef const double[::1] g = np.ascontiguousarray(diag, dtype=np.complex128).reshape(-1).view(np.float64)
    cdef const long long[::1] offs = offs_a
    cdef const long long[::1] bases = bases_a
    out_a = np.empty(src.shape[0] // 2, dtype=np.complex128)
    cdef double[::1] out = out_a.view(np.float64)
    cdef Py_ssize_t nb = bases.shape[0], D = offs.shape[0]
    cdef Py_ssize_t b, j, q
    cdef double gr, gi, sr, si
    with nogil:
        for j in range(D):
            gr = g[2 * j]
            gi = g[2 * j + 1]
            for b in range(nb):
                q = 2 * (bases[b] + offs[j])
                sr = src[q]
                si = src[q + 1]
                out[q] = gr * sr - gi * si
                out[q + 1] = gr * si + gi * sr
    return out_a
