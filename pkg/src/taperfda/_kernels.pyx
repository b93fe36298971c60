# cython: language_level=3
"""Compiled hot kernels: Philox streams, normal deviates, AN and HT batches.

Mirrors ``_kernels_py`` function for function.
"""
import numpy as np

from libc.math cimport sqrt, fabs
from libc.stdint cimport uint32_t, uint64_t
from scipy.special.cython_special cimport ndtri

BACKEND = "cython"

cdef uint64_t M0 = 0xD2511F53
cdef uint64_t M1 = 0xCD9E8D57
cdef uint32_t W0 = 0x9E3779B9
cdef uint32_t W1 = 0xBB67AE85
cdef double INV_TWO52 = 2.0 ** -52


cdef inline void _philox(uint32_t* c, uint32_t k0, uint32_t k1) noexcept nogil:
    cdef uint64_t p0, p1
    cdef uint32_t a0, a1, a2, a3
    cdef int r
    for r in range(10):
        if r:
            k0 = k0 + W0
            k1 = k1 + W1
        p0 = <uint64_t>c[0] * M0
        p1 = <uint64_t>c[2] * M1
        a0 = <uint32_t>(p1 >> 32) ^ c[1] ^ k0
        a1 = <uint32_t>p1
        a2 = <uint32_t>(p0 >> 32) ^ c[3] ^ k1
        a3 = <uint32_t>p0
        c[0] = a0
        c[1] = a1
        c[2] = a2
        c[3] = a3


def philox4x32(counters, key):
    cdef uint32_t[:, ::1] ctr = np.ascontiguousarray(
        np.asarray(counters, dtype=np.uint32).reshape(-1, 4))
    out = np.array(ctr, copy=True)
    cdef uint32_t[:, ::1] o = out
    cdef uint32_t k0 = <uint32_t>(int(key[0]) & 0xFFFFFFFF)
    cdef uint32_t k1 = <uint32_t>(int(key[1]) & 0xFFFFFFFF)
    cdef Py_ssize_t i
    with nogil:
        for i in range(o.shape[0]):
            _philox(&o[i, 0], k0, k1)
    return out


cdef void _fill(double[:, ::1] out, uint64_t seed, uint64_t stream_start,
                bint normal) noexcept nogil:
    cdef Py_ssize_t i, b, col
    cdef Py_ssize_t n = out.shape[0], length = out.shape[1]
    cdef uint64_t stream
    cdef uint32_t c[4]
    cdef uint32_t k0 = <uint32_t>seed, k1 = <uint32_t>(seed >> 32)
    cdef double u
    cdef uint64_t blk
    for i in range(n):
        stream = stream_start + <uint64_t>i
        col = 0
        blk = 0
        while col < length:
            c[0] = <uint32_t>blk
            c[1] = <uint32_t>(blk >> 32)
            c[2] = <uint32_t>stream
            c[3] = <uint32_t>(stream >> 32)
            _philox(c, k0, k1)
            u = (<double>((<uint64_t>(c[0] >> 6) << 26) + (c[1] >> 6)) + 0.5) * INV_TWO52
            out[i, col] = ndtri(u) if normal else u
            col += 1
            if col < length:
                u = (<double>((<uint64_t>(c[2] >> 6) << 26) + (c[3] >> 6)) + 0.5) * INV_TWO52
                out[i, col] = ndtri(u) if normal else u
                col += 1
            blk += 1


def philox_uniforms(seed, stream_start, n_streams, length):
    out = np.empty((n_streams, length))
    cdef double[:, ::1] o = out
    cdef uint64_t s = int(seed) & 0xFFFFFFFFFFFFFFFF
    cdef uint64_t st = int(stream_start)
    with nogil:
        _fill(o, s, st, False)
    return out


def philox_normals(seed, stream_start, n_streams, length):
    out = np.empty((n_streams, length))
    cdef double[:, ::1] o = out
    cdef uint64_t s = int(seed) & 0xFFFFFFFFFFFFFFFF
    cdef uint64_t st = int(stream_start)
    with nogil:
        _fill(o, s, st, True)
    return out


def adaptive_neyman(sq):
    cdef const double[:, ::1] a = np.ascontiguousarray(sq, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0], p = a.shape[1], i, k
    values = np.empty(n)
    khat = np.empty(n, dtype=np.int64)
    cdef double[::1] v = values
    cdef long long[::1] kh = khat
    cdef double run, cand, best
    cdef long long arg
    with nogil:
        for i in range(n):
            run = 0.0
            best = 0.0
            arg = 0
            for k in range(p):
                run = run + a[i, k]
                cand = (run - (k + 1.0)) / sqrt(k + 1.0)
                if k == 0 or cand > best:
                    best = cand
                    arg = k + 1
            v[i] = best
            kh[i] = arg
    return values, khat


def hard_threshold(x, int k_dstar, int k_star, xi, mu, bint one_sided):
    cdef const double[:, ::1] a = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] xv = np.ascontiguousarray(xi, dtype=np.float64)
    cdef const double[::1] mv = np.ascontiguousarray(mu, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0], i, j, lo, hi
    cdef Py_ssize_t low = (1 << (k_dstar + 1)) - 1
    cdef int k, m
    cdef double total, y, thr
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            total = 0.0
            for j in range(low):
                total = total + a[i, j] * a[i, j]
            total = total - low
            for k in range(k_dstar + 1, k_star + 1):
                m = k - k_dstar - 1
                thr = xv[m]
                lo = (1 << k) - 1
                hi = (1 << (k + 1)) - 1
                for j in range(lo, hi):
                    y = a[i, j]
                    if (y > thr) if one_sided else (fabs(y) > thr):
                        total = total + y * y
                total = total - (1 << k) * mv[m]
            o[i] = total
    return out
