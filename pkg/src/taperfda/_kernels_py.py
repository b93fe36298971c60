"""Pure numpy implementation of the hot kernels.

This is the reference the compiled ``_kernels`` extension must agree with:
the Philox streams and the normal deviates are bit-identical between the two,
the statistics agree to rounding (summation order differs).
"""
import numpy as np
from scipy.special import ndtri

BACKEND = "python"

_M32 = np.uint64(0xFFFFFFFF)
_PHILOX_M0 = np.uint64(0xD2511F53)
_PHILOX_M1 = np.uint64(0xCD9E8D57)
_PHILOX_W0 = 0x9E3779B9
_PHILOX_W1 = 0xBB67AE85
_TWO26 = np.uint64(1 << 26)
_INV_TWO52 = 2.0 ** -52


def philox4x32(counters, key):
    """Philox4x32-10 block function.

    Parameters
    ----------
    counters : (m, 4) array of uint32
    key : pair of uint32

    Returns
    -------
    (m, 4) uint32 array
    """
    ctr = np.asarray(counters, dtype=np.uint64).reshape(-1, 4)
    c0, c1, c2, c3 = (ctr[:, i].copy() for i in range(4))
    k0, k1 = int(key[0]) & 0xFFFFFFFF, int(key[1]) & 0xFFFFFFFF
    c0, c1, c2, c3 = _rounds(c0, c1, c2, c3, k0, k1)
    return np.stack([c0, c1, c2, c3], axis=1).astype(np.uint32)


def _rounds(c0, c1, c2, c3, k0, k1):
    for r in range(10):
        if r:
            k0 = (k0 + _PHILOX_W0) & 0xFFFFFFFF
            k1 = (k1 + _PHILOX_W1) & 0xFFFFFFFF
        p0 = c0 * _PHILOX_M0
        p1 = c2 * _PHILOX_M1
        c0, c1, c2, c3 = (
            (p1 >> np.uint64(32)) ^ c1 ^ np.uint64(k0),
            p1 & _M32,
            (p0 >> np.uint64(32)) ^ c3 ^ np.uint64(k1),
            p0 & _M32,
        )
    return c0, c1, c2, c3


def philox_uniforms(seed, stream_start, n_streams, length):
    """Open-interval uniforms for streams ``stream_start .. stream_start+n_streams-1``.

    Row ``i`` depends only on ``(seed, stream_start + i)``; each block of four
    32-bit words yields two 52-bit uniforms ``(k + 1/2) / 2**52``.
    """
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    n_blocks = (length + 1) // 2
    streams = np.uint64(stream_start) + np.arange(n_streams, dtype=np.uint64)
    blocks = np.arange(n_blocks, dtype=np.uint64)
    shape = (n_streams, n_blocks)
    c0 = np.broadcast_to(blocks & _M32, shape).ravel().copy()
    c1 = np.broadcast_to(blocks >> np.uint64(32), shape).ravel().copy()
    c2 = np.broadcast_to((streams & _M32)[:, None], shape).ravel().copy()
    c3 = np.broadcast_to((streams >> np.uint64(32))[:, None], shape).ravel().copy()
    w0, w1, w2, w3 = _rounds(c0, c1, c2, c3, seed & 0xFFFFFFFF, seed >> 32)
    six = np.uint64(6)
    ua = ((w0 >> six) * _TWO26 + (w1 >> six)).astype(np.float64)
    ub = ((w2 >> six) * _TWO26 + (w3 >> six)).astype(np.float64)
    out = np.empty((n_streams, 2 * n_blocks))
    out[:, 0::2] = ((ua + 0.5) * _INV_TWO52).reshape(shape)
    out[:, 1::2] = ((ub + 0.5) * _INV_TWO52).reshape(shape)
    return out[:, :length]


def philox_normals(seed, stream_start, n_streams, length):
    return ndtri(philox_uniforms(seed, stream_start, n_streams, length))


def adaptive_neyman(sq):
    """Row-wise ``max_k (sum_{j<=k} sq_j - k) / sqrt(k)`` and its 1-based argmax."""
    sq = np.asarray(sq, dtype=np.float64)
    k = np.arange(1, sq.shape[1] + 1, dtype=np.float64)
    cand = (np.cumsum(sq, axis=1) - k) / np.sqrt(k)
    arg = np.argmax(cand, axis=1)
    return cand[np.arange(sq.shape[0]), arg], arg + 1


def hard_threshold(x, k_dstar, k_star, xi, mu, one_sided):
    """Row-wise hard-thresholding statistic on wavelet-indexed columns.

    ``x`` holds sqrt(n)*Y in flat wavelet order; ``xi[m]`` and ``mu[m]`` are
    the threshold and centring for level ``k_dstar + 1 + m``.
    """
    x = np.asarray(x, dtype=np.float64)
    low = (1 << (k_dstar + 1)) - 1
    total = (x[:, :low] ** 2).sum(axis=1) - low
    for m, k in enumerate(range(k_dstar + 1, k_star + 1)):
        block = x[:, (1 << k) - 1:(1 << (k + 1)) - 1]
        keep = block > xi[m] if one_sided else np.abs(block) > xi[m]
        total += np.where(keep, block ** 2, 0.0).sum(axis=1) - (1 << k) * mu[m]
    return total
