"""Small dense linear algebra, distribution functions, root finding and
seeded random streams.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import kernels
from .errors import (
    DimensionMismatch,
    InvalidParameter,
    NoBracket,
    NoConvergence,
    NotSPD,
)

TOL_LINALG = 1e-10
TOL_DIST = 1e-8
EPS_SPD_REL = 1e-12
BISECT_MAX_ITER = 200

_MASK64 = (1 << 64) - 1


def sym_inv_sqrt(a):
    """Inverse square root of a symmetric positive-definite matrix.

    Computed from the symmetric eigendecomposition ``A = V diag(l) V^T`` as
    ``V diag(l**-1/2) V^T``. Slight asymmetry from upstream arithmetic is
    tolerated and symmetrized away.

    Raises
    ------
    DimensionMismatch
        If ``a`` is not square.
    NotSPD
        If ``a`` is visibly asymmetric or an eigenvalue is at or below
        ``1e-12`` times the largest one.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    scale = np.abs(a).max() if a.size else 0.0
    if np.abs(a - a.T).max() > TOL_LINALG * max(scale, 1.0):
        raise NotSPD("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    vals, vecs = np.linalg.eigh(a)
    top = vals.max()
    if top <= 0 or vals.min() <= EPS_SPD_REL * top:
        raise NotSPD(f"eigenvalues {vals.min():.3g}..{top:.3g} are not safely positive")
    b = (vecs / np.sqrt(vals)) @ vecs.T
    return 0.5 * (b + b.T)


def std_normal(x):
    """Return ``(pdf, cdf)`` of the standard normal at ``x``."""
    x = float(x)
    pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    cdf = 0.5 * math.erfc(-x / math.sqrt(2.0))
    return pdf, cdf


def _central_sf(df, x):
    if x <= 0:
        return 1.0
    return float(special.gammaincc(0.5 * df, 0.5 * x))


def chisq_sf(df, noncentrality, x):
    """Upper tail ``P(X > x)`` of a (noncentral) chi-square variable.

    The central case is the regularized upper incomplete gamma function. The
    noncentral case sums the Poisson mixture of central tails, walking
    outward from the Poisson mode until the omitted mass is below 1e-12.
    """
    if df < 1 or int(df) != df:
        raise InvalidParameter(f"df must be a positive integer, got {df}")
    if noncentrality < 0:
        raise InvalidParameter(f"noncentrality must be >= 0, got {noncentrality}")
    if noncentrality == 0:
        return _central_sf(df, x)
    half = 0.5 * noncentrality
    mode = int(half)
    log_w = lambda k: -half + k * math.log(half) - math.lgamma(k + 1)  # noqa: E731
    total = 0.0
    mass = 0.0
    k = mode
    while k >= 0:
        w = math.exp(log_w(k))
        total += w * _central_sf(df + 2 * k, x)
        mass += w
        if w < 1e-17 and k < mode:
            break
        k -= 1
    k = mode + 1
    while 1.0 - mass > 1e-12:
        w = math.exp(log_w(k))
        total += w * _central_sf(df + 2 * k, x)
        mass += w
        k += 1
        if w < 1e-300:
            break
    return min(max(total, 0.0), 1.0)


def chisq_isf(df, noncentrality, prob):
    """Inverse of :func:`chisq_sf` in ``x`` by bisection."""
    if not 0 < prob < 1:
        raise InvalidParameter(f"prob must lie in (0, 1), got {prob}")
    hi = df + noncentrality + 10.0 * math.sqrt(2.0 * (df + 2 * noncentrality)) + 10.0
    while chisq_sf(df, noncentrality, hi) > prob:
        hi *= 2.0
    return bisect(lambda x: chisq_sf(df, noncentrality, x) - prob, 0.0, hi, 1e-10)


def bisect(f, lo, hi, tol, max_iter=BISECT_MAX_ITER):
    """Root of a scalar function with a sign change on ``[lo, hi]``.

    Stops when ``|f(x)| <= tol`` or the bracket is narrower than ``tol``.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NoBracket(f"f({lo})={flo:.3g} and f({hi})={fhi:.3g} have the same sign")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if abs(fmid) <= tol or (hi - lo) <= tol:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    raise NoConvergence(f"bisection did not converge in {max_iter} iterations")


@dataclass(frozen=True)
class RandomStream:
    """Counter-based stream keyed by ``(seed, stream_id)``.

    Draws come from Philox4x32-10 with the seed as key and the stream id in
    the high counter words, so a stream's values never depend on which other
    streams were drawn, or in what order.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if not (0 <= self.seed <= _MASK64 and 0 <= self.stream_id <= _MASK64):
            raise InvalidParameter("seed and stream_id must be 64-bit unsigned integers")

    def normals(self, length):
        return kernels.philox_normals(self.seed, self.stream_id, 1, length)[0]

    def uniforms(self, length):
        return kernels.philox_uniforms(self.seed, self.stream_id, 1, length)[0]


def gaussian_vector(stream, length):
    """``length`` independent standard normal draws from ``stream``."""
    if length < 1:
        raise InvalidParameter("length must be >= 1")
    return stream.normals(length)


def gaussian_block(seed, first_stream, n_streams, length):
    """Rows ``first_stream .. first_stream + n_streams - 1`` of a seed's streams."""
    return kernels.philox_normals(seed, first_stream, n_streams, length)


def uniform_block(seed, first_stream, n_streams, length):
    return kernels.philox_uniforms(seed, first_stream, n_streams, length)


def derive_seed(seed, *labels):
    """Child seed for a labelled sub-experiment (labels are small ints)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(v) for v in labels))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
