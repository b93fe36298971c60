"""Tapered quadratic forms, adaptive Neyman truncation and hard thresholding.

Each statistic has a batch form operating on rows of ``x = sqrt(n) * Y``
(shape ``(iters, p)`` for nu = 1, ``(iters, p, nu)`` in general), which the
Monte Carlo engine uses, and a single-model form taking a DiscreteModel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    InsufficientP,
    InvalidParameter,
    InvalidPosition,
    InvalidWeight,
    LengthMismatch,
    MissingCutoff,
    NotMonotone,
    UnsupportedNu,
)
from .numerics import std_normal

HTBAR_S_STEP = 1e-3


@dataclass(frozen=True)
class WeightScheme:
    """One of ``opt``, ``uwq``, ``cvm``, ``fzz`` (needs ``s``) or ``custom``."""

    variant: str
    s: float | None = None
    custom: tuple | None = None
    monotone: bool = False

    def __post_init__(self):
        if self.variant not in ("opt", "uwq", "cvm", "fzz", "custom"):
            raise InvalidParameter(f"unknown weight scheme {self.variant!r}")
        if self.variant == "fzz" and (self.s is None or self.s <= 0.5):
            raise InvalidParameter("fzz weights need s > 1/2")
        if self.variant == "custom" and self.custom is None:
            raise InvalidParameter("custom scheme needs a weight list")

    @classmethod
    def parse(cls, text):
        """Parse ``opt``, ``uwq``, ``cvm`` or ``fzz:s=<value>``."""
        text = text.strip().lower()
        if text.startswith("fzz"):
            _, _, arg = text.partition(":")
            key, _, value = arg.partition("=")
            if key.strip() != "s" or not value:
                raise InvalidParameter(f"expected fzz:s=<value>, got {text!r}")
            return cls("fzz", s=float(value))
        return cls(text)

    @property
    def label(self):
        return f"fzz:s={self.s:g}" if self.variant == "fzz" else self.variant


def fzz_xi(s, n):
    return n ** (-4.0 * s / (4.0 * s + 1.0))


def make_weights(scheme, p, n=1):
    """Weight vector ``w_1..w_p`` for a tapered quadratic form.

    ``opt``: j^-1/2; ``uwq``: 1; ``cvm``: j^-2; ``fzz``:
    1 - (j^2s xi)^2 / (1 + j^2s xi)^2 with xi = n^(-4s/(4s+1)), evaluated as
    (1 + 2x) / (1 + x)^2 so it stays positive for large j.
    """
    if isinstance(scheme, str):
        scheme = WeightScheme.parse(scheme)
    if p < 1:
        raise InvalidParameter("p must be >= 1")
    j = np.arange(1, p + 1, dtype=float)
    if scheme.variant == "opt":
        w = j ** -0.5
    elif scheme.variant == "uwq":
        w = np.ones(p)
    elif scheme.variant == "cvm":
        w = j ** -2.0
    elif scheme.variant == "fzz":
        x = j ** (2.0 * scheme.s) * fzz_xi(scheme.s, n)
        w = (1.0 + 2.0 * x) / (1.0 + x) ** 2
    else:
        w = np.asarray(scheme.custom, dtype=float)
        if w.shape != (p,):
            raise LengthMismatch(f"custom weights have length {w.size}, expected {p}")
        if scheme.monotone and np.any(np.diff(w) > 0):
            raise NotMonotone("custom weights were declared nonincreasing but increase")
    if not np.all((w > 0) & (w <= 1)):
        raise InvalidWeight("weights must lie in (0, 1]")
    return w


# -- quadratic forms -------------------------------------------------------

def _squares(x):
    x = np.asarray(x, dtype=float)
    return x ** 2 if x.ndim == 2 else (x ** 2).sum(axis=2)


def quadratic_batch(x, weights):
    """``sum_j w_j ||x_j||^2`` for each row."""
    sq = _squares(x)
    w = np.asarray(weights, dtype=float)
    if sq.shape[1] != w.size:
        raise LengthMismatch(f"{sq.shape[1]} frequencies but {w.size} weights")
    return sq @ w


def quadratic_stat(model, weights):
    """``n sum_j w_j ||Y_j||^2``."""
    w = np.asarray(weights, dtype=float)
    if w.size != model.p:
        raise LengthMismatch(f"{model.p} frequencies but {w.size} weights")
    return float(model.n * ((model.Y ** 2).sum(axis=1) @ w))


# -- adaptive Neyman -------------------------------------------------------

def adaptive_neyman_batch(x):
    """Returns ``(AN, k_hat)`` per row; ``x`` must be 2-D (nu = 1)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise UnsupportedNu("adaptive Neyman needs nu = 1")
    return kernels.adaptive_neyman(x ** 2)


def adaptive_neyman(model, return_k=False):
    """``max_k (N_k - k) / sqrt(k)`` with ``N_k = n sum_{j<=k} Y_j^2``.

    The smallest maximizing k is the truncation diagnostic, returned when
    ``return_k`` is set.
    """
    if model.nu != 1:
        raise UnsupportedNu(f"adaptive Neyman needs nu = 1, got {model.nu}")
    vals, ks = adaptive_neyman_batch(math.sqrt(model.n) * model.Y[:, 0][None])
    return (float(vals[0]), int(ks[0])) if return_k else float(vals[0])


# -- wavelet indexing and hard thresholding --------------------------------

def wavelet_index(k, l):
    """Flat index of position l (1..2^k) at level k: ``2^k + l - 1``."""
    if k < 0 or not 1 <= l <= (1 << k):
        raise InvalidPosition(f"position {l} is not in 1..2^{k}")
    return (1 << k) + l - 1


def level_of(j):
    """Inverse of :func:`wavelet_index`."""
    if j < 1:
        raise InvalidPosition(f"flat index must be >= 1, got {j}")
    k = int(j).bit_length() - 1
    return k, j - (1 << k) + 1


def mu_ht(xi):
    """``E[eta^2 1{|eta| > xi}]`` for standard normal eta."""
    if xi < 0:
        raise InvalidParameter("threshold must be nonnegative")
    pdf, cdf = std_normal(xi)
    return 2.0 * (xi * pdf + (1.0 - cdf))


def ceil_exceed(x):
    """Smallest integer strictly greater than x."""
    return math.floor(x) + 1


@dataclass(frozen=True)
class HTParams:
    n: int
    s: float
    k_star: int
    k_dstar: int
    one_sided: bool = False

    @classmethod
    def from_s(cls, n, s, one_sided=False):
        """Finite-sample settings: ``k* = ceil(log2 n)``,
        ``k** = ceil_exceed(log2 n / (2s + 1/2))`` capped at k*."""
        if s <= 0.5:
            raise InvalidParameter("HT needs s > 1/2")
        log2n = math.log2(n)
        k_star = math.ceil(log2n)
        k_dstar = min(ceil_exceed(log2n / (2.0 * s + 0.5)), k_star)
        return cls(n, s, k_star, k_dstar, one_sided)

    @property
    def levels(self):
        return list(range(self.k_dstar + 1, self.k_star + 1))

    @property
    def thresholds(self):
        return np.array([math.sqrt((k - self.k_dstar + 8) * math.log(2.0)) for k in self.levels])

    @property
    def centring(self):
        return np.array([mu_ht(xi) for xi in self.thresholds])

    @property
    def p_required(self):
        return (1 << (self.k_star + 1)) - 1


def ht_batch(x, params):
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise UnsupportedNu("hard thresholding needs nu = 1")
    if x.shape[1] < params.p_required:
        raise InsufficientP(f"need p >= {params.p_required}, got {x.shape[1]}")
    return kernels.hard_threshold(
        np.ascontiguousarray(x[:, :params.p_required]),
        params.k_dstar,
        params.k_star,
        params.thresholds,
        params.centring,
        params.one_sided,
    )


def ht_stat(model, params):
    """Hard-thresholding statistic: centred squares on levels up to k**, and
    thresholded squares minus their null mean on levels k**+1..k*."""
    if model.nu != 1:
        raise UnsupportedNu(f"hard thresholding needs nu = 1, got {model.nu}")
    return float(ht_batch(math.sqrt(model.n) * model.Y[:, 0][None], params)[0])


def ht_configurations(n, s_lo, s_hi, one_sided=False, step=HTBAR_S_STEP):
    """Distinct HT settings over ``[s_lo, s_hi]``, keyed by k**.

    The s grid runs from s_lo in steps of ``step`` and always includes s_hi;
    the first s reaching each k** represents it.
    """
    if not 0.5 < s_lo < s_hi:
        raise InvalidParameter("need 1/2 < s_lo < s_hi")
    grid = np.append(np.arange(s_lo, s_hi, step), s_hi)
    configs = {}
    for s in grid:
        params = HTParams.from_s(n, float(s), one_sided)
        configs.setdefault(params.k_dstar, params)
    return dict(sorted(configs.items()))


def ht_bar_batch(x, configs, cutoffs):
    """``max over configurations of HT(s) / c(s)`` per row."""
    missing = [k for k in configs if k not in cutoffs]
    if missing:
        raise MissingCutoff(f"no cutoff for k** in {missing}")
    ratios = [ht_batch(x, params) / cutoffs[k] for k, params in configs.items()]
    return np.max(np.vstack(ratios), axis=0)


def ht_bar(model, s_lo, s_hi, cutoffs, one_sided=False):
    """Combined thresholding statistic; ``cutoffs`` maps k** to c_{n,alpha}(s)."""
    if model.nu != 1:
        raise UnsupportedNu(f"hard thresholding needs nu = 1, got {model.nu}")
    configs = ht_configurations(model.n, s_lo, s_hi, one_sided)
    return float(ht_bar_batch(math.sqrt(model.n) * model.Y[:, 0][None], configs, cutoffs)[0])
