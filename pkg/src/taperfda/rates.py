"""Finite-n diagnostics for boundary rates of tapered quadratic tests.

Limit statements are probed on a grid of n; the functions here report the
sequences with slope and band summaries and never issue asymptotic verdicts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import teststats
from .errors import IndexOutOfRange, InvalidRule, NoBracket
from .numerics import bisect

DEFAULT_N_GRID = tuple(2 ** k for k in range(6, 21))
INTERPOLATION = "linear in w^2 between integer indices"


@dataclass(frozen=True)
class TaperSummaries:
    S: float
    W: float
    U: float


def taper_summaries(weights, p, q):
    """``S = sum_{j<=p} w_j^2``, ``W = min_{j<=q} w_j^2`` and ``U = q W / S``."""
    w2 = np.asarray(weights, dtype=float) ** 2
    if not (1 <= q <= p <= w2.size) or int(q) != q or int(p) != p:
        raise IndexOutOfRange(f"need integers 1 <= q <= p <= {w2.size}, got p={p}, q={q}")
    S = float(w2[:p].sum())
    W = float(w2[:q].min())
    return TaperSummaries(S, W, q * W / S)


def _w2_at(w2, q):
    """w^2 at a real index q >= 1, interpolated linearly between integers."""
    lo = int(math.floor(q))
    if lo >= w2.size:
        return float(w2[-1])
    frac = q - lo
    return float((1.0 - frac) * w2[lo - 1] + frac * w2[lo]) if frac else float(w2[lo - 1])


def _u_real(w2, S, q):
    return q * _w2_at(w2, q) / S


# -- rules -----------------------------------------------------------------

def weight_rule(scheme):
    """Rule ``(n, p) -> weights`` from a scheme name such as ``opt`` or ``fzz:s=1``."""
    if callable(scheme):
        return scheme
    parsed = teststats.WeightScheme.parse(scheme) if isinstance(scheme, str) else scheme
    return lambda n, p: teststats.make_weights(parsed, p, n)


def log_ratio_p_rule(exponent=1.0 / 3.0):
    """``p_n = ceil((n^2 / log n)^exponent)``."""
    return lambda n: math.ceil((n * n / math.log(n)) ** exponent)


def power_p_rule(exponent):
    """``p_n = ceil(n^exponent)``."""
    return lambda n: math.ceil(n ** exponent)


def log_ratio_delta_rule(s):
    """``delta_n = (n^2 / log n)^(-s / (4s + 1))``."""
    st = 4.0 * s + 1.0
    return lambda n: (n * n / math.log(n)) ** (-s / st)


def _weights_for(rule, n, p):
    w = np.asarray(rule(n, p), dtype=float)
    if w.shape != (p,) or np.any(w <= 0):
        raise InvalidRule(f"weight rule gave an invalid vector at n={n}, p={p}")
    if np.any(np.diff(w) > 0):
        raise InvalidRule("weights must be nonincreasing")
    return w


def _check_sM(s, M):
    if s <= 0.5:
        raise InvalidRule("need s > 1/2")
    if M <= 0:
        raise InvalidRule("need M > 0")


def _slope(n_grid, seq):
    return float(np.polyfit(np.log(n_grid), np.log(seq), 1)[0])


@dataclass
class RateProbe:
    """Both boundedness sequences on an n grid, with ``q_n = (delta_n/M)^(-1/s)``."""

    n_grid: list
    p: list
    q: list
    seq_i: np.ndarray
    seq_ii: np.ndarray
    interpolation: str = INTERPOLATION

    @property
    def slope_i(self):
        return _slope(self.n_grid, self.seq_i)

    @property
    def slope_ii(self):
        return _slope(self.n_grid, self.seq_ii)

    @property
    def band_ratio_i(self):
        return float(self.seq_i.max() / self.seq_i.min())

    @property
    def band_ratio_ii(self):
        return float(self.seq_ii.max() / self.seq_ii.min())


def rate_probe(weight_rule_, p_rule, s, M, delta_rule, n_grid=DEFAULT_N_GRID):
    """Evaluate ``n^2 U(p_n) p_n^-st`` and ``n^2 U(p_n, q_n) q_n^-st``, st = 4s + 1.

    ``U(p) = U(p, p)``. q_n is real-valued; W at a non-integer index uses the
    linear interpolation of w^2.
    """
    _check_sM(s, M)
    wr = weight_rule(weight_rule_)
    st = 4.0 * s + 1.0
    ps, qs, seq_i, seq_ii = [], [], [], []
    for n in n_grid:
        p = int(p_rule(n))
        if p < 1:
            raise InvalidRule(f"p rule gave p={p} at n={n}")
        q = (delta_rule(n) / M) ** (-1.0 / s)
        if not 1.0 <= q <= p:
            raise InvalidRule(f"q_n={q:.4g} outside [1, p_n={p}] at n={n}")
        w2 = _weights_for(wr, n, p) ** 2
        S = w2.sum()
        seq_i.append(n * n * _u_real(w2, S, p) * p ** -st)
        seq_ii.append(n * n * _u_real(w2, S, q) * q ** -st)
        ps.append(p)
        qs.append(q)
    return RateProbe(list(n_grid), ps, qs, np.array(seq_i), np.array(seq_ii))


@dataclass
class BoundaryScan:
    """Per-n boundary rate estimates ``delta_n = M q_n^-s``.

    ``saturated[i]`` marks a root beyond p_n, clamped to p_n.
    """

    n_grid: list
    p: list
    q: np.ndarray
    delta: np.ndarray
    saturated: np.ndarray
    interpolation: str = INTERPOLATION


def boundary_rate_scan(weight_rule_, p_rule, s, M, n_grid=DEFAULT_N_GRID):
    """Solve ``n^2 U(p_n, q) q^-st = 1`` for real q in [1, p_n] at each n."""
    _check_sM(s, M)
    wr = weight_rule(weight_rule_)
    st = 4.0 * s + 1.0
    ps, qs, sat = [], [], []
    for n in n_grid:
        p = int(p_rule(n))
        if p < 1:
            raise InvalidRule(f"p rule gave p={p} at n={n}")
        w2 = _weights_for(wr, n, p) ** 2
        S = w2.sum()
        # log of the left-hand side, decreasing in log q
        g = lambda lq: 2.0 * math.log(n) + math.log(_u_real(w2, S, math.exp(lq))) - st * lq  # noqa: E731
        if g(0.0) < 0:
            raise NoBracket(f"no root with q >= 1 at n={n}")
        if g(math.log(p)) >= 0:
            q, clamped = float(p), True
        else:
            q, clamped = math.exp(bisect(g, 0.0, math.log(p), 1e-12)), False
        ps.append(p)
        qs.append(q)
        sat.append(clamped)
    q = np.array(qs)
    return BoundaryScan(list(n_grid), ps, q, M * q ** -s, np.array(sat))
