"""Functional linear model: per-frequency least squares, the hypothesis-tailored
transformation to the discrete model, variance estimates and F statistics.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations

import numpy as np
from scipy import stats

from .errors import (
    DegenerateHypothesis,
    DimensionMismatch,
    EmptyGroup,
    InsufficientDF,
    InvalidParameter,
    LengthMismatch,
    RankDeficient,
)
from .numerics import sym_inv_sqrt

EPS_RANK_REL = 1e-10


def _check_full_rank(m, what):
    sv = np.linalg.svd(m, compute_uv=False)
    if sv.size == 0 or sv.min() <= EPS_RANK_REL * sv.max():
        raise RankDeficient(f"{what} is not of full column rank")


@dataclass
class DesignSpec:
    """Essence regressor matrix ``X`` (N x P) and hypothesis matrix ``L`` (P x nu)."""

    X: np.ndarray
    L: np.ndarray

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        L = np.asarray(self.L, dtype=float)
        self.L = L.reshape(-1, 1) if L.ndim == 1 else L
        N, P = self.X.shape
        if self.L.shape[0] != P:
            raise DimensionMismatch(f"L has {self.L.shape[0]} rows but X has {P} columns")
        if not self.nu <= P <= N:
            raise DimensionMismatch(f"need nu <= P <= N, got nu={self.nu}, P={P}, N={N}")
        _check_full_rank(self.X, "X")
        _check_full_rank(self.L, "L")

    @property
    def N(self):
        return self.X.shape[0]

    @property
    def P(self):
        return self.X.shape[1]

    @property
    def nu(self):
        return self.L.shape[1]

    def contrast(self):
        """``H L^T (X^T X)^{-1} X^T`` with ``H = {L^T (X^T X)^{-1} L}^{-1/2}``."""
        xtx_inv = np.linalg.inv(self.X.T @ self.X)
        H = sym_inv_sqrt(self.L.T @ xtx_inv @ self.L)
        return H @ self.L.T @ xtx_inv @ self.X.T


@dataclass
class DiscreteModel:
    """Per-frequency nu-vectors ``Y[j-1]`` with replicate count ``n``.

    ``df2`` is set (to nN - P) when the scales were estimated rather than known.
    """

    Y: np.ndarray
    n: int
    sigma: np.ndarray
    df2: int | None = None

    def __post_init__(self):
        Y = np.asarray(self.Y, dtype=float)
        self.Y = Y.reshape(-1, 1) if Y.ndim == 1 else Y
        self.sigma = np.broadcast_to(np.asarray(self.sigma, dtype=float), (self.p,)).copy()
        if np.any(self.sigma <= 0):
            raise InvalidParameter("all scale values must be positive")
        if not np.all(np.isfinite(self.Y)):
            raise InvalidParameter("Y must be finite")

    @property
    def p(self):
        return self.Y.shape[0]

    @property
    def nu(self):
        return self.Y.shape[1]

    @property
    def estimated(self):
        return self.df2 is not None

    @classmethod
    def from_theta(cls, theta, n=1):
        """Model whose data equal the given means (handy for statistics on
        a fixed configuration)."""
        return cls(np.asarray(theta, dtype=float), n, 1.0)


def _replicate_mean(coeffs, N):
    if coeffs.n_units != N:
        raise DimensionMismatch(f"coefficients have {coeffs.n_units} units, design has {N} rows")
    return coeffs.coeffs.mean(axis=0)  # (p, N)


def fit_ls(coeffs, X):
    """Per-frequency least-squares estimates, shape (p, P).

    Averaging over replicates first is the same as averaging the replicate
    fits, since the fit is linear.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    _check_full_rank(X, "X")
    ybar = _replicate_mean(coeffs, X.shape[0])
    return np.linalg.solve(X.T @ X, X.T @ ybar.T).T


def estimate_sigma(coeffs, X):
    """Unbiased residual variances per frequency and their df, ``nN - P``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    N, P = X.shape
    df2 = coeffs.n_rep * N - P
    if df2 <= 0:
        raise InsufficientDF(f"nN - P = {df2}; need at least one residual degree of freedom")
    beta = fit_ls(coeffs, X)
    resid = coeffs.coeffs - (X @ beta.T).T[None]
    return (resid ** 2).sum(axis=(0, 2)) / df2, df2


def transform_to_discrete(coeffs, design, sigma=None):
    """Map Fourier coefficients to the discrete model for ``design``'s hypothesis.

    Parameters
    ----------
    coeffs : FourierCoeffs
    design : DesignSpec
    sigma : array_like, optional
        Known per-frequency standard deviations of a single coefficient.
        When omitted the residual estimates are substituted and the model
        records ``df2``.
    """
    ybar = _replicate_mean(coeffs, design.N)
    raw = ybar @ design.contrast().T  # (p, nu)
    if sigma is None:
        var, df2 = estimate_sigma(coeffs, design.X)
        if np.any(var <= 0):
            bad = int(np.argmin(var)) + 1
            raise InvalidParameter(f"zero residual variance at frequency {bad}")
        sig = np.sqrt(var)
    else:
        sig = np.broadcast_to(np.asarray(sigma, dtype=float), (coeffs.p,))
        df2 = None
    return DiscreteModel(raw / sig[:, None], coeffs.n_rep, sig, df2)


def component_F(coeffs, design):
    """Per-frequency F statistics ``(n ||H L^T b_j||^2 / nu) / s_j^2``."""
    model = transform_to_discrete(coeffs, design)
    return model.n * (model.Y ** 2).sum(axis=1) / model.nu


def component_p_values(F, nu, df2):
    return stats.f.sf(np.asarray(F, dtype=float), nu, df2)


def f_global(F, weights):
    """Weighted sum of component F statistics."""
    F = np.asarray(F, dtype=float)
    w = np.asarray(weights, dtype=float)
    if F.shape != w.shape:
        raise LengthMismatch(f"{F.size} F values but {w.size} weights")
    return float(F @ w)


@dataclass
class GroupLayout:
    """Assignment of units to groups plus one covariate per unit.

    Group order is ``groups`` when given, otherwise order of first appearance.
    """

    group_of: list
    covariate: np.ndarray
    groups: list = field(default_factory=list)

    def __post_init__(self):
        self.group_of = list(self.group_of)
        self.covariate = np.asarray(self.covariate, dtype=float)
        if self.covariate.shape != (len(self.group_of),):
            raise LengthMismatch("need one covariate value per unit")
        if not self.groups:
            self.groups = list(dict.fromkeys(self.group_of))
        unknown = set(self.group_of) - set(self.groups)
        if unknown:
            raise InvalidParameter(f"units assigned to undeclared groups {sorted(map(str, unknown))}")
        empty = [g for g in self.groups if g not in self.group_of]
        if empty:
            raise EmptyGroup(f"groups with no units: {empty}")

    @property
    def G(self):
        return len(self.groups)

    @property
    def index(self):
        pos = {g: i for i, g in enumerate(self.groups)}
        return np.array([pos[g] for g in self.group_of])

    @property
    def sizes(self):
        return np.bincount(self.index, minlength=self.G)

    @property
    def xbar(self):
        return float(self.covariate.mean())

    @property
    def group_means(self):
        return np.bincount(self.index, weights=self.covariate, minlength=self.G) / self.sizes

    def design_matrix(self):
        """Columns ``[mu_1..mu_G, beta_1..beta_G]``: group indicators, then
        indicators times the centred covariate."""
        ind = np.zeros((len(self.group_of), self.G))
        ind[np.arange(len(self.group_of)), self.index] = 1.0
        return np.hstack([ind, ind * (self.covariate - self.xbar)[:, None]])


class Hypothesis(str, Enum):
    SAME_SLOPE = "same-slope"
    COMMON_TREND = "common-trend"


def _contrast_column(kind, g1, g2, layout):
    G = layout.G
    col = np.zeros(2 * G)
    if kind is Hypothesis.SAME_SLOPE:
        col[G + g1] = 1.0
        col[G + g2] = -1.0
        return col
    col[g1] = 1.0
    col[g2] = -1.0
    dev = layout.group_means - layout.xbar
    share = layout.sizes / layout.sizes.sum()
    col[G:] = -share * (dev[g1] - dev[g2])
    col[G + g1] += dev[g1]
    col[G + g2] -= dev[g2]
    return col


def build_hypothesis(kind, layout, pairs=None):
    """Hypothesis matrix L for pairwise group comparisons.

    Parameters
    ----------
    kind : Hypothesis or str
        ``"same-slope"`` (equal covariate slopes) or ``"common-trend"``
        (pairs fall on the size-weighted overall regression line).
    layout : GroupLayout
    pairs : iterable of (int, int), optional
        1-based group positions; all pairs in lexicographic order by default.

    Redundant columns are dropped greedily, keeping the earliest independent
    ones, so ``L`` always has full column rank.
    """
    kind = Hypothesis(kind)
    if pairs is None:
        pairs = list(combinations(range(1, layout.G + 1), 2))
    cols = []
    for g1, g2 in pairs:
        if not (1 <= g1 <= layout.G and 1 <= g2 <= layout.G) or g1 == g2:
            raise InvalidParameter(f"invalid group pair ({g1}, {g2}) for {layout.G} groups")
        cols.append(_contrast_column(kind, g1 - 1, g2 - 1, layout))
    kept = []
    for col in cols:
        trial = np.column_stack(kept + [col])
        sv = np.linalg.svd(trial, compute_uv=False)
        if sv.min() > EPS_RANK_REL * max(sv.max(), 1.0):
            kept.append(col)
    if not kept:
        raise DegenerateHypothesis("hypothesis has rank 0")
    return np.column_stack(kept)
