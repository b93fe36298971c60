"""Monte Carlo null distributions, cutoffs, p-values and power.

Iteration ``i`` of any simulation draws from stream ``i`` of the run's seed,
so results do not depend on chunking or on how many threads evaluate chunks.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special

from . import teststats
from .errors import AllZeroGamma, EmptySample, InvalidParameter, LengthMismatch, MissingCutoff
from .fourier import CurveSet
from .numerics import gaussian_block, uniform_block

DEFAULT_CUTOFF_ITERS = 20_000
DEFAULT_POWER_ITERS = 20_000
DEFAULT_PVALUE_ITERS = 100_000
FULL_SCALE_ITERS = 250_000
CHUNK = 20_000

KINDS = ("quadratic", "an", "ht", "htbar", "fglobal")


@dataclass(frozen=True)
class StatSpec:
    """Which statistic to simulate, and its dimensions.

    Use the constructors (:meth:`quadratic`, :meth:`adaptive_neyman`,
    :meth:`ht`, :meth:`htbar`, :meth:`fglobal`) rather than building one
    field by field.
    """

    kind: str
    p: int
    n: int = 1
    nu: int = 1
    weights: tuple | None = None
    label: str = ""
    s: float | None = None
    s_lo: float | None = None
    s_hi: float | None = None
    alpha: float = 0.05
    one_sided: bool = False
    cutoffs: tuple | None = None  # ((k_dstar, cutoff), ...) for htbar
    df2: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameter(f"unknown statistic kind {self.kind!r}")
        if self.p < 1 or self.n < 1 or self.nu < 1:
            raise InvalidParameter("p, n and nu must be positive")
        if self.kind in ("an", "ht", "htbar") and self.nu != 1:
            raise InvalidParameter(f"{self.kind} needs nu = 1")
        if self.kind in ("quadratic", "fglobal") and (self.weights is None or len(self.weights) != self.p):
            raise LengthMismatch("weights must have length p")
        if self.kind == "fglobal" and (self.df2 is None or self.df2 < 1):
            raise InvalidParameter("fglobal needs df2 >= 1")

    @classmethod
    def quadratic(cls, scheme, p, n=1, nu=1):
        if isinstance(scheme, str):
            scheme = teststats.WeightScheme.parse(scheme)
        w = teststats.make_weights(scheme, p, n)
        return cls("quadratic", p, n, nu, weights=tuple(w), label=scheme.label)

    @classmethod
    def adaptive_neyman(cls, p, n=1):
        return cls("an", p, n, label="an")

    @classmethod
    def ht(cls, s, p, n=1, one_sided=False):
        return cls("ht", p, n, s=s, one_sided=one_sided, label=f"ht:s={s:g}")

    @classmethod
    def htbar(cls, s_lo, s_hi, p, n=1, alpha=0.05, one_sided=False, cutoffs=None):
        cut = tuple(sorted(cutoffs.items())) if cutoffs is not None else None
        return cls("htbar", p, n, s_lo=s_lo, s_hi=s_hi, alpha=alpha,
                   one_sided=one_sided, cutoffs=cut, label="htbar")

    @classmethod
    def fglobal(cls, weights, nu, df2):
        w = tuple(float(v) for v in weights)
        return cls("fglobal", len(w), 1, nu, weights=w, df2=df2, label="fglobal")

    @property
    def ht_configs(self):
        return teststats.ht_configurations(self.n, self.s_lo, self.s_hi, self.one_sided)

    @property
    def ht_params(self):
        return teststats.HTParams.from_s(self.n, self.s, self.one_sided)


@dataclass
class TestOutcome:
    statistic: float
    cutoff: float
    p_value: float
    reject: bool
    alpha: float
    iterations: int
    seed: int


def draw_null(spec, seed, start, count):
    """Null rows of ``sqrt(n) * Y`` (standard normal) for streams start..start+count-1."""
    z = gaussian_block(seed, start, count, spec.p * spec.nu)
    return z if spec.nu == 1 else z.reshape(count, spec.p, spec.nu)


def evaluate(spec, x):
    """Statistic values for each row of ``x = sqrt(n) * Y``."""
    if spec.kind == "quadratic":
        return teststats.quadratic_batch(x, spec.weights)
    if spec.kind == "an":
        return teststats.adaptive_neyman_batch(x)[0]
    if spec.kind == "ht":
        return teststats.ht_batch(x, spec.ht_params)
    if spec.kind == "htbar":
        if spec.cutoffs is None:
            raise MissingCutoff("htbar needs per-configuration cutoffs; see calibrate_htbar")
        return teststats.ht_bar_batch(x, spec.ht_configs, dict(spec.cutoffs))
    raise InvalidParameter("fglobal statistics are evaluated from F values, not Y")


def _chunks(iterations, chunk):
    return [(s, min(chunk, iterations - s)) for s in range(0, iterations, chunk)]


def _map_chunks(fn, iterations, chunk, n_jobs):
    parts = _chunks(iterations, chunk)
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            return list(pool.map(lambda sc: fn(*sc), parts))
    return [fn(s, c) for s, c in parts]


def _fglobal_chunk(spec, seed, start, count):
    u = uniform_block(seed, start, count, spec.p)
    return special.fdtri(spec.nu, spec.df2, u) @ np.asarray(spec.weights)


def calibrate_htbar(spec, iterations, seed, chunk=CHUNK, n_jobs=1):
    """Fill in per-configuration cutoffs c(s) from the null draws of ``seed``.

    Returns the completed spec and the null HT matrix (iterations x configs).
    """
    configs = spec.ht_configs

    def run(start, count):
        x = draw_null(spec, seed, start, count)
        return np.column_stack([teststats.ht_batch(x, prm) for prm in configs.values()])

    ht = np.vstack(_map_chunks(run, iterations, chunk, n_jobs))
    cut = {k: cutoff(np.sort(ht[:, m]), spec.alpha) for m, k in enumerate(configs)}
    return replace(spec, cutoffs=tuple(sorted(cut.items()))), ht


def null_sample(spec, iterations, seed, chunk=CHUNK, n_jobs=1):
    """Sorted null distribution sample of the statistic.

    For ``htbar`` without cutoffs, the per-configuration cutoffs are first
    simulated from the same draws.
    """
    if iterations < 1000:
        raise InvalidParameter("null samples need at least 1000 iterations")
    if spec.kind == "fglobal":
        fn = lambda s, c: _fglobal_chunk(spec, seed, s, c)  # noqa: E731
        return np.sort(np.concatenate(_map_chunks(fn, iterations, chunk, n_jobs)))
    if spec.kind == "htbar" and spec.cutoffs is None:
        spec, ht = calibrate_htbar(spec, iterations, seed, chunk, n_jobs)
        cut = np.array([c for _, c in spec.cutoffs])
        return np.sort((ht / cut).max(axis=1))
    fn = lambda s, c: evaluate(spec, draw_null(spec, seed, s, c))  # noqa: E731
    return np.sort(np.concatenate(_map_chunks(fn, iterations, chunk, n_jobs)))


def cutoff(null_sorted, alpha):
    """Empirical (1 - alpha) quantile: order statistic ``ceil((1 - alpha) B)``."""
    if len(null_sorted) == 0:
        raise EmptySample("empty null sample")
    if not 0 < alpha < 1:
        raise InvalidParameter("alpha must lie in (0, 1)")
    B = len(null_sorted)
    idx = math.ceil((1.0 - alpha) * B - 1e-9)
    return float(null_sorted[min(max(idx, 1), B) - 1])


def p_value(null_sorted, observed):
    """Add-one Monte Carlo p-value ``(1 + #{null >= obs}) / (1 + B)``."""
    if len(null_sorted) == 0:
        raise EmptySample("empty null sample")
    B = len(null_sorted)
    at_least = B - np.searchsorted(null_sorted, observed, side="left")
    return (1.0 + at_least) / (1.0 + B)


def _shifted(spec, theta, z):
    theta = np.asarray(theta, dtype=float)
    shape = (spec.p,) if spec.nu == 1 else (spec.p, spec.nu)
    if theta.shape != shape:
        raise LengthMismatch(f"theta has shape {theta.shape}, expected {shape}")
    return math.sqrt(spec.n) * theta + z


def power_many(specs, theta, cutoffs, iterations, seed, chunk=CHUNK, n_jobs=1):
    """Power of several statistics on shared draws ``Y = theta + e / sqrt(n)``.

    Returns ``{label: (power, standard_error)}``.
    """
    specs = list(specs)
    if not specs:
        return {}
    base = specs[0]
    for sp in specs:
        if sp.kind == "fglobal":
            raise InvalidParameter("power is defined for statistics of Y only")
        if (sp.p, sp.n, sp.nu) != (base.p, base.n, base.nu):
            raise InvalidParameter("specs sharing draws need equal p, n, nu")

    def run(start, count):
        x = _shifted(base, theta, draw_null(base, seed, start, count))
        return np.array([(evaluate(sp, x) > cutoffs[sp.label]).sum() for sp in specs])

    hits = np.sum(_map_chunks(run, iterations, chunk, n_jobs), axis=0)
    out = {}
    for sp, h in zip(specs, hits):
        pw = h / iterations
        out[sp.label] = (float(pw), math.sqrt(pw * (1.0 - pw) / iterations))
    return out


def power(spec, theta, cutoff_value, iterations, seed, chunk=CHUNK, n_jobs=1):
    """Rejection rate at mean ``theta`` and its binomial standard error."""
    res = power_many([spec], theta, {spec.label: cutoff_value}, iterations, seed, chunk, n_jobs)
    return res[spec.label]


def run_test(spec, observed, iterations, seed, alpha=0.05, null_sorted=None):
    """Cutoff, p-value and decision for an observed statistic, from one null sample."""
    if null_sorted is None:
        null_sorted = null_sample(spec, iterations, seed)
    c = cutoff(null_sorted, alpha)
    return TestOutcome(
        statistic=float(observed),
        cutoff=c,
        p_value=float(p_value(null_sorted, observed)),
        reject=bool(observed > c),
        alpha=alpha,
        iterations=len(null_sorted),
        seed=seed,
    )


@dataclass
class MANoiseSpec:
    """Moving-average filter; ``gamma[m]`` multiplies lag ``m + offset``."""

    gamma: np.ndarray
    offset: int = 0
    normalized: np.ndarray = field(init=False)

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float).ravel()
        if g.size == 0 or not np.any(g != 0):
            raise AllZeroGamma("at least one MA coefficient must be nonzero")
        self.gamma = g
        self.normalized = g / math.sqrt((g ** 2).sum())


def ma_noise_curves(spec, grid, N, n, seed):
    """Stationary MA error curves on a periodic grid, unit marginal variance.

    ``eps(t_l) = sum_m gamma_m eta(t_{l-m})`` with indices taken mod r.
    Curve (i, k) uses stream ``i * N + k``.
    """
    eta = gaussian_block(seed, 0, n * N, grid.r)
    eps = np.zeros_like(eta)
    for m, g in enumerate(spec.normalized):
        if g != 0:
            eps += g * np.roll(eta, m + spec.offset, axis=1)
    return CurveSet(grid, eps.reshape(n, N, grid.r))
