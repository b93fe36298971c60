"""Spiked and smooth alternatives, power calibration, Sobolev fitting and the
power-curve experiment comparing tapering, truncation and thresholding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import montecarlo as mc
from .errors import IndexOutOfRange, InvalidB, InvalidParameter
from .numerics import bisect, chisq_isf, chisq_sf, derive_seed

STATISTICS = ("FZZ", "UWQ", "OPT", "CVM", "AN", "HTBAR")
SMOOTH_REF_B = 0.81


@dataclass(frozen=True)
class SobolevFit:
    s: float
    M: float


@dataclass
class AlternativeSpec:
    """A mean configuration theta with its calibration and Sobolev metadata."""

    kind: str  # "spiked" or "smooth"
    index_value: float  # j0 or b
    lam: float
    p: int
    theta: np.ndarray = field(repr=False)
    fit: SobolevFit | None = None


def spiked_theta(j0, lam, p):
    if not 1 <= j0 <= p:
        raise IndexOutOfRange(f"j0={j0} outside 1..{p}")
    if lam < 0:
        raise InvalidParameter("lambda must be >= 0")
    theta = np.zeros(p)
    theta[j0 - 1] = math.sqrt(lam)
    return theta


def smooth_exponent(b):
    """``d = (log 0.2 / log(1 - b) - 1) / 2``."""
    if not 0 < b < 1:
        raise InvalidB(f"b must lie in (0, 1), got {b}")
    return (math.log(0.2) / math.log1p(-b) - 1.0) / 2.0


def smooth_theta(b, lam, p):
    """``theta_j ∝ (1 - j/(p+1))^d`` scaled so that ``sum theta^2 = lam``."""
    d = smooth_exponent(b)
    if lam < 0:
        raise InvalidParameter("lambda must be >= 0")
    shape = (1.0 - np.arange(1, p + 1) / (p + 1.0)) ** d
    return math.sqrt(lam) * shape / math.sqrt((shape ** 2).sum())


def uwq_power(p, n, lam, nu=1, alpha=0.05):
    """Exact power of the unweighted chi-square test at ``sum theta^2 = lam``."""
    q = chisq_isf(p * nu, 0.0, alpha)
    return chisq_sf(p * nu, n * lam, q)


def calibrate_lambda(p, n, nu=1, alpha=0.05, target_power=0.4):
    """lambda giving the unweighted test power ``target_power`` at level alpha."""
    if not 0 < target_power < 1:
        raise InvalidParameter("target power must lie in (0, 1)")
    if target_power < alpha:
        raise InvalidParameter("target power cannot be below alpha")
    df = p * nu
    q = chisq_isf(df, 0.0, alpha)
    f = lambda nl: chisq_sf(df, nl, q) - target_power  # noqa: E731
    if f(0.0) >= -1e-7:
        return 0.0
    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
    return bisect(f, 0.0, hi, 1e-7) / n


def spiked_grid(p, count=20):
    """``round(1 + (p - 1)(i - 1)/(count - 1))`` for i = 1..count, halves up."""
    vals = [math.floor(1 + (p - 1) * i / (count - 1) + 0.5) for i in range(count)]
    return list(dict.fromkeys(vals))


def smooth_grid(count=20, lo=0.01, hi=0.80):
    return [float(b) for b in np.linspace(lo, hi, count)]


def sobolev_fit_spiked(j0, lam, p, j0_grid=None):
    """``M = lam (p + 1)`` and ``s = log(p + 1) / (2 log j0)``.

    At j0 = 1 the formula breaks down; s is taken from the second point of
    the spiked grid instead.
    """
    if not 1 <= j0 <= p:
        raise IndexOutOfRange(f"j0={j0} outside 1..{p}")
    if j0 == 1:
        grid = spiked_grid(p) if j0_grid is None else list(j0_grid)
        j0 = grid[1]
    return SobolevFit(math.log(p + 1.0) / (2.0 * math.log(j0)), lam * (p + 1.0))


def sobolev_norm(theta, s):
    j = np.arange(1, len(theta) + 1, dtype=float)
    return float((j ** (2.0 * s) * np.asarray(theta) ** 2).sum())


def smooth_reference_M(lam, p):
    return sobolev_norm(smooth_theta(SMOOTH_REF_B, lam, p), 0.5)


def sobolev_fit_smooth(b, lam, p, M_ref=None):
    """Solve ``sum j^2s theta_j(b)^2 = M_ref`` for s in [0.5, 10]."""
    if not 0 < b <= 0.80:
        raise InvalidB(f"b must lie in (0, 0.80], got {b}")
    if M_ref is None:
        M_ref = smooth_reference_M(lam, p)
    theta = smooth_theta(b, lam, p)
    f = lambda s: math.log(sobolev_norm(theta, s)) - math.log(M_ref)  # noqa: E731
    return SobolevFit(bisect(f, 0.5, 10.0, 1e-12), M_ref)


def build_alternatives(p, lam, n_spiked=20, n_smooth=20, b_lo=0.01, b_hi=0.80):
    j0s = spiked_grid(p, n_spiked)
    spiked = [
        AlternativeSpec("spiked", j0, lam, p, spiked_theta(j0, lam, p), sobolev_fit_spiked(j0, lam, p, j0s))
        for j0 in j0s
    ]
    M_ref = smooth_reference_M(lam, p)
    smooth = [
        AlternativeSpec("smooth", b, lam, p, smooth_theta(b, lam, p), sobolev_fit_smooth(b, lam, p, M_ref))
        for b in smooth_grid(n_smooth, b_lo, b_hi)
    ]
    return spiked, smooth


@dataclass
class Figure4Config:
    p: int = 127
    n: int = 64
    alpha: float = 0.05
    null_iterations: int = mc.DEFAULT_CUTOFF_ITERS
    power_iterations: int = mc.DEFAULT_POWER_ITERS
    n_spiked: int = 20
    n_smooth: int = 20
    b_lo: float = 0.01
    b_hi: float = 0.80
    target_power: float = 0.4
    one_sided: bool = False
    n_jobs: int = 1

    @classmethod
    def full_scale(cls, **kw):
        kw.setdefault("null_iterations", mc.FULL_SCALE_ITERS)
        kw.setdefault("power_iterations", mc.FULL_SCALE_ITERS)
        return cls(**kw)


@dataclass
class Figure4Result:
    rows: list
    lam: float
    s_range: dict
    cutoffs: dict
    alternatives: list

    def mean_power(self, cls, stat):
        return float(np.mean([r["power"] for r in self.rows if r["class"] == cls and r["statistic"] == stat]))

    def curve(self, cls, stat):
        return np.array([r["power"] for r in self.rows if r["class"] == cls and r["statistic"] == stat])


def _null_values(specs, iterations, seed, n_jobs):
    """Unsorted null values of several statistics on shared draws."""
    base = specs[0]

    def run(start, count):
        x = mc.draw_null(base, seed, start, count)
        return np.column_stack([mc.evaluate(sp, x) for sp in specs])

    vals = np.vstack(mc._map_chunks(run, iterations, mc.CHUNK, n_jobs))
    return {sp.label: vals[:, m] for m, sp in enumerate(specs)}


def run_figure4(config=None, seed=0, progress=None):
    """Simulated power of FZZ, UWQ, OPT, CVM, AN and HT-bar over both classes.

    All cutoffs come from one shared null sample; each alternative gets its
    own derived seed and its draws are shared by the six statistics.
    """
    cfg = config or Figure4Config()
    p, n, alpha = cfg.p, cfg.n, cfg.alpha
    lam = calibrate_lambda(p, n, 1, alpha, cfg.target_power)
    spiked, smooth = build_alternatives(p, lam, cfg.n_spiked, cfg.n_smooth, cfg.b_lo, cfg.b_hi)
    classes = {"spiked": spiked, "smooth": smooth}
    s_range = {c: (min(a.fit.s for a in alts), max(a.fit.s for a in alts)) for c, alts in classes.items()}

    fixed = {
        "UWQ": replace(mc.StatSpec.quadratic("uwq", p, n), label="UWQ"),
        "OPT": replace(mc.StatSpec.quadratic("opt", p, n), label="OPT"),
        "CVM": replace(mc.StatSpec.quadratic("cvm", p, n), label="CVM"),
        "AN": replace(mc.StatSpec.adaptive_neyman(p, n), label="AN"),
    }
    fzz_s = sorted({a.fit.s for alts in classes.values() for a in alts})
    fzz = {s: replace(mc.StatSpec.quadratic(f"fzz:s={s!r}", p, n), label=f"FZZ[{s!r}]") for s in fzz_s}
    htbar_unfilled = {
        c: mc.StatSpec.htbar(lo, hi, p, n, alpha, cfg.one_sided) for c, (lo, hi) in s_range.items()
    }
    ht_params = {}
    for sp in htbar_unfilled.values():
        ht_params.update(sp.ht_configs)
    ht_specs = {k: replace(mc.StatSpec.ht(prm.s, p, n, cfg.one_sided), label=f"HT[{k}]") for k, prm in ht_params.items()}

    null_seed = derive_seed(seed, 0)
    specs = list(fixed.values()) + list(fzz.values()) + list(ht_specs.values())
    null = _null_values(specs, cfg.null_iterations, null_seed, cfg.n_jobs)
    cutoffs = {label: mc.cutoff(np.sort(v), alpha) for label, v in null.items()}
    ht_cut = {k: cutoffs[sp.label] for k, sp in ht_specs.items()}
    htbar = {}
    for c, sp in htbar_unfilled.items():
        filled = replace(sp, cutoffs=tuple((k, ht_cut[k]) for k in sp.ht_configs), label="HTBAR")
        ratios = np.column_stack([null[ht_specs[k].label] / ht_cut[k] for k in sp.ht_configs])
        cutoffs[f"HTBAR[{c}]"] = mc.cutoff(np.sort(ratios.max(axis=1)), alpha)
        htbar[c] = filled

    rows = []
    for ci, (cname, alts) in enumerate(classes.items()):
        for i, alt in enumerate(alts):
            fz = replace(fzz[alt.fit.s], label="FZZ")
            alt_specs = [fz, *fixed.values(), htbar[cname]]
            cut = {
                "FZZ": cutoffs[fzz[alt.fit.s].label],
                **{k: cutoffs[k] for k in fixed},
                "HTBAR": cutoffs[f"HTBAR[{cname}]"],
            }
            res = mc.power_many(alt_specs, alt.theta, cut, cfg.power_iterations,
                                derive_seed(seed, ci + 1, i), n_jobs=cfg.n_jobs)
            for stat in STATISTICS:
                pw, se = res[stat]
                rows.append({
                    "class": cname,
                    "index": i + 1,
                    "index_value": alt.index_value,
                    "s": alt.fit.s,
                    "statistic": stat,
                    "power": pw,
                    "std_error": se,
                })
            if progress is not None:
                progress(cname, i + 1, len(alts))
    return Figure4Result(rows, lam, s_range, cutoffs, spiked + smooth)
