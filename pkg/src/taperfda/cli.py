"""Command-line interface: ``taperfda {decompose,test,power,figure4,rates}``.

Settings come from flags, optionally layered over a JSON ``--config`` file
(flags win). The whole configuration is validated before any computation
and every problem is reported at once.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import __version__, errors, flm, fourier, io, montecarlo as mc, rates, simstudy, teststats
from .numerics import derive_seed

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

COMMANDS = ("decompose", "test", "power", "figure4", "rates")
COMMON_KEYS = {"input", "meta", "out", "seed", "iters", "alpha", "p", "n", "weights", "hypothesis", "pairs"}
EXTRA_KEYS = {
    "decompose": {"grid"},
    "test": {"groups", "grid"},
    "power": {"null_iters", "statistics", "alternative", "lambda", "one_sided"},
    "figure4": {"null_iters", "full_scale", "n_jobs", "one_sided"},
    "rates": {"s", "M", "p_exponent", "n_grid"},
}
DEFAULTS = {
    "decompose": {"p": 65},
    "test": {"p": 65, "weights": "opt", "hypothesis": "same-slope", "iters": mc.DEFAULT_PVALUE_ITERS,
             "alpha": 0.05, "seed": 0},
    "power": {"p": 127, "n": 64, "iters": mc.DEFAULT_POWER_ITERS, "alpha": 0.05, "seed": 0,
              "statistics": ["uwq", "opt", "cvm", "an"], "alternative": {"kind": "spiked", "j0": 1}},
    "figure4": {"p": 127, "n": 64, "iters": mc.DEFAULT_POWER_ITERS, "alpha": 0.05, "seed": 0},
    "rates": {"weights": "opt", "s": 1.0, "M": 1.0, "p_exponent": 1.0 / 3.0,
              "n_grid": list(rates.DEFAULT_N_GRID)},
}

CONFIG_ERRORS = (
    errors.InvalidConfig, errors.InvalidParameter, errors.InvalidWeight, errors.InvalidB,
    errors.IndexOutOfRange, errors.InvalidRule, errors.ResolutionExceeded, errors.InsufficientP,
    errors.UnsupportedNu, errors.NotMonotone,
)
DATA_ERRORS = (
    errors.DataError, errors.EmptyGroup, errors.DimensionMismatch, errors.LengthMismatch,
    errors.InsufficientDF, OSError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise errors.InvalidConfig([message])


def build_parser():
    parser = _Parser(prog="taperfda", description="Tests for functional linear hypotheses.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--input")
        sp.add_argument("--meta")
        sp.add_argument("--config")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--iters", type=int)
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--p", type=int)
        sp.add_argument("--n", type=int)
        sp.add_argument("--weights")
        sp.add_argument("--hypothesis")
        sp.add_argument("--pairs")
        sp.add_argument("--out")
    return parser


def parse_pairs(value):
    """``"1-2,1-3"`` or ``[[1, 2], [1, 3]]`` to a list of int tuples."""
    if value is None:
        return None
    if isinstance(value, str):
        items = [tuple(part.split("-")) for part in value.split(",") if part.strip()]
    else:
        items = [tuple(v) for v in value]
    out = []
    for item in items:
        if len(item) != 2:
            raise ValueError(f"bad pair {item!r}")
        out.append((int(item[0]), int(item[1])))
    return out


def _parse_statistic(text, p, n):
    text = text.strip().lower()
    if text == "an":
        return mc.StatSpec.adaptive_neyman(p, n)
    if text.startswith("ht:"):
        key, _, value = text[3:].partition("=")
        if key != "s":
            raise ValueError(f"expected ht:s=<value>, got {text!r}")
        return mc.StatSpec.ht(float(value), p, n)
    return mc.StatSpec.quadratic(text, p, n)


def load_config(command, args):
    """Merge defaults, the JSON config file and explicit flags, then validate."""
    cfg = dict(DEFAULTS[command])
    problems = []
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                from_file = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise errors.InvalidConfig([f"cannot read config {args.config}: {exc}"]) from None
        if not isinstance(from_file, dict):
            raise errors.InvalidConfig(["config file must hold a JSON object"])
        allowed = COMMON_KEYS | EXTRA_KEYS[command]
        problems += [f"unknown config key {k!r} for {command}" for k in from_file if k not in allowed]
        cfg.update({k: v for k, v in from_file.items() if k in allowed})
    for key in COMMON_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    problems += validate(command, cfg)
    if problems:
        raise errors.InvalidConfig(problems)
    return cfg


def _need(cfg, key, problems, kind=None, check=None, msg=None):
    v = cfg.get(key)
    if v is None:
        problems.append(f"{key} is required")
        return
    if kind is not None and (not isinstance(v, kind) or isinstance(v, bool)):
        problems.append(f"{key} must be {kind.__name__ if isinstance(kind, type) else 'a number'}")
        return
    if check is not None and not check(v):
        problems.append(msg or f"{key} is out of range: {v!r}")


def validate(command, cfg):
    """List every violation of the command's preconditions."""
    problems = []
    num = (int, float)
    if command in ("decompose", "test"):
        _need(cfg, "input", problems, str, os.path.isfile, f"input file not found: {cfg.get('input')}")
    if command == "test":
        _need(cfg, "meta", problems, str, os.path.isfile, f"metadata file not found: {cfg.get('meta')}")
        _need(cfg, "hypothesis", problems, str, lambda v: v in ("same-slope", "common-trend"),
              "hypothesis must be same-slope or common-trend")
        try:
            parse_pairs(cfg.get("pairs"))
        except (ValueError, TypeError) as exc:
            problems.append(f"pairs: {exc}")
    if command != "rates":
        _need(cfg, "p", problems, int, lambda v: v >= 1, "p must be >= 1")
    if command in ("power", "figure4"):
        _need(cfg, "n", problems, int, lambda v: v >= 1, "n must be >= 1")
    if command in ("test", "power", "figure4"):
        _need(cfg, "seed", problems, int, lambda v: 0 <= v < 2 ** 64, "seed must be a 64-bit unsigned integer")
        _need(cfg, "iters", problems, int, lambda v: v >= 1000, "iters must be >= 1000")
        _need(cfg, "alpha", problems, num, lambda v: 0 < v < 1, "alpha must lie in (0, 1)")
    if cfg.get("null_iters") is not None:
        _need(cfg, "null_iters", problems, int, lambda v: v >= 1000, "null_iters must be >= 1000")
    if command in ("test", "rates") or cfg.get("weights") is not None:
        try:
            scheme = teststats.WeightScheme.parse(str(cfg.get("weights")))
            if scheme.variant == "custom":
                raise errors.InvalidParameter("custom weights are not available from the command line")
        except errors.InvalidParameter as exc:
            problems.append(f"weights: {exc}")
    if command == "power":
        for text in cfg.get("statistics") or []:
            try:
                _parse_statistic(text, cfg.get("p") or 1, cfg.get("n") or 1)
            except (ValueError, errors.TaperFDAError) as exc:
                problems.append(f"statistic {text!r}: {exc}")
        alt = cfg.get("alternative")
        if not isinstance(alt, dict) or alt.get("kind") not in ("spiked", "smooth"):
            problems.append("alternative must be {'kind': 'spiked', 'j0': ..} or {'kind': 'smooth', 'b': ..}")
        elif alt["kind"] == "spiked" and not (isinstance(alt.get("j0"), int) and 1 <= alt["j0"] <= (cfg.get("p") or 0)):
            problems.append("alternative j0 must be an integer in 1..p")
        elif alt["kind"] == "smooth" and not (isinstance(alt.get("b"), num) and 0 < alt["b"] < 1):
            problems.append("alternative b must lie in (0, 1)")
        if cfg.get("lambda") is not None:
            _need(cfg, "lambda", problems, num, lambda v: v >= 0, "lambda must be >= 0")
    if command == "rates":
        _need(cfg, "s", problems, num, lambda v: v > 0.5, "s must exceed 1/2")
        _need(cfg, "M", problems, num, lambda v: v > 0, "M must be positive")
        _need(cfg, "p_exponent", problems, num, lambda v: v > 0, "p_exponent must be positive")
        grid = cfg.get("n_grid")
        if not isinstance(grid, list) or len(grid) < 2 or not all(isinstance(v, int) and v >= 3 for v in grid):
            problems.append("n_grid must list at least two integers >= 3")
    if command == "figure4" and cfg.get("n_jobs") is not None:
        _need(cfg, "n_jobs", problems, int, lambda v: v >= 1, "n_jobs must be >= 1")
    if cfg.get("grid") is not None:
        g = cfg["grid"]
        if not (isinstance(g, dict) and {"a", "b", "r"} <= set(g)):
            problems.append("grid must be an object with a, b and r")
    return problems


def _target_grid(cfg):
    g = cfg.get("grid")
    return fourier.Grid(float(g["a"]), float(g["b"]), int(g["r"])) if g else None


def _emit(cfg, header, rows, meta):
    io.write_table(cfg.get("out") or sys.stdout, header, rows, meta)


# -- commands --------------------------------------------------------------

def cmd_decompose(cfg):
    curves = io.load_curves(cfg["input"], _target_grid(cfg))
    coeffs = fourier.decompose(curves, cfg["p"])
    multi = coeffs.n_rep > 1
    header = (["replicate"] if multi else []) + ["j", "unit", "coefficient"]
    rows = []
    for i in range(coeffs.n_rep):
        for j in range(coeffs.p):
            for k, unit in enumerate(coeffs.labels):
                rows.append(([i + 1] if multi else []) + [j + 1, unit, float(coeffs.coeffs[i, j, k])])
    meta = {"command": "decompose", "p": cfg["p"], "r": curves.grid.r, "grid_a": curves.grid.a,
            "grid_b": curves.grid.b, "interpolated": curves.interpolated}
    _emit(cfg, header, rows, meta)
    return meta


@dataclass
class TestReport:
    """Per-frequency F statistics and the global tapered test."""

    F: np.ndarray
    p_values: np.ndarray
    weights: np.ndarray
    F_global: float
    p_value: float
    cutoff: float
    reject: bool
    nu: int
    df2: int
    p: int
    weights_label: str
    iterations: int
    seed: int
    alpha: float

    @property
    def formula(self):
        return f"F_global = sum_{{j=1}}^{{{self.p}}} w_j F_j"


def run_test_workflow(curves, layout, p, weights="opt", hypothesis="same-slope", pairs=None,
                      iterations=mc.DEFAULT_PVALUE_ITERS, seed=0, alpha=0.05):
    """Decompose, build the hypothesis, compute F_j and F_global, and simulate
    the null distribution of F_global for its p-value."""
    coeffs = fourier.decompose(curves, p)
    X = layout.design_matrix()
    L = flm.build_hypothesis(hypothesis, layout, pairs)
    design = flm.DesignSpec(X, L)
    F = flm.component_F(coeffs, design)
    df2 = coeffs.n_rep * design.N - design.P
    scheme = teststats.WeightScheme.parse(weights) if isinstance(weights, str) else weights
    w = teststats.make_weights(scheme, p, coeffs.n_rep)
    fg = flm.f_global(F, w)
    spec = mc.StatSpec.fglobal(w, design.nu, df2)
    outcome = mc.run_test(spec, fg, iterations, derive_seed(seed, 0), alpha)
    return TestReport(F, flm.component_p_values(F, design.nu, df2), w, fg, outcome.p_value,
                      outcome.cutoff, outcome.reject, design.nu, df2, p, scheme.label,
                      iterations, seed, alpha)


def cmd_test(cfg):
    curves = io.load_curves(cfg["input"], _target_grid(cfg))
    layout = io.layout_for(io.read_meta(cfg["meta"]), curves.labels, cfg.get("groups"))
    rep = run_test_workflow(curves, layout, cfg["p"], cfg["weights"], cfg["hypothesis"],
                            parse_pairs(cfg.get("pairs")), cfg["iters"], cfg["seed"], cfg["alpha"])
    meta = {
        "command": "test",
        "seed": rep.seed,
        "iterations": rep.iterations,
        "hypothesis": cfg["hypothesis"],
        "groups": " ".join(layout.groups),
        "weights": rep.weights_label,
        "statistic": rep.formula,
        "nu": rep.nu,
        "df2": rep.df2,
        "F_global": rep.F_global,
        "cutoff": rep.cutoff,
        "p_value": rep.p_value,
        "alpha": rep.alpha,
        "reject": rep.reject,
        "interpolated": curves.interpolated,
    }
    rows = [[j + 1, float(rep.F[j]), float(rep.p_values[j]), float(rep.weights[j])] for j in range(rep.p)]
    if cfg.get("out"):
        io.write_table(cfg["out"], ["j", "F", "p_value", "weight"], rows, meta)
    print(f"{rep.formula} ({rep.weights_label}, nu={rep.nu}, df2={rep.df2})")
    print(f"F_global = {rep.F_global:.6g}, simulated p-value = {rep.p_value:.6g} "
          f"({rep.iterations} iterations, seed {rep.seed})")
    j_min = int(np.argmin(rep.p_values)) + 1
    print(f"smallest per-frequency p-value: j={j_min}, p={rep.p_values[j_min - 1]:.3g}")
    return rep


def _alternative_theta(cfg, lam):
    alt = cfg["alternative"]
    p = cfg["p"]
    if alt["kind"] == "spiked":
        return simstudy.spiked_theta(alt["j0"], lam, p)
    return simstudy.smooth_theta(alt["b"], lam, p)


def cmd_power(cfg):
    p, n, alpha = cfg["p"], cfg["n"], cfg["alpha"]
    texts = list(cfg["statistics"])
    if cfg.get("weights") and cfg["weights"] not in texts:
        texts.append(cfg["weights"])
    specs = []
    for m, t in enumerate(texts):
        sp = _parse_statistic(t, p, n)
        if sp.kind == "ht" and cfg.get("one_sided"):
            sp = mc.StatSpec.ht(sp.s, p, n, True)
        specs.append(replace(sp, label=t))
    lam = cfg.get("lambda")
    if lam is None:
        lam = simstudy.calibrate_lambda(p, n, 1, alpha)
    theta = _alternative_theta(cfg, lam)
    null_iters = cfg.get("null_iters") or cfg["iters"]
    null_seed = derive_seed(cfg["seed"], 0)
    cut = {sp.label: mc.cutoff(mc.null_sample(sp, null_iters, null_seed), alpha) for sp in specs}
    res = mc.power_many(specs, theta, cut, cfg["iters"], derive_seed(cfg["seed"], 1))
    rows = [[sp.label, res[sp.label][0], res[sp.label][1], cut[sp.label]] for sp in specs]
    alt = cfg["alternative"]
    meta = {"command": "power", "seed": cfg["seed"], "iterations": cfg["iters"], "null_iterations": null_iters,
            "p": p, "n": n, "alpha": alpha, "lambda": float(lam),
            "alternative": json.dumps(alt, sort_keys=True)}
    _emit(cfg, ["statistic", "power", "std_error", "cutoff"], rows, meta)
    return rows


def cmd_figure4(cfg):
    kw = {"p": cfg["p"], "n": cfg["n"], "alpha": cfg["alpha"], "one_sided": bool(cfg.get("one_sided", False)),
          "n_jobs": cfg.get("n_jobs") or 1}
    if cfg.get("full_scale"):
        fc = simstudy.Figure4Config.full_scale(**kw)
    else:
        fc = simstudy.Figure4Config(power_iterations=cfg["iters"],
                                    null_iterations=cfg.get("null_iters") or cfg["iters"], **kw)
    res = simstudy.run_figure4(fc, cfg["seed"])
    rows = [[r["class"], r["index_value"], r["statistic"], r["power"], r["std_error"]] for r in res.rows]
    meta = {"command": "figure4", "seed": cfg["seed"], "iterations": fc.power_iterations,
            "null_iterations": fc.null_iterations, "p": fc.p, "n": fc.n, "alpha": fc.alpha,
            "lambda": res.lam,
            "s_range_spiked": "{} {}".format(*map(repr, res.s_range["spiked"])),
            "s_range_smooth": "{} {}".format(*map(repr, res.s_range["smooth"]))}
    _emit(cfg, ["class", "index_value", "statistic", "power", "std_error"], rows, meta)
    return res


def cmd_rates(cfg):
    s, M = float(cfg["s"]), float(cfg["M"])
    p_rule = rates.log_ratio_p_rule(float(cfg["p_exponent"]))
    grid = tuple(cfg["n_grid"])
    probe = rates.rate_probe(cfg["weights"], p_rule, s, M, rates.log_ratio_delta_rule(s), grid)
    scan = rates.boundary_rate_scan(cfg["weights"], p_rule, s, M, grid)
    rows = [[n, probe.seq_i[m], probe.seq_ii[m], scan.delta[m]] for m, n in enumerate(grid)]
    meta = {"command": "rates", "weights": cfg["weights"], "s": s, "M": M, "p_exponent": float(cfg["p_exponent"]),
            "slope_seq_i": probe.slope_i, "band_ratio_seq_i": probe.band_ratio_i,
            "slope_seq_ii": probe.slope_ii, "saturated": int(scan.saturated.sum()),
            "interpolation": rates.INTERPOLATION}
    _emit(cfg, ["n", "seq_i", "seq_ii", "delta_hat"], rows, meta)
    return probe, scan


HANDLERS = {"decompose": cmd_decompose, "test": cmd_test, "power": cmd_power,
            "figure4": cmd_figure4, "rates": cmd_rates}


def exit_code(exc):
    if isinstance(exc, CONFIG_ERRORS):
        return EXIT_CONFIG
    if isinstance(exc, DATA_ERRORS):
        return EXIT_DATA
    return EXIT_NUMERIC


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args.command, args)
        with np.errstate(invalid="raise", divide="raise"):
            HANDLERS[args.command](cfg)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (errors.TaperFDAError, OSError, FloatingPointError, np.linalg.LinAlgError) as exc:
        code = exit_code(exc)
        print(f"taperfda: error: {exc}", file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
