"""Tapered, truncated and thresholded tests for functional linear hypotheses."""

__version__ = "0.1.0"

from .errors import TaperFDAError  # noqa: E402
from .fourier import CurveSet, FourierCoeffs, Grid, decompose, reconstruct  # noqa: E402
from .flm import (  # noqa: E402
    DesignSpec,
    DiscreteModel,
    GroupLayout,
    Hypothesis,
    build_hypothesis,
    component_F,
    f_global,
    transform_to_discrete,
)
from .teststats import WeightScheme, adaptive_neyman, ht_bar, ht_stat, make_weights, quadratic_stat  # noqa: E402
from .montecarlo import StatSpec, null_sample, power, run_test  # noqa: E402
from .kernels import BACKEND  # noqa: E402

__all__ = [
    "BACKEND",
    "CurveSet",
    "DesignSpec",
    "DiscreteModel",
    "FourierCoeffs",
    "Grid",
    "GroupLayout",
    "Hypothesis",
    "StatSpec",
    "TaperFDAError",
    "WeightScheme",
    "adaptive_neyman",
    "build_hypothesis",
    "component_F",
    "decompose",
    "f_global",
    "ht_bar",
    "ht_stat",
    "make_weights",
    "null_sample",
    "power",
    "quadratic_stat",
    "reconstruct",
    "run_test",
    "transform_to_discrete",
]
