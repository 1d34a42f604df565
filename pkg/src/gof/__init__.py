"""Goodness-of-fit tests built on the distribution function of the density value.

The package tests whether a sample was drawn from a hypothesised
piecewise-smooth probability density.  Besides the classical Kuiper
statistic it provides a rearranged variant that feeds density values
through the distribution function of the density value itself, and a
minimum-tail statistic with a distribution-free significance bound.
"""

from gof.approx import ApproxError, ChebPiece, Interval, PiecewiseFn, build
from gof.density import Density, SampleSet, piecewise_constant
from gof.rearranged import (
    RearrangedDF,
    build_rearranged,
    eval_rearranged,
    eval_rearranged_left_limit,
)
from gof.examples import ExampleSuite, builtin, smooth_constant
from gof.stats import (
    KuiperResult,
    TestReport,
    WResult,
    generalized_average,
    kuiper_log10_pvalue,
    kuiper_u,
    kuiper_v,
    w_statistic,
    w_tail_bound,
    w_threshold,
    w_tilde,
)

__version__ = "0.1.0"

__all__ = [
    "ApproxError",
    "ChebPiece",
    "Interval",
    "PiecewiseFn",
    "build",
    "Density",
    "SampleSet",
    "piecewise_constant",
    "ExampleSuite",
    "builtin",
    "smooth_constant",
    "RearrangedDF",
    "build_rearranged",
    "eval_rearranged",
    "eval_rearranged_left_limit",
    "KuiperResult",
    "WResult",
    "TestReport",
    "generalized_average",
    "kuiper_log10_pvalue",
    "kuiper_u",
    "kuiper_v",
    "w_statistic",
    "w_tail_bound",
    "w_threshold",
    "w_tilde",
    "__version__",
]
