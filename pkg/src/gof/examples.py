"""Built-in example studies: densities, alternatives, and references.

Each suite bundles a null density p, an alternative density q drawn
against it in power studies, a closed-form distribution function
``P_analytic`` for p, and an independent reference ``Pscript_analytic``
for the distribution function of the density value (the level map that
``build_rearranged`` constructs numerically).

For the four piecewise-linear or piecewise-constant suites the level
map has a closed form.  For the ``smooth`` suite it does not, and
``Pscript_analytic`` instead evaluates a quadrature-grade reference: a
four-million-cell linear model of the exact density with per-level
crossing corrections, accurate to a few parts in 1e7 and entirely
independent of the Chebyshev kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from gof.approx import ChebPiece, Interval, PiecewiseFn, build
from gof.density import Density, piecewise_constant, validate

__all__ = ["ExampleSuite", "SUITE_NAMES", "builtin", "smooth_constant"]

SUITE_NAMES = ("sawtooth", "step", "step2", "bimodal", "smooth")

_SMOOTH_B1 = 13.0 * math.pi
_SMOOTH_B2 = 39.0 * math.pi
_ORACLE_CELLS = 4_000_000


@dataclass(frozen=True)
class ExampleSuite:
    """A named study: null density, alternative, and reference curves."""

    name: str
    p: Density
    q: Density
    P_analytic: Callable
    Pscript_analytic: Callable
    notes: str


def _scalarized(fn: Callable) -> Callable:
    """Wrap an array function so scalars come back as floats."""

    def wrapped(x):
        arr = np.asarray(x, dtype=float)
        out = fn(np.atleast_1d(arr).astype(float))
        return float(out[0]) if arr.ndim == 0 else out

    return wrapped


def _linear_density(segments, label: str) -> Density:
    """Density from exact linear pieces given as (lo, hi, c0, c1)."""
    pieces = [
        ChebPiece(Interval(lo, hi), np.array([c0, c1], dtype=float))
        for lo, hi, c0, c1 in segments
    ]
    return validate(PiecewiseFn(pieces), label=label)


# --- sawtooth: 1000 identical rising teeth on (0, 1000) ---------------------


def _sawtooth_suite() -> ExampleSuite:
    # On tooth (k, k+1): p = 2e-3 (x - k), which is 1e-3 (1 + t) locally.
    p = _linear_density(
        [(float(k), float(k + 1), 1e-3, 1e-3) for k in range(1000)], "sawtooth"
    )
    q = piecewise_constant([0.0, 1000.0], [1e-3], label="uniform(0,1000)")

    def P(x):
        xc = np.clip(x, 0.0, 1000.0)
        k = np.minimum(np.floor(xc), 999.0)
        f = xc - k
        return 1e-3 * (k + f * f)

    def Ps(x):
        xc = np.clip(x, 0.0, 2e-3)
        v = 2.5e5 * xc * xc
        return np.where(x >= 2e-3, 1.0, np.where(x < 0.0, 0.0, v))

    return ExampleSuite(
        name="sawtooth",
        p=p,
        q=q,
        P_analytic=_scalarized(P),
        Pscript_analytic=_scalarized(Ps),
        notes="1000 identical rising teeth; the level map is one quadratic arc",
    )


# --- step: two-level comb with a rare low level ------------------------------


def _step_suite() -> ExampleSuite:
    # Value 1e-6 on (2k, 2k+1) and 1e-3 on (2k-1, 2k); support (0, 1999).
    edges = np.arange(2000, dtype=float)
    values = np.where(np.arange(1999) % 2 == 0, 1e-6, 1e-3)
    p = piecewise_constant(edges, values, label="step")
    q = piecewise_constant([0.0, 1999.0], [1.0 / 1999.0], label="uniform(0,1999)")

    per_block = 1e-3 + 1e-6

    def P(x):
        xc = np.clip(x, 0.0, 1999.0)
        m = np.minimum(np.floor(xc / 2.0), 999.0)
        r = xc - 2.0 * m
        low = np.minimum(r, 1.0) * 1e-6
        high = np.maximum(r - 1.0, 0.0) * 1e-3
        return m * per_block + low + high

    def Ps(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 1e-3, 1.0, np.where(x >= 1e-6, 1e-3, 0.0))

    return ExampleSuite(
        name="step",
        p=p,
        q=q,
        P_analytic=_scalarized(P),
        Pscript_analytic=_scalarized(Ps),
        notes="two-level comb whose low level carries total mass 1e-3",
    )


# --- step2: single-level comb with gaps --------------------------------------


def _step2_suite() -> ExampleSuite:
    # Value 0.1 on (2k, 2k+1) for k = 0..9, zero in between; support (0, 19).
    edges = np.arange(20, dtype=float)
    values = np.where(np.arange(19) % 2 == 0, 0.1, 0.0)
    p = piecewise_constant(edges, values, label="step2")
    q = piecewise_constant([0.0, 19.0], [1.0 / 19.0], label="uniform(0,19)")

    def P(x):
        xc = np.clip(x, 0.0, 19.0)
        m = np.minimum(np.floor(xc / 2.0), 9.0)
        r = xc - 2.0 * m
        return 0.1 * m + 0.1 * np.minimum(r, 1.0)

    def Ps(x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0.1, 1.0, 0.0)

    return ExampleSuite(
        name="step2",
        p=p,
        q=q,
        P_analytic=_scalarized(P),
        Pscript_analytic=_scalarized(Ps),
        notes="ten unit blocks at height 0.1 separated by zero-density gaps",
    )


# --- bimodal: two triangles with a notch touching zero -----------------------


def _bimodal_suite() -> ExampleSuite:
    p = _linear_density(
        [
            (0.0, 100.0, 1.0 / 202.0, 1.0 / 202.0),
            (100.0, 101.0, 1.0 / 202.0, -1.0 / 202.0),
            (101.0, 102.0, 1.0 / 202.0, 1.0 / 202.0),
            (102.0, 202.0, 1.0 / 202.0, -1.0 / 202.0),
        ],
        "bimodal",
    )
    q = _linear_density(
        [
            (0.0, 101.0, 50.5 / 10201.0, 50.5 / 10201.0),
            (101.0, 202.0, 50.5 / 10201.0, -50.5 / 10201.0),
        ],
        "unimodal",
    )

    def P(x):
        xc = np.clip(x, 0.0, 202.0)
        return np.select(
            [xc <= 100.0, xc <= 101.0, xc <= 102.0],
            [
                xc * xc / 20200.0,
                (-10100.0 + 202.0 * xc - xc * xc) / 202.0,
                (10302.0 - 202.0 * xc + xc * xc) / 202.0,
            ],
            default=(-20604.0 + 404.0 * xc - xc * xc) / 20200.0,
        )

    top = 1.0 / 101.0

    def Ps(x):
        xc = np.clip(x, 0.0, top)
        v = (101.0 * xc) ** 2
        return np.where(x >= top, 1.0, np.where(x < 0.0, 0.0, v))

    return ExampleSuite(
        name="bimodal",
        p=p,
        q=q,
        P_analytic=_scalarized(P),
        Pscript_analytic=_scalarized(Ps),
        notes="two symmetric triangles joined by a notch that touches zero",
    )


# --- smooth: damped two-tone cosine ------------------------------------------


def _smooth_integrand(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-np.abs(x)) * (
        2.0 + np.cos(_SMOOTH_B1 * x) + np.cos(_SMOOTH_B2 * x)
    )


def _ib(b: float, s):
    """Antiderivative on [0, s] of e^{-t} cos(b t)."""
    return (1.0 - np.exp(-s) * (np.cos(b * s) - b * np.sin(b * s))) / (1.0 + b * b)


def _smooth_A(s):
    """Antiderivative on [0, s] of the unnormalized smooth integrand."""
    return 2.0 * (1.0 - np.exp(-s)) + _ib(_SMOOTH_B1, s) + _ib(_SMOOTH_B2, s)


def _smooth_analytic_constant() -> float:
    return 1.0 / (2.0 * float(_smooth_A(1.0)))


@lru_cache(maxsize=1)
def _smooth_fitted() -> tuple[PiecewiseFn, float]:
    """Fitted smooth density (unit mass) and its normalizing constant."""
    fn0 = build(_smooth_integrand, (-1.0, 1.0), breakpoints=[0.0])
    c = 1.0 / fn0.definite_integral()
    scaled = PiecewiseFn(
        [ChebPiece(pc.interval, pc.coefficients * c) for pc in fn0.pieces]
    )
    return scaled, c


def smooth_constant() -> float:
    """Normalizing constant of the smooth example, computed by the kernel."""
    return _smooth_fitted()[1]


def _smooth_pdf_exact(x):
    return _smooth_analytic_constant() * _smooth_integrand(x)


class _SmoothLevelOracle:
    """Reference level map for the smooth density on a dense grid.

    The density is sampled on a uniform grid over [-1, 1] and modelled
    linearly inside each cell.  For a query level, cells entirely at or
    below the level contribute their trapezoid mass (via a prefix sum
    over cells sorted by upper value); the few cells straddling the
    level contribute the exact mass of the linear model's sublevel part.
    A level line crosses the density O(1) times, so a sorted sweep keeps
    the straddling sets small.
    """

    def __init__(self):
        m = _ORACLE_CELLS
        x = np.linspace(-1.0, 1.0, m + 1)
        pv = _smooth_pdf_exact(x)
        self.h = 2.0 / m
        self.v0 = pv[:-1]
        self.v1 = pv[1:]
        mass = 0.5 * self.h * (self.v0 + self.v1)
        vlo = np.minimum(self.v0, self.v1)
        vhi = np.maximum(self.v0, self.v1)
        hi_order = np.argsort(vhi, kind="stable")
        self.hi_sorted = vhi[hi_order]
        self.hi_order = hi_order
        self.mass_prefix = np.concatenate(([0.0], np.cumsum(mass[hi_order])))
        lo_order = np.argsort(vlo, kind="stable")
        self.lo_sorted = vlo[lo_order]
        self.lo_order = lo_order

    def __call__(self, levels):
        levels = np.atleast_1d(np.asarray(levels, dtype=float))
        order = np.argsort(levels, kind="stable")
        out = np.zeros(levels.shape)
        active: set[int] = set()
        i = j = 0
        nlo = self.lo_sorted.size
        for pos in order:
            lv = levels[pos]
            if lv <= 0.0:
                continue
            while i < nlo and self.lo_sorted[i] < lv:
                active.add(int(self.lo_order[i]))
                i += 1
            while j < nlo and self.hi_sorted[j] <= lv:
                active.discard(int(self.hi_order[j]))
                j += 1
            total = self.mass_prefix[j]
            if active:
                idx = np.fromiter(active, dtype=np.int64, count=len(active))
                a = self.v0[idx]
                b = self.v1[idx]
                theta = (lv - a) / (b - a)
                part = np.where(
                    b > a,
                    0.5 * self.h * theta * (a + lv),
                    0.5 * self.h * (1.0 - theta) * (lv + b),
                )
                total += float(np.sum(part))
            out[pos] = min(total, 1.0)
        return out


@lru_cache(maxsize=1)
def _smooth_level_oracle() -> _SmoothLevelOracle:
    return _SmoothLevelOracle()


def _smooth_suite() -> ExampleSuite:
    fitted, _ = _smooth_fitted()
    p = validate(fitted, label="smooth")
    q_scale = 1.0 / (2.0 - 2.0 * math.exp(-1.0))
    q = Density.from_callable(
        lambda x: q_scale * np.exp(-np.abs(np.asarray(x, dtype=float))),
        (-1.0, 1.0),
        breakpoints=[0.0],
        label="two-sided exponential",
    )

    ca = _smooth_analytic_constant()
    a1 = float(_smooth_A(1.0))

    def P(x):
        xc = np.clip(x, -1.0, 1.0)
        return ca * (a1 + np.sign(xc) * _smooth_A(np.abs(xc)))

    def Ps(x):
        return _smooth_level_oracle()(x)

    return ExampleSuite(
        name="smooth",
        p=p,
        q=q,
        P_analytic=_scalarized(P),
        Pscript_analytic=_scalarized(Ps),
        notes="damped two-tone cosine with 12 interior zeros and ~78 extrema",
    )


_BUILDERS = {
    "sawtooth": _sawtooth_suite,
    "step": _step_suite,
    "step2": _step2_suite,
    "bimodal": _bimodal_suite,
    "smooth": _smooth_suite,
}


@lru_cache(maxsize=None)
def builtin(name: str) -> ExampleSuite:
    """The named example suite, built once per process.

    Raises ValueError for unknown names, listing what is available.
    """
    if name not in _BUILDERS:
        raise ValueError(
            f"unknown example {name!r}; available: {', '.join(SUITE_NAMES)}"
        )
    return _BUILDERS[name]()
