"""Goodness-of-fit statistics over a density and its level map.

Three statistics judge whether draws X_1..X_n come from a density p with
distribution function P and level map 𝒫 (the distribution function of
p(X), module ``rearranged``):

- U: the classical Kuiper statistic of the sample against P.
- V: the Kuiper statistic of the transformed values p(X_k) against 𝒫.
- W: n times the smallest 𝒫(p(X_k)); small W means some draw sits where
  the density carries almost no mass, and 1 - W lower-bounds the
  confidence in rejecting p when W ≤ 1.

U and V get asymptotic significance levels from the Kuiper tail series
with a small-sample correction, reported as log10 of the p-value.  W has
a distribution-free tail bound 1 - (1 - x/n)^n, valid for any p, with
equality when 𝒫 is continuous; ``w_threshold`` inverts it.  W̃ (the mean
of the 𝒫-transformed values) and generalized averages f(mean g(·)) are
exposed without significance theory.

Both Kuiper variants evaluate their suprema exactly through order
statistics; V uses one-sided values of 𝒫 so that atoms (densities
taking a value on a set of positive length) are handled exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from gof.density import CDF, Density, SampleSet
from gof.rearranged import RearrangedDF

__all__ = [
    "KuiperResult",
    "WResult",
    "TestReport",
    "kuiper_u",
    "kuiper_v",
    "kuiper_log10_pvalue",
    "w_statistic",
    "w_tail_bound",
    "w_threshold",
    "w_tilde",
    "generalized_average",
    "GEOMETRIC_PAIR",
    "deficiency_pair",
]

_LN10 = math.log(10.0)


@dataclass(frozen=True)
class KuiperResult:
    """A Kuiper statistic with its one-sided parts and significance.

    ``statistic`` is sqrt(n)-scaled: sqrt(n) * (max(d_plus, 0) +
    max(d_minus, 0)).  ``log10_pvalue`` is the asymptotic tail estimate,
    never positive.
    """

    statistic: float
    d_plus: float
    d_minus: float
    n: int
    log10_pvalue: float


@dataclass(frozen=True)
class WResult:
    """The minimum-tail statistic w = n * min_k 𝒫(p(X_k)).

    ``min_index`` is the position of the minimizing draw in the original
    sample order.  When w ≤ 1, ``confidence_lower_bound`` = 1 - w bounds
    from below the confidence with which the null density is rejected.
    """

    w: float
    n: int
    min_index: int
    confidence_lower_bound: float


@dataclass(frozen=True)
class TestReport:
    """Results of one run over a sample; at least one statistic present.

    The V significance estimate is conservative when the density takes
    finitely many values (the transformed draws are then discrete).
    """

    density: str
    source: str
    seed: int | None
    n: int
    u: KuiperResult | None = None
    v: KuiperResult | None = None
    w: WResult | None = None
    w_tilde: float | None = None

    def __post_init__(self):
        if self.u is None and self.v is None and self.w is None and self.w_tilde is None:
            raise ValueError("a test report needs at least one statistic")

    def to_kv_lines(self) -> list[str]:
        """Flat key=value serialization, full float precision."""
        lines = [
            f"density={self.density}",
            f"source={self.source}",
            f"seed={'' if self.seed is None else self.seed}",
            f"n={self.n}",
        ]
        for name, res in (("u", self.u), ("v", self.v)):
            if res is None:
                continue
            lines.append(f"{name}_statistic={res.statistic!r}")
            lines.append(f"{name}_d_plus={res.d_plus!r}")
            lines.append(f"{name}_d_minus={res.d_minus!r}")
            lines.append(f"{name}_log10_pvalue={res.log10_pvalue!r}")
        if self.w is not None:
            lines.append(f"w={self.w.w!r}")
            lines.append(f"w_min_index={self.w.min_index}")
            lines.append(f"w_confidence_lower_bound={self.w.confidence_lower_bound!r}")
        if self.w_tilde is not None:
            lines.append(f"w_tilde={self.w_tilde!r}")
        return lines


def _require_sample(s: SampleSet):
    if s.n < 1:
        raise ValueError("empty sample")


def _kuiper(upper: np.ndarray, lower: np.ndarray, n: int) -> KuiperResult:
    """Assemble a Kuiper result from one-sided transformed values.

    ``lower`` holds the (right-continuous) values compared against k/n,
    ``upper`` the left limits compared against (k-1)/n; for a continuous
    transform the two arrays coincide.
    """
    k = np.arange(1, n + 1, dtype=float)
    d_plus = float(np.max(upper - (k - 1.0) / n))
    d_minus = float(np.max(k / n - lower))
    statistic = math.sqrt(n) * (max(d_plus, 0.0) + max(d_minus, 0.0))
    return KuiperResult(
        statistic=statistic,
        d_plus=d_plus,
        d_minus=d_minus,
        n=n,
        log10_pvalue=kuiper_log10_pvalue(statistic, n),
    )


def kuiper_u(s: SampleSet, P: CDF) -> KuiperResult:
    """Kuiper statistic of the sample against the distribution function P.

    The sup and inf of P minus the empirical distribution function are
    exact: P is nondecreasing and the empirical function jumps only at
    sample points, so order statistics see every extreme.
    """
    _require_sample(s)
    u = np.sort(P(s.draws))
    return _kuiper(u, u, s.n)


def kuiper_v(s: SampleSet, d: Density, r: RearrangedDF) -> KuiperResult:
    """Kuiper statistic of the transformed values p(X_k) against 𝒫.

    Right-continuous values of 𝒫 feed the lower side and left limits
    the upper side, which keeps the supremum exact when 𝒫 has atoms.
    """
    _require_sample(s)
    t = np.sort(d.pdf_values(s.draws))
    hi = np.atleast_1d(r.evaluate(t))
    lo = np.atleast_1d(r.left_limit(t))
    return _kuiper(lo, hi, s.n)


def kuiper_log10_pvalue(statistic: float, n: int) -> float:
    """log10 of the asymptotic Kuiper tail probability, clamped to ≤ 0.

    The statistic is multiplied by the small-sample factor
    1 + 0.155/sqrt(n) + 0.24/n, then fed to the tail series
    2 Σ_j (4 j² λ² - 1) e^{-2 j² λ²}.  Past λ = 3 the first term alone
    is accurate and the value is formed directly in log space, which
    keeps extreme levels (10^-50 and far beyond) exact in magnitude.
    """
    statistic = float(statistic)
    if statistic <= 0.0:
        return 0.0
    lam = statistic * (1.0 + 0.155 / math.sqrt(n) + 0.24 / n)
    if lam < 0.4:
        return 0.0
    if lam < 3.0:
        j = np.arange(1, 21, dtype=float)
        e = np.exp(-2.0 * (j * lam) ** 2)
        q = 2.0 * float(np.sum((4.0 * (j * lam) ** 2 - 1.0) * e))
        q = min(max(q, 5e-324), 1.0)
        return min(math.log10(q), 0.0)
    return min(
        math.log10(2.0 * (4.0 * lam * lam - 1.0)) - 2.0 * lam * lam / _LN10, 0.0
    )


def w_statistic(s: SampleSet, d: Density, r: RearrangedDF) -> WResult:
    """W = n times the smallest 𝒫(p(X_k)), with the minimizing draw."""
    _require_sample(s)
    vals = np.atleast_1d(r.evaluate(d.pdf_values(s.draws)))
    idx = int(np.argmin(vals))
    w = float(s.n * vals[idx])
    conf = max(0.0, 1.0 - w) if w <= 1.0 else 0.0
    return WResult(w=w, n=s.n, min_index=idx, confidence_lower_bound=conf)


def w_tail_bound(x: float, n: int) -> float:
    """Upper bound on P{W ≤ x}: 1 - (1 - x/n)^n, exact for continuous 𝒫."""
    x = float(x)
    if not 0.0 <= x <= n:
        raise ValueError(f"x must lie in [0, n] = [0, {n}], got {x!r}")
    q = x / n
    if q >= 1.0:
        return 1.0
    return -math.expm1(n * math.log1p(-q))


def w_threshold(alpha: float, n: int) -> float:
    """The x with tail bound alpha: n - n (1-alpha)^{1/n}.

    Satisfies alpha ≤ x < min(-ln(1-alpha), alpha + alpha²), with
    equality x = alpha at n = 1.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha must lie in (0, 0.5), got {alpha!r}")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if n == 1:
        return alpha
    return -n * math.expm1(math.log1p(-alpha) / n)


def w_tilde(s: SampleSet, d: Density, r: RearrangedDF) -> float:
    """Mean of the 𝒫-transformed values, an averaged alternative to W."""
    _require_sample(s)
    vals = np.atleast_1d(r.evaluate(d.pdf_values(s.draws)))
    return float(np.mean(vals))


def generalized_average(
    s: SampleSet,
    d: Density,
    r: RearrangedDF,
    f: Callable[[float], float],
    g: Callable[[float], float],
) -> float:
    """f of the mean of g over the 𝒫-transformed values.

    With f = g = identity this is w_tilde; the shipped pairs are
    GEOMETRIC_PAIR (exp of mean log) and deficiency_pair(q).
    """
    _require_sample(s)
    vals = np.atleast_1d(r.evaluate(d.pdf_values(s.draws)))
    try:
        gv = np.asarray(g(vals), dtype=float)
        if gv.shape != vals.shape:
            raise TypeError
    except (TypeError, ValueError):
        gv = np.array([float(g(float(v))) for v in vals])
    bad = ~np.isfinite(gv)
    if np.any(bad):
        k = int(np.nonzero(bad)[0][0])
        raise ValueError(
            f"g({vals[k]!r}) is not finite for draw {k} "
            f"(sample value {float(s.draws[k])!r})"
        )
    return float(f(float(np.mean(gv))))


GEOMETRIC_PAIR: tuple[Callable, Callable] = (np.exp, np.log)


def deficiency_pair(q: float) -> tuple[Callable, Callable]:
    """The pair f(x) = 1 - x^(1/q), g(x) = (1 - x)^q for q > 1."""
    q = float(q)
    if q <= 1.0:
        raise ValueError(f"q must exceed 1, got {q!r}")

    def f(x):
        return 1.0 - x ** (1.0 / q)

    def g(x):
        return (1.0 - x) ** q

    return f, g
