"""Validated probability densities with CDFs and inverse-CDF sampling.

A density is a nonnegative piecewise representation on a bounded support
that integrates to one.  Two kinds are supported: general piecewise-smooth
densities backed by the approximation kernel, and piecewise-constant
densities that carry an exact level table so that their distribution
functions and quantiles involve no polynomial fitting at all.  Sampling is
inverse-CDF from a seeded generator, recorded for replay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from gof.approx import ChebPiece, Interval, PiecewiseFn, build, DEFAULT_TOL

__all__ = [
    "Density",
    "CDF",
    "SampleSet",
    "validate",
    "piecewise_constant",
    "density_from_spec_lines",
    "read_samples",
    "GENERATOR_NAME",
]

GENERATOR_NAME = "pcg64"

MASS_TOL = 1e-10
NEGATIVE_TOL = 1e-9
_QUANTILE_STEPS = 60

KIND_SMOOTH = "smooth-piecewise"
KIND_CONSTANT = "piecewise-constant"


@dataclass(frozen=True)
class SampleSet:
    """I.i.d. draws with provenance for exact replay."""

    draws: np.ndarray
    seed: int | None
    source: str
    generator: str = GENERATOR_NAME

    def __post_init__(self):
        d = np.atleast_1d(np.asarray(self.draws, dtype=float))
        object.__setattr__(self, "draws", d)

    @property
    def n(self) -> int:
        return int(self.draws.size)


@dataclass(frozen=True)
class CDF:
    """Nondecreasing map from the support onto [0, 1].

    Arguments left of the support map to 0 and right of it to 1, so the
    evaluator is total on the real line.
    """

    fn: PiecewiseFn
    domain: Interval

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        scalar = xs.ndim == 0
        xc = np.clip(xs, self.domain.lo, self.domain.hi)
        out = np.clip(self.fn(xc), 0.0, 1.0)
        return float(out) if scalar else out


class Density:
    """A probability density certified nonnegative with unit mass.

    Use :func:`validate`, :func:`piecewise_constant`, or
    :meth:`Density.from_callable` instead of the constructor.
    """

    def __init__(
        self,
        pdf: PiecewiseFn,
        support: Interval,
        kind: str,
        levels: list[tuple[float, float]] | None = None,
        label: str = "density",
    ):
        self.pdf = pdf
        self.support = support
        self.kind = kind
        self.levels = levels
        self.label = label
        self._cdf: CDF | None = None
        self._pc_tables = None
        self._rearranged = None

    @staticmethod
    def from_callable(
        f: Callable,
        support: Interval | tuple[float, float],
        breakpoints: Sequence[float] | None = None,
        tol: float = DEFAULT_TOL,
        label: str = "density",
    ) -> "Density":
        dom = support if isinstance(support, Interval) else Interval(*support)
        fn = build(f, dom, breakpoints=breakpoints, tol=tol)
        return validate(fn, label=label)

    # -- pointwise values ----------------------------------------------------

    def pdf_values(self, x):
        """Density values; zero outside the support, negatives clipped to 0."""
        xs = np.asarray(x, dtype=float)
        scalar = xs.ndim == 0
        xs = np.atleast_1d(xs)
        inside = (xs >= self.support.lo) & (xs <= self.support.hi)
        out = np.zeros_like(xs)
        if np.any(inside):
            out[inside] = np.maximum(self.pdf(xs[inside]), 0.0)
        return float(out[0]) if scalar else out

    # -- cumulative distribution ---------------------------------------------

    def cdf(self) -> CDF:
        if self._cdf is None:
            if self.kind == KIND_CONSTANT:
                fn = self._assemble_constant_cdf()
            else:
                fn = self.pdf.antiderivative(self.support.lo)
            self._cdf = CDF(fn, self.support)
        return self._cdf

    def _assemble_constant_cdf(self) -> PiecewiseFn:
        # exact linear pieces: no fitting through the jump locations
        pieces = []
        run = 0.0
        for p in self.pdf.pieces:
            a, b = p.interval.lo, p.interval.hi
            v = float(p.coefficients[0])
            half = 0.5 * (b - a)
            c0 = run + v * half
            c1 = v * half
            pieces.append(ChebPiece(p.interval, np.array([c0, c1])))
            run += v * (b - a)
        return PiecewiseFn(pieces)

    # -- quantiles and sampling ------------------------------------------------

    def _constant_tables(self):
        if self._pc_tables is None:
            lo_list, v_list, mass = [], [], []
            for p in self.pdf.pieces:
                v = float(p.coefficients[0])
                if v <= 0.0:
                    continue
                lo_list.append(p.interval.lo)
                v_list.append(v)
                mass.append(v * p.interval.width)
            chi = np.cumsum(mass)
            self._pc_tables = (
                np.asarray(lo_list),
                np.asarray(v_list),
                chi,
                np.concatenate([[0.0], chi[:-1]]),
            )
        return self._pc_tables

    def quantile(self, u):
        """Smallest x with cdf(x) >= u, vectorized over u in [0, 1]."""
        us = np.asarray(u, dtype=float)
        scalar = us.ndim == 0
        us = np.atleast_1d(us)
        if np.any((us < -1e-12) | (us > 1.0 + 1e-12)):
            raise ValueError("quantile argument must lie in [0, 1]")
        us = np.clip(us, 0.0, 1.0)
        if self.kind == KIND_CONSTANT:
            out = self._quantile_constant(us)
        else:
            out = self._quantile_bisect(us)
        return float(out[0]) if scalar else out

    def _quantile_constant(self, us: np.ndarray) -> np.ndarray:
        lo, v, chi, clo = self._constant_tables()
        idx = np.searchsorted(chi, us, side="left")
        idx = np.minimum(idx, chi.size - 1)
        out = lo[idx] + (us - clo[idx]) / v[idx]
        out[us <= 0.0] = self.support.lo
        return np.minimum(out, self.support.hi)

    def _quantile_bisect(self, us: np.ndarray) -> np.ndarray:
        cdf = self.cdf()
        bps = cdf.fn.breakpoints
        fb = np.clip(cdf.fn(bps), 0.0, 1.0)
        fb[0], fb[-1] = 0.0, 1.0
        # bracket per point: fb[j] < u <= fb[j+1]
        j = np.searchsorted(fb[1:], us, side="left")
        j = np.minimum(j, bps.size - 2)
        lo = bps[j].copy()
        hi = bps[j + 1].copy()
        for _ in range(_QUANTILE_STEPS):
            mid = 0.5 * (lo + hi)
            ge = cdf.fn(mid) >= us
            hi = np.where(ge, mid, hi)
            lo = np.where(ge, lo, mid)
        out = hi
        out[us <= 0.0] = self.support.lo
        return out

    def sample(self, n: int, seed: int) -> SampleSet:
        """n inverse-CDF draws from a freshly seeded deterministic stream."""
        if n < 1:
            raise ValueError(f"sample size must be at least 1, got {n}")
        rng = np.random.default_rng(seed)
        draws = self.quantile(rng.random(n))
        return SampleSet(draws=draws, seed=seed, source=self.label)


def validate(pdf: PiecewiseFn, label: str = "density") -> Density:
    """Certify a piecewise representation as a probability density.

    Mass must equal one within ``1e-10`` and the representation must not
    dip below ``-1e-9`` relative to its scale anywhere (small negative
    wiggle from fitting is clipped to zero at evaluation time).  No
    renormalization is performed.
    """
    mass = pdf.definite_integral()
    if abs(mass - 1.0) > MASS_TOL:
        raise ValueError(f"density mass is {mass!r}, not 1 within {MASS_TOL}")
    scale = max(1.0, pdf._vscale())
    floor = -NEGATIVE_TOL * scale
    worst = 0.0
    for e in pdf.local_extrema():
        worst = min(worst, e.value)
    if worst < floor:
        raise ValueError(
            f"density dips to {worst!r}, below the allowed floor {floor!r}"
        )
    dom = pdf.domain
    return Density(pdf, Interval(dom.lo, dom.hi), KIND_SMOOTH, label=label)


def piecewise_constant(
    edges: Sequence[float], values: Sequence[float], label: str = "density"
) -> Density:
    """Exact step density: ``values[i]`` on ``[edges[i], edges[i+1])``."""
    edges = np.asarray(edges, dtype=float)
    values = np.asarray(values, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or values.size != edges.size - 1:
        raise ValueError("need n+1 edges for n segment values")
    if np.any(np.diff(edges) <= 0):
        raise ValueError("edges must be strictly increasing")
    if np.any(values < 0):
        raise ValueError("segment values must be nonnegative")
    mass = float(np.dot(values, np.diff(edges)))
    if abs(mass - 1.0) > MASS_TOL:
        raise ValueError(f"density mass is {mass!r}, not 1 within {MASS_TOL}")
    pieces = [
        ChebPiece(Interval(a, b), np.array([v]))
        for a, b, v in zip(edges[:-1], edges[1:], values)
    ]
    fn = PiecewiseFn(pieces)
    table: dict[float, float] = {}
    for a, b, v in zip(edges[:-1], edges[1:], values):
        table[float(v)] = table.get(float(v), 0.0) + (b - a)
    levels = sorted(table.items())
    dom = fn.domain
    return Density(fn, Interval(dom.lo, dom.hi), KIND_CONSTANT, levels=levels, label=label)


def density_from_spec_lines(lines: Sequence[str], origin: str = "<spec>") -> Density:
    """Parse the piecewise density spec format.

    One header line ``support lo hi`` followed by one line per piece,
    ``lo hi c0 c1 ...`` with Chebyshev coefficients on [lo, hi].  Blank
    lines and ``#`` comments are ignored.  Errors carry the 1-based line
    number.
    """
    support: Interval | None = None
    pieces: list[ChebPiece] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "support":
            if len(parts) != 3:
                raise ValueError(
                    f"{origin}:{lineno}: expected 'support lo hi', got {line!r}"
                )
            try:
                support = Interval(float(parts[1]), float(parts[2]))
            except ValueError as exc:
                raise ValueError(f"{origin}:{lineno}: {exc}") from None
            continue
        if len(parts) < 3:
            raise ValueError(
                f"{origin}:{lineno}: expected 'lo hi c0 c1 ...', got {line!r}"
            )
        try:
            nums = [float(tok) for tok in parts]
        except ValueError:
            raise ValueError(
                f"{origin}:{lineno}: could not parse {line!r} as numbers"
            ) from None
        try:
            pieces.append(ChebPiece(Interval(nums[0], nums[1]), np.array(nums[2:])))
        except ValueError as exc:
            raise ValueError(f"{origin}:{lineno}: {exc}") from None
    if support is None:
        raise ValueError(f"{origin}: missing 'support lo hi' header line")
    if not pieces:
        raise ValueError(f"{origin}: no piece lines found")
    pieces.sort(key=lambda p: p.interval.lo)
    fn = PiecewiseFn(pieces)
    if fn.domain.lo != support.lo or fn.domain.hi != support.hi:
        raise ValueError(
            f"{origin}: pieces cover [{fn.domain.lo}, {fn.domain.hi}], "
            f"which differs from the declared support [{support.lo}, {support.hi}]"
        )
    return validate(fn, label=origin)


def read_samples(path: str) -> SampleSet:
    """Read a samples file: one number per line, '#' lines carry metadata.

    Metadata lines of the form ``# key: value`` with keys seed, source, or
    generator populate the returned SampleSet; other comments are ignored.
    """
    draws: list[float] = []
    meta: dict[str, str] = {}
    with open(path) as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if ":" in body:
                    key, _, value = body.partition(":")
                    meta[key.strip().lower()] = value.strip()
                continue
            try:
                draws.append(float(line))
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: could not parse {line!r} as a number"
                ) from None
    if not draws:
        raise ValueError(f"{path}: no sample values found")
    seed: int | None = None
    if "seed" in meta:
        try:
            seed = int(meta["seed"])
        except ValueError:
            seed = None
    return SampleSet(
        draws=np.asarray(draws),
        seed=seed,
        source=meta.get("source", path),
        generator=meta.get("generator", "unknown"),
    )
