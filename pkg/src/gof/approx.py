"""Adaptive piecewise Chebyshev approximation on bounded intervals.

Real-valued piecewise-smooth functions are represented as Chebyshev series
on subintervals chosen adaptively: the node count on a subinterval is
doubled until the trailing series coefficients fall below tolerance, and
subintervals that refuse to converge at the degree cap are bisected.  On
top of the representation the module provides stable (Clenshaw) evaluation,
antiderivatives, definite integrals, location of local extrema, and
level-set root finding with a bisection/Newton hybrid.  Callers must
declare known kinks or jumps as breakpoints; smoothness is assumed on the
interior of each declared piece.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial import chebyshev as cheb

__all__ = [
    "ApproxError",
    "Interval",
    "ChebPiece",
    "PiecewiseFn",
    "Extremum",
    "build",
    "DEFAULT_TOL",
]

DEFAULT_TOL = 1e-13

_FIRST_NODES = 17
_MAX_NODES = 2 ** 14 + 1
_MAX_DEPTH = 40
_EPS = float(np.finfo(float).eps)
# maximum piece size handled by the vectorised gather evaluator
_MATRIX_WIDTH = 8


class ApproxError(Exception):
    """Adaptive construction failed; carries the offending subinterval."""

    def __init__(self, message: str, interval: tuple[float, float] | None = None):
        super().__init__(message)
        self.interval = interval


@dataclass(frozen=True)
class Interval:
    """Closed bounded interval with ``lo < hi``."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"interval endpoints must be finite, got [{self.lo}, {self.hi}]")
        if not lo < hi:
            raise ValueError(f"interval needs lo < hi, got [{self.lo}, {self.hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x, slack: float = 0.0):
        return (np.asarray(x) >= self.lo - slack) & (np.asarray(x) <= self.hi + slack)


def _chebpts(n: int) -> np.ndarray:
    """Chebyshev points of the second kind on [-1, 1], ascending."""
    if n == 1:
        return np.zeros(1)
    return np.cos(np.pi * np.arange(n - 1, -1, -1) / (n - 1))


def _vals2coeffs(vals: np.ndarray) -> np.ndarray:
    """Values at second-kind points (ascending) -> Chebyshev coefficients."""
    n = vals.size
    if n <= 1:
        return np.asarray(vals, dtype=float).copy()
    ext = np.concatenate([vals[::-1], vals[1:-1]])
    coef = np.real(np.fft.ifft(ext))[:n]
    coef[1 : n - 1] *= 2.0
    return coef


def _trim(coef: np.ndarray, cut: float) -> np.ndarray:
    keep = np.nonzero(np.abs(coef) > cut)[0]
    if keep.size == 0:
        return np.zeros(1)
    return np.array(coef[: keep[-1] + 1])


@dataclass(frozen=True)
class ChebPiece:
    """A Chebyshev series on a single subinterval.

    Coefficients refer to the series in the local variable
    ``t = (2x - lo - hi) / (hi - lo)``.
    """

    interval: Interval
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coefficients, dtype=float))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must be a nonempty 1-d array")
        object.__setattr__(self, "coefficients", c)

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    def to_local(self, x):
        a, b = self.interval.lo, self.interval.hi
        return (2.0 * np.asarray(x, dtype=float) - (a + b)) / (b - a)

    def from_local(self, t):
        a, b = self.interval.lo, self.interval.hi
        return 0.5 * (a + b) + 0.5 * (b - a) * np.asarray(t, dtype=float)

    def __call__(self, x):
        return cheb.chebval(self.to_local(x), self.coefficients)

    def eval_local(self, t):
        return cheb.chebval(t, self.coefficients)

    def derivative_coefficients(self) -> np.ndarray:
        """Coefficients of d/dx on this piece (still in the local basis)."""
        if self.coefficients.size == 1:
            return np.zeros(1)
        return cheb.chebder(self.coefficients, m=1, scl=2.0 / self.interval.width)

    def antiderivative_piece(self) -> "ChebPiece":
        """Antiderivative on this piece, zero at the left endpoint."""
        ci = cheb.chebint(self.coefficients, m=1, scl=0.5 * self.interval.width, lbnd=-1.0)
        return ChebPiece(self.interval, ci)

    def integral(self) -> float:
        c = self.coefficients
        k = np.arange(c.size)
        w = np.zeros(c.size)
        even = k % 2 == 0
        w[even] = 2.0 / (1.0 - k[even].astype(float) ** 2)
        return 0.5 * self.interval.width * float(np.dot(c, w))

    def restricted(self, lo: float, hi: float) -> "ChebPiece":
        """Exact restriction to [lo, hi] inside this piece.

        A polynomial of degree d is reproduced exactly by interpolation at
        d+1 nodes, so re-expansion on the subinterval loses nothing.
        """
        sub = Interval(lo, hi)
        n = max(self.coefficients.size, 2)
        xs = 0.5 * (lo + hi) + 0.5 * (hi - lo) * _chebpts(n)
        vals = self(xs)
        coef = _vals2coeffs(vals)
        scale = max(1.0, float(np.max(np.abs(vals))))
        return ChebPiece(sub, _trim(coef, 4.0 * _EPS * scale))


class Extremum(NamedTuple):
    location: float
    value: float
    kind: str  # 'min' | 'max' | 'endpoint'


class PiecewiseFn:
    """A function represented as Chebyshev pieces tiling a closed interval.

    Evaluation is right-continuous at interior breakpoints; the last piece
    owns the domain's right endpoint.
    """

    def __init__(self, pieces: Sequence[ChebPiece]):
        pieces = tuple(pieces)
        if not pieces:
            raise ValueError("need at least one piece")
        bps = [pieces[0].interval.lo]
        for p in pieces:
            if p.interval.lo != bps[-1]:
                raise ValueError("pieces must tile the domain with shared endpoints")
            bps.append(p.interval.hi)
        self.pieces = pieces
        self.breakpoints = np.asarray(bps, dtype=float)
        self._interior = self.breakpoints[1:-1]
        self._vscale_cache: float | None = None
        self._matrix_cache: np.ndarray | None = None
        self._matrix_checked = False

    @property
    def domain(self) -> Interval:
        return Interval(float(self.breakpoints[0]), float(self.breakpoints[-1]))

    # -- evaluation ---------------------------------------------------------

    def piece_index(self, x) -> np.ndarray:
        return np.searchsorted(self._interior, x, side="right")

    def _matrix(self) -> np.ndarray | None:
        # padded coefficient matrix for low-degree pieces; lets evaluation
        # run one vectorised Clenshaw pass instead of a python loop
        if not self._matrix_checked:
            self._matrix_checked = True
            width = max(p.coefficients.size for p in self.pieces)
            if width <= _MATRIX_WIDTH and len(self.pieces) > 4:
                mat = np.zeros((len(self.pieces), width))
                for i, p in enumerate(self.pieces):
                    mat[i, : p.coefficients.size] = p.coefficients
                self._matrix_cache = mat
        return self._matrix_cache

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        scalar = xs.ndim == 0
        xs = np.atleast_1d(xs)
        lo, hi = float(self.breakpoints[0]), float(self.breakpoints[-1])
        slack = 1e-12 * max(1.0, hi - lo, abs(lo), abs(hi))
        bad = (xs < lo - slack) | (xs > hi + slack)
        if np.any(bad):
            raise ValueError(
                f"evaluation point {xs[bad][0]!r} outside domain [{lo}, {hi}]"
            )
        xs = np.clip(xs, lo, hi)
        idx = self.piece_index(xs)
        mat = self._matrix()
        if mat is not None:
            a = self.breakpoints[idx]
            b = self.breakpoints[idx + 1]
            t = (2.0 * xs - a - b) / (b - a)
            coefs = mat[idx]
            m = coefs.shape[1]
            bk1 = np.zeros_like(t)
            bk2 = np.zeros_like(t)
            for k in range(m - 1, 0, -1):
                bk1, bk2 = coefs[:, k] + 2.0 * t * bk1 - bk2, bk1
            out = coefs[:, 0] + t * bk1 - bk2
        else:
            out = np.empty_like(xs)
            for k in np.unique(idx):
                sel = idx == k
                out[sel] = self.pieces[k](xs[sel])
        return float(out[0]) if scalar else out

    def _vscale(self) -> float:
        if self._vscale_cache is None:
            m = 0.0
            for p in self.pieces:
                ts = _chebpts(max(p.coefficients.size, 9))
                m = max(m, float(np.max(np.abs(p.eval_local(ts)))))
            self._vscale_cache = m
        return self._vscale_cache

    # -- calculus -----------------------------------------------------------

    def antiderivative(self, anchor: float) -> "PiecewiseFn":
        """Continuous antiderivative vanishing at ``anchor``."""
        dom = self.domain
        if not bool(dom.contains(anchor, slack=1e-12 * max(1.0, dom.width))):
            raise ValueError(f"anchor {anchor!r} outside domain")
        raw = [p.antiderivative_piece() for p in self.pieces]
        shifted = []
        run = 0.0
        for p in raw:
            c = p.coefficients.copy()
            c[0] += run
            shifted.append(ChebPiece(p.interval, c))
            run += float(p.eval_local(1.0))
        fn = PiecewiseFn(shifted)
        offset = fn(anchor)
        if offset != 0.0:
            final = []
            for p in fn.pieces:
                c = p.coefficients.copy()
                c[0] -= offset
                final.append(ChebPiece(p.interval, c))
            fn = PiecewiseFn(final)
        return fn

    def derivative(self) -> "PiecewiseFn":
        return PiecewiseFn(
            [ChebPiece(p.interval, p.derivative_coefficients()) for p in self.pieces]
        )

    def definite_integral(self) -> float:
        return float(sum(p.integral() for p in self.pieces))

    # -- structure ----------------------------------------------------------

    def local_extrema(self) -> list[Extremum]:
        """All interior stationary points plus endpoints and breakpoints.

        Stationary points are the real roots of the per-piece derivative;
        classification is by comparison with nearby values, so a point
        that is not a genuine local extremum (a monotone kink, a plateau
        edge) is labelled 'endpoint'.
        """
        scale = max(1.0, self._vscale())
        tolv = 1e-12 * scale
        out: list[Extremum] = []

        n_pieces = len(self.pieces)
        for j, bp in enumerate(self.breakpoints):
            bp = float(bp)
            if j == 0:
                out.append(Extremum(bp, float(self.pieces[0].eval_local(-1.0)), "endpoint"))
                continue
            if j == n_pieces:
                out.append(Extremum(bp, float(self.pieces[-1].eval_local(1.0)), "endpoint"))
                continue
            left, right = self.pieces[j - 1], self.pieces[j]
            h = 1e-5 * min(left.interval.width, right.interval.width)
            v = float(right.eval_local(-1.0))
            vl = float(left.eval_local(1.0))
            fl = float(left(bp - h))
            fr = float(right(bp + h))
            lo_side = min(vl, v)
            hi_side = max(vl, v)
            if hi_side < min(fl, fr) - tolv:
                kind = "min"
            elif lo_side > max(fl, fr) + tolv:
                kind = "max"
            elif v < min(fl, fr) - tolv:
                # right-continuous value sits below both neighbours (jump)
                kind = "min"
            elif v > max(fl, fr) + tolv:
                kind = "max"
            else:
                kind = "endpoint"
            out.append(Extremum(bp, v, kind))

        for piece in self.pieces:
            dcoef = _trim(cheb.chebder(piece.coefficients), 0.0)
            if dcoef.size <= 1:
                # constant (possibly zero) derivative: no isolated
                # stationary points on this piece
                continue
            roots_t = cheb.chebroots(dcoef)
            roots_t = roots_t[np.abs(roots_t.imag) <= 1e-9].real
            roots_t = roots_t[(roots_t > -1.0 + 1e-9) & (roots_t < 1.0 - 1e-9)]
            if roots_t.size == 0:
                continue
            roots_t = np.sort(roots_t)
            keep = [roots_t[0]]
            for t0 in roots_t[1:]:
                if t0 - keep[-1] > 1e-9:
                    keep.append(t0)
            w = piece.interval.width
            h = 1e-5 * w
            for t0 in keep:
                x0 = float(piece.from_local(t0))
                if min(x0 - piece.interval.lo, piece.interval.hi - x0) <= 1e-11 * w:
                    continue
                v = float(piece(x0))
                xl = max(x0 - h, piece.interval.lo)
                xr = min(x0 + h, piece.interval.hi)
                fl = float(piece(xl))
                fr = float(piece(xr))
                if v < min(fl, fr) - tolv:
                    kind = "min"
                elif v > max(fl, fr) + tolv:
                    kind = "max"
                else:
                    kind = "endpoint"
                out.append(Extremum(x0, v, kind))

        out.sort(key=lambda e: e.location)
        deduped: list[Extremum] = []
        width = self.domain.width
        for e in out:
            if deduped and abs(e.location - deduped[-1].location) <= 1e-11 * width:
                continue
            deduped.append(e)
        return deduped

    def roots_at_level(self, level: float) -> np.ndarray:
        """All x with f(x) = level, sorted; tangencies collapse to a point.

        Each root is isolated inside a span on which the function is
        monotone (between consecutive extrema) and refined by the
        bisection/Newton hybrid.
        """
        level = float(level)
        ext = self.local_extrema()
        locs = [e.location for e in ext]
        match_tol = 1e-11 * max(1.0, abs(level))
        width = self.domain.width
        roots: list[float] = []
        for a, b in zip(locs, locs[1:]):
            if b - a <= 1e-13 * width:
                continue
            k = int(self.piece_index(0.5 * (a + b)))
            piece = self.pieces[k]
            fa = float(piece(a))
            fb = float(piece(b))
            if abs(fa - level) <= match_tol:
                roots.append(a)
            if abs(fb - level) <= match_tol:
                roots.append(b)
            if (fa - level) * (fb - level) < 0.0:
                roots.append(_hybrid_root(piece, a, b, level, fa, fb))
        roots.sort()
        out: list[float] = []
        for r in roots:
            if out and abs(r - out[-1]) <= 1e-10 * max(1.0, width):
                continue
            out.append(r)
        return np.asarray(out)


def _hybrid_root(
    piece: ChebPiece, lo: float, hi: float, level: float, flo: float, fhi: float
) -> float:
    """Solve piece(y) = level on [lo, hi] with a sign change at the ends.

    Ten bisection steps narrow the bracket, then Newton runs for at most
    five steps; if Newton leaves the bracket, hits a flat derivative, or
    fails to push the update below machine precision, pure bisection
    finishes the job (bracket width <= 2**(2-53) times the initial width).
    """
    width0 = hi - lo
    sgn = 1.0 if fhi >= flo else -1.0

    def g(y: float) -> float:
        return sgn * (float(piece(y)) - level)

    for _ in range(10):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0:
            return mid
        if gm < 0.0:
            lo = mid
        else:
            hi = mid

    dcoef = cheb.chebder(piece.coefficients)
    y = 0.5 * (lo + hi)
    gy = g(y)
    for _ in range(5):
        d = sgn * float(cheb.chebval(piece.to_local(y), dcoef)) * (
            2.0 / piece.interval.width
        )
        if d == 0.0 or not math.isfinite(d):
            break
        y_new = y - gy / d
        if not (lo <= y_new <= hi) or not math.isfinite(y_new):
            break
        step = abs(y_new - y)
        y = y_new
        gy = g(y)
        if gy == 0.0:
            return y
        if gy < 0.0:
            lo = y
        else:
            hi = y
        if step <= 4.0 * _EPS * (abs(y) + width0):
            return y

    target = 2.0 ** (2 - 53) * width0
    while hi - lo > target:
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            break
        gm = g(mid)
        if gm == 0.0:
            return mid
        if gm < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class _BuildState:
    __slots__ = ("vscale",)

    def __init__(self):
        self.vscale = 0.0


def _node_points(a: float, b: float, n: int) -> np.ndarray:
    xs = 0.5 * (a + b) + 0.5 * (b - a) * _chebpts(n)
    # sample just inside the ends so piecewise definitions with one-sided
    # values at the seams are read from the interior of this piece
    delta = max(2e-15 * (b - a), 8.0 * float(np.spacing(max(abs(a), abs(b)))))
    xs[0] = a + delta
    xs[-1] = b - delta
    return xs


def _eval_nodes(f: Callable, xs: np.ndarray, state: _BuildState) -> np.ndarray:
    try:
        vals = np.asarray(f(xs), dtype=float)
        if vals.shape != xs.shape:
            raise TypeError("shape mismatch")
    except (TypeError, ValueError):
        vals = np.array([float(f(float(x))) for x in xs])
    if not np.all(np.isfinite(vals)):
        x_bad = float(xs[~np.isfinite(vals)][0])
        raise ApproxError(f"function returned a non-finite value near x={x_bad!r}")
    if vals.size:
        state.vscale = max(state.vscale, float(np.max(np.abs(vals))))
    return vals


def _fit(
    f: Callable, a: float, b: float, tol: float, state: _BuildState, depth: int
) -> list[ChebPiece]:
    vals: np.ndarray | None = None
    n = _FIRST_NODES
    while n <= _MAX_NODES:
        xs = _node_points(a, b, n)
        if vals is None:
            vals = _eval_nodes(f, xs, state)
        else:
            merged = np.empty(n)
            merged[0::2] = vals
            merged[1::2] = _eval_nodes(f, xs[1::2], state)
            vals = merged
        coef = _vals2coeffs(vals)
        scale = max(1.0, state.vscale)
        if float(np.max(np.abs(coef[-2:]))) <= tol * scale:
            return [ChebPiece(Interval(a, b), _trim(coef, tol * scale))]
        n = 2 * n - 1
    if depth >= _MAX_DEPTH:
        raise ApproxError(
            f"no convergence on [{a}, {b}] at the degree cap", interval=(a, b)
        )
    mid = 0.5 * (a + b)
    return _fit(f, a, mid, tol, state, depth + 1) + _fit(f, mid, b, tol, state, depth + 1)


def build(
    f: Callable,
    domain: Interval | tuple[float, float],
    breakpoints: Sequence[float] | None = None,
    tol: float = DEFAULT_TOL,
) -> PiecewiseFn:
    """Adaptively fit ``f`` on ``domain`` into a :class:`PiecewiseFn`.

    Parameters
    ----------
    f : callable
        Pointwise evaluator; may accept numpy arrays (faster) or scalars.
    domain : Interval or (lo, hi)
        Bounded interval on which to represent ``f``.
    breakpoints : sequence of float, optional
        Interior locations of known kinks or jumps; each becomes a piece
        boundary.  Must lie strictly inside the domain.
    tol : float
        Relative tolerance in (0, 1e-6]; the result satisfies
        ``|fn(x) - f(x)| <= tol * max(1, sup|f|)`` away from breakpoints.
    """
    dom = domain if isinstance(domain, Interval) else Interval(*domain)
    if not 0.0 < tol <= 1e-6:
        raise ValueError(f"tol must lie in (0, 1e-6], got {tol!r}")
    bps: list[float] = []
    for raw in sorted(float(x) for x in (breakpoints or ())):
        if not dom.lo < raw < dom.hi:
            raise ValueError(f"breakpoint {raw!r} not strictly inside the domain")
        if bps and raw - bps[-1] <= 1e-14 * dom.width:
            continue
        bps.append(raw)
    edges = [dom.lo, *bps, dom.hi]
    state = _BuildState()
    pieces: list[ChebPiece] = []
    for a, b in zip(edges, edges[1:]):
        pieces.extend(_fit(f, a, b, tol, state, 0))
    return PiecewiseFn(pieces)
