"""Distribution function of the density's own values.

For a density p, the map x ↦ mass of {y : p(y) ≤ x} is a nondecreasing,
right-continuous distribution function on [0, sup p]: the probability
that the random variable p(X) lies at or below x when X is drawn from p.
It jumps at every level that p holds on a set of positive length (each
such level carries an atom of mass level · length) and is continuous
elsewhere.

Construction proceeds in four steps: partition the support at local
extrema so the density is monotone on each cell; attach to each cell an
antiderivative anchored at the endpoint where the density is smaller;
evaluate the mass at or below a level by summing, per cell, either the
full cell mass, zero, or the absolute antiderivative value at the root
p(y) = level; and finally fit a piecewise polynomial representation of
the whole map over [0, sup p] for fast repeated evaluation.  Levels where
the map loses smoothness (cell range endpoints, atom values) become
representation breakpoints; spans whose endpoint is approached with a
vanishing density slope get a square-root-type singularity and are
handled with a graded mesh and monotone cubic interpolation instead of a
single polynomial fit.

Piecewise-constant densities bypass the fitting entirely: their map is a
pure step function assembled exactly from the level table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.interpolate import PchipInterpolator

from gof.approx import (
    ApproxError,
    ChebPiece,
    Interval,
    PiecewiseFn,
    build,
    _chebpts,
    _hybrid_root,
    _trim,
    _vals2coeffs,
)
from gof.density import Density, KIND_CONSTANT, KIND_SMOOTH

__all__ = [
    "MonotonePiece",
    "RearrangedDF",
    "monotone_partition",
    "invert_on_piece",
    "eval_rearranged",
    "eval_rearranged_left_limit",
    "build_rearranged",
    "DIRECTION_UP",
    "DIRECTION_DOWN",
]

DIRECTION_UP = "nondecreasing"
DIRECTION_DOWN = "nonincreasing"

_EPS = float(np.finfo(float).eps)
# levels closer than this (relative to sup p) collapse to one breakpoint
_CLUSTER_FLOOR = 1e-12
# endpoint slope below this fraction of the steepest slope marks a
# square-root singularity in the level map
_CUSP_RATIO = 1e-5
_BISECT_STEPS = 60
_REFINE_ROUNDS = 10


@dataclass(frozen=True)
class MonotonePiece:
    """A support cell on which the density is monotone (or constant).

    ``p_lo`` and ``p_hi`` are the density values at the cell endpoints
    where the density is smaller and larger.  The antiderivative is
    anchored at the smaller-p endpoint, so its absolute value at a root
    p(y) = x is exactly the mass the cell holds at or below level x.
    """

    interval: Interval
    direction: str
    p_lo: float
    p_hi: float
    poly: ChebPiece
    antiderivative: PiecewiseFn
    mass: float
    constant: bool = False


def monotone_partition(d: Density) -> list[MonotonePiece]:
    """Cut the support at local extrema into monotone cells.

    Constant cells are kept and flagged; they carry mass at a single
    level rather than a root path.  A derivative sign change strictly
    inside a produced cell means extrema location failed and raises.
    """
    if d.kind != KIND_SMOOTH:
        raise ValueError(
            f"monotone partition needs a smooth-piecewise density, got kind {d.kind!r}"
        )
    pdf = d.pdf
    dom = pdf.domain
    res = 1e-12 * max(1.0, dom.width)
    bps = [float(b) for b in pdf.breakpoints]
    extra: list[float] = []
    for e in pdf.local_extrema():
        x = float(e.location)
        j = np.searchsorted(pdf.breakpoints, x)
        near_bp = False
        for jj in (j - 1, j):
            if 0 <= jj < len(bps) and abs(x - bps[jj]) <= res:
                near_bp = True
        if near_bp:
            continue
        if extra and x - extra[-1] <= res:
            continue
        extra.append(x)
    cells = sorted(bps + extra)

    out: list[MonotonePiece] = []
    for a, b in zip(cells, cells[1:]):
        k = int(pdf.piece_index(0.5 * (a + b)))
        src = pdf.pieces[k]
        if a == src.interval.lo and b == src.interval.hi:
            poly = src
        else:
            poly = src.restricted(a, b)
        va = float(poly.eval_local(-1.0))
        vb = float(poly.eval_local(1.0))
        constant = poly.coefficients.size == 1
        direction = DIRECTION_UP if (constant or vb >= va) else DIRECTION_DOWN
        if not constant:
            _check_monotone(poly, direction, a, b)
        raw = poly.antiderivative_piece()
        mass = max(float(raw.eval_local(1.0)), 0.0)
        if direction == DIRECTION_DOWN:
            c = raw.coefficients.copy()
            c[0] -= float(raw.eval_local(1.0))
            anchored = ChebPiece(raw.interval, c)
        else:
            anchored = raw
        p_lo = max(min(va, vb), 0.0)
        p_hi = max(max(va, vb), 0.0)
        out.append(
            MonotonePiece(
                interval=Interval(a, b),
                direction=direction,
                p_lo=p_lo,
                p_hi=p_hi,
                poly=poly,
                antiderivative=PiecewiseFn([anchored]),
                mass=mass,
                constant=constant,
            )
        )
    return out


def _check_monotone(poly: ChebPiece, direction: str, a: float, b: float):
    dcoef = poly.derivative_coefficients()
    ts = _chebpts(max(2 * poly.coefficients.size + 1, 17))
    dv = cheb.chebval(ts, dcoef)
    scale = max(float(np.max(np.abs(dv))), 1e-300)
    sgn = 1.0 if direction == DIRECTION_UP else -1.0
    if float(np.min(sgn * dv)) < -1e-9 * scale:
        raise ApproxError(
            f"density derivative changes sign inside the cell [{a}, {b}]; "
            "extrema location failed",
            interval=(a, b),
        )


def invert_on_piece(piece: MonotonePiece, x: float) -> float:
    """The y in the cell with p(y) = x, via bisection with a Newton finish.

    Ten bisection steps narrow the bracket, then at most five Newton
    steps run from the bracket midpoint; a Newton iterate that leaves
    the bracket or stops improving hands back to plain bisection.
    """
    if piece.constant:
        raise ValueError("level inversion is undefined on a constant cell")
    x = float(x)
    slack = 4.0 * float(np.spacing(max(abs(piece.p_lo), abs(piece.p_hi), 1.0)))
    if x < piece.p_lo - slack or x > piece.p_hi + slack:
        raise ValueError(
            f"level {x!r} outside the cell's value range "
            f"[{piece.p_lo!r}, {piece.p_hi!r}]"
        )
    a, b = piece.interval.lo, piece.interval.hi
    va = float(piece.poly.eval_local(-1.0))
    vb = float(piece.poly.eval_local(1.0))
    if x == va:
        return a
    if x == vb:
        return b
    x = min(max(x, min(va, vb)), max(va, vb))
    return float(_hybrid_root(piece.poly, a, b, x, va, vb))


class _PieceArrays:
    """Flat arrays over the non-constant cells for batched evaluation."""

    def __init__(self, pieces: list[MonotonePiece]):
        nc = [p for p in pieces if not p.constant]
        self.pieces = nc
        self.p_lo = np.array([p.p_lo for p in nc])
        self.p_hi = np.array([p.p_hi for p in nc])
        self.mass = np.array([p.mass for p in nc])
        self.sgn = np.array(
            [1.0 if p.direction == DIRECTION_UP else -1.0 for p in nc]
        )
        coefs = [p.poly.coefficients for p in nc]
        antis = [p.antiderivative.pieces[0].coefficients for p in nc]
        self.deg = np.array([c.size for c in coefs], dtype=np.int64)
        dmax = max((c.size for c in coefs), default=1)
        amax = max((a.size for a in antis), default=1)
        self.cmat = np.zeros((len(nc), dmax))
        self.amat = np.zeros((len(nc), amax))
        for i, (c, a) in enumerate(zip(coefs, antis)):
            self.cmat[i, : c.size] = c
            self.amat[i, : a.size] = a

    @property
    def total(self) -> float:
        return float(np.sum(self.mass)) if len(self.pieces) else 0.0


def _row_clenshaw(t: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Chebyshev evaluation with one coefficient row per point."""
    if C.shape[1] == 1:
        return C[:, 0].copy()
    bk1 = np.zeros_like(t)
    bk2 = np.zeros_like(t)
    t2 = 2.0 * t
    for k in range(C.shape[1] - 1, 0, -1):
        bk1, bk2 = C[:, k] + t2 * bk1 - bk2, bk1
    return C[:, 0] + t * bk1 - bk2


def _invert_rows(arrs: "_PieceArrays", rows: np.ndarray, levels: np.ndarray):
    """Local coordinates of p(y) = level for (cell, level) pairs.

    Linear cells solve in closed form; the rest bisect, bucketed by
    coefficient count so each bucket pays only its own degree.
    """
    t = np.empty(rows.size)
    deg = arrs.deg[rows]
    lin = deg <= 2
    if np.any(lin):
        r0 = rows[lin]
        t[lin] = np.clip(
            (levels[lin] - arrs.cmat[r0, 0]) / arrs.cmat[r0, 1], -1.0, 1.0
        )
    for d in np.unique(deg[~lin]):
        sel = deg == d
        C = arrs.cmat[rows[sel], :d]
        sg = arrs.sgn[rows[sel]]
        blv = levels[sel]
        lo = np.full(blv.shape, -1.0)
        hi = np.ones(blv.shape)
        for _ in range(_BISECT_STEPS):
            mid = 0.5 * (lo + hi)
            below = sg * (_row_clenshaw(mid, C) - blv) < 0.0
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        t[sel] = 0.5 * (lo + hi)
    return t


def _continuous_mass(
    arrs: _PieceArrays,
    levels: np.ndarray,
    p_lo: np.ndarray | None = None,
    p_hi: np.ndarray | None = None,
) -> np.ndarray:
    """Mass at or below each level, summed over the non-constant cells.

    This is the continuous part of the level map: atoms from constant
    cells are accounted for separately by the callers.
    """
    levels = np.asarray(levels, dtype=float)
    out = np.zeros(levels.shape)
    k_n = len(arrs.pieces)
    if k_n == 0:
        return out
    lo_arr = arrs.p_lo if p_lo is None else p_lo
    hi_arr = arrs.p_hi if p_hi is None else p_hi
    chunk = max(1, 4_000_000 // k_n)
    for s in range(0, levels.size, chunk):
        sl = slice(s, min(s + chunk, levels.size))
        lv = levels[sl]
        full = lv[None, :] >= hi_arr[:, None]
        out[sl] += arrs.mass @ full
        partial = ~full & (lv[None, :] > lo_arr[:, None])
        rows, cols = np.nonzero(partial)
        if rows.size:
            t = _invert_rows(arrs, rows, lv[cols])
            np.add.at(out[sl], cols, np.abs(_row_clenshaw(t, arrs.amat[rows])))
    return out


@dataclass
class RearrangedDF:
    """Right-continuous distribution function of p(X) on [0, max_p].

    ``atoms`` lists (level, jump mass) pairs ascending; ``representation``
    is a fitted piecewise polynomial of the map for smooth densities and
    None for piecewise-constant ones, whose map is evaluated exactly from
    the atom table.
    """

    pieces: list[MonotonePiece]
    atoms: list[tuple[float, float]]
    representation: PiecewiseFn | None
    max_p: float
    total_mass: float
    label: str = "density"
    _atom_values: np.ndarray = field(init=False, repr=False)
    _atom_masses: np.ndarray = field(init=False, repr=False)
    _atom_cum: np.ndarray = field(init=False, repr=False)
    _arrays: _PieceArrays = field(init=False, repr=False)

    def __post_init__(self):
        self.atoms = sorted((float(v), float(m)) for v, m in self.atoms)
        self._atom_values = np.array([v for v, _ in self.atoms])
        self._atom_masses = np.array([m for _, m in self.atoms])
        self._atom_cum = np.concatenate([[0.0], np.cumsum(self._atom_masses)])
        self._arrays = _PieceArrays(self.pieces)

    def _prepare(self, x):
        xs = np.asarray(x, dtype=float)
        scalar = xs.ndim == 0
        xs = np.atleast_1d(xs)
        if np.any(xs < 0.0):
            raise ValueError(
                f"levels must be nonnegative, got {float(xs[xs < 0.0][0])!r}"
            )
        return xs, scalar

    def _atom_mass_below(self, xs: np.ndarray, strict: bool) -> np.ndarray:
        if self._atom_values.size == 0:
            return np.zeros(xs.shape)
        side = "left" if strict else "right"
        return self._atom_cum[np.searchsorted(self._atom_values, xs, side=side)]

    def _matched_atom_mass(self, xs: np.ndarray) -> np.ndarray:
        """Jump mass at levels that coincide with an atom (within 4 ulp)."""
        out = np.zeros(xs.shape)
        av = self._atom_values
        if av.size == 0:
            return out
        j = np.searchsorted(av, xs)
        for jj in (j - 1, j):
            k = np.clip(jj, 0, av.size - 1)
            hit = np.abs(xs - av[k]) <= 4.0 * np.spacing(np.abs(av[k]))
            out = np.where(hit, self._atom_masses[k], out)
        return out

    def evaluate(self, x):
        """𝒫(x), right-continuous, vectorized; 1 at and above max_p."""
        xs, scalar = self._prepare(x)
        if self.representation is None:
            out = self._atom_mass_below(xs, strict=False)
        else:
            out = np.clip(
                self.representation(np.clip(xs, 0.0, self.max_p)),
                0.0,
                self.total_mass,
            )
            out = np.where(xs >= self.max_p, self.total_mass, out)
        return float(out[0]) if scalar else out

    def left_limit(self, x):
        """lim of 𝒫 from the left; differs from evaluate only at atoms."""
        xs, scalar = self._prepare(x)
        out = np.maximum(
            np.atleast_1d(self.evaluate(xs)) - self._matched_atom_mass(xs), 0.0
        )
        return float(out[0]) if scalar else out


def eval_rearranged(r: RearrangedDF, d: Density, x):
    """𝒫(x) by the direct per-cell sum (full mass, zero, or root value)."""
    xs, scalar = r._prepare(x)
    out = _continuous_mass(r._arrays, xs) + r._atom_mass_below(xs, strict=False)
    out = np.clip(out, 0.0, r.total_mass)
    return float(out[0]) if scalar else out


def eval_rearranged_left_limit(r: RearrangedDF, d: Density, x):
    """Left limit of 𝒫: the direct sum minus the atom mass at x, if any."""
    xs, scalar = r._prepare(x)
    out = _continuous_mass(r._arrays, xs) + r._atom_mass_below(xs, strict=False)
    out = np.clip(out - r._matched_atom_mass(xs), 0.0, r.total_mass)
    return float(out[0]) if scalar else out


def _collect_atoms(pieces: list[MonotonePiece]) -> list[tuple[float, float]]:
    """Merge constant cells into (level, mass) atoms.

    Levels closer than 1e-12 are one plateau; plateaus of total length
    at most 1e-12, or at level ≤ 1e-12, carry no resolvable atom.
    """
    flats = []
    for p in pieces:
        if p.constant:
            v = max(float(p.poly.coefficients[0]), 0.0)
            flats.append((v, p.interval.width))
    flats.sort()
    atoms: list[tuple[float, float]] = []
    i = 0
    while i < len(flats):
        j = i
        while j + 1 < len(flats) and flats[j + 1][0] - flats[j][0] <= 1e-12:
            j += 1
        group = flats[i : j + 1]
        length = sum(w for _, w in group)
        mass = sum(v * w for v, w in group)
        if length > 1e-12 and mass > 0.0:
            atoms.append((mass / length if length else 0.0, mass))
        i = j + 1
    return [(v, m) for v, m in atoms if v > 1e-12]


def build_rearranged(d: Density) -> RearrangedDF:
    """Construct 𝒫 for a density: exact steps for piecewise-constant
    densities, a fitted representation over [0, max_p] otherwise.

    The result is memoized on the density, so repeated calls with the
    same Density instance return the same object without rebuilding.
    """
    cached = getattr(d, "_rearranged", None)
    if cached is not None:
        return cached
    r = _build_rearranged_fresh(d)
    d._rearranged = r
    return r


def _build_rearranged_fresh(d: Density) -> RearrangedDF:
    if d.kind == KIND_CONSTANT:
        atoms = sorted(
            (float(v), float(v) * float(length))
            for v, length in (d.levels or [])
            if v > 0.0 and length > 0.0
        )
        if not atoms:
            raise ValueError("density has no positive levels")
        total = float(sum(m for _, m in atoms))
        return RearrangedDF(
            pieces=[],
            atoms=atoms,
            representation=None,
            max_p=atoms[-1][0],
            total_mass=total,
            label=d.label,
        )

    pieces = monotone_partition(d)
    atoms = _collect_atoms(pieces)
    max_p = max(
        max((p.p_hi for p in pieces), default=0.0),
        max((v for v, _ in atoms), default=0.0),
    )
    ctol = max(_CLUSTER_FLOOR, 1e-9 * max_p)
    if max_p <= 10.0 * ctol:
        raise ValueError(f"density maximum {max_p!r} too small to resolve")
    representation, total = _build_representation(pieces, atoms, max_p, ctol)
    return RearrangedDF(
        pieces=pieces,
        atoms=atoms,
        representation=representation,
        max_p=max_p,
        total_mass=total,
        label=d.label,
    )


def _cluster_levels(
    cand: list[tuple[float, int]], ctol: float
) -> np.ndarray:
    """Collapse near-equal breakpoint levels, keeping the most structural
    member of each cluster (domain ends, then atoms, then cell ranges)."""
    cand = sorted(cand)
    reps: list[float] = []
    group: list[tuple[float, int]] = []
    for v, pr in cand:
        if group and v - group[-1][0] > ctol:
            reps.append(max(group, key=lambda t: t[1])[0])
            group = []
        group.append((v, pr))
    if group:
        reps.append(max(group, key=lambda t: t[1])[0])
    return np.array(sorted(set(reps)))


def _snap(values: np.ndarray, reps: np.ndarray, ctol: float) -> np.ndarray:
    """Move each value onto its representative breakpoint level."""
    out = values.copy()
    j = np.clip(np.searchsorted(reps, values), 0, reps.size - 1)
    for jj in (j - 1, j):
        k = np.clip(jj, 0, reps.size - 1)
        hit = np.abs(values - reps[k]) <= ctol
        out = np.where(hit, reps[k], out)
    return out


def _graded_mesh(lo: float, hi: float, n_interior: int = 33) -> np.ndarray:
    # geometric grading tames square-root endpoint behaviour; the floor
    # keeps cells a few ulp wide so the affine node map stays resolvable
    w = hi - lo
    offs = []
    delta = max(1e-18 * w, 8.0 * float(np.spacing(max(abs(lo), abs(hi)))))
    while delta < w / 3.0:
        offs.append(delta)
        delta *= 2.0
    offs = np.array(offs)
    inner = np.linspace(lo, hi, n_interior + 2)[1:-1]
    return np.unique(np.concatenate([[lo], lo + offs, inner, hi - offs[::-1], [hi]]))


def _pchip_span(direct: Callable, lo: float, hi: float) -> list[ChebPiece]:
    """Fit one span with a square-root-type endpoint singularity.

    A mesh graded geometrically toward both endpoints feeds a monotone
    cubic interpolant; midpoint checks against the direct sum insert
    nodes until the interpolant tracks it to ~1e-7 relative (1e-9 floor).
    """
    mesh = _graded_mesh(lo, hi)
    vals = direct(mesh)
    interp = None
    for _ in range(_REFINE_ROUNDS):
        interp = PchipInterpolator(mesh, vals)
        mids = 0.5 * (mesh[:-1] + mesh[1:])
        dv = direct(mids)
        err = np.abs(interp(mids) - dv)
        bad = err > np.maximum(1e-9, 1e-7 * np.abs(dv))
        if not np.any(bad):
            break
        mesh = np.concatenate([mesh, mids[bad]])
        vals = np.concatenate([vals, dv[bad]])
        order = np.argsort(mesh)
        mesh = mesh[order]
        vals = vals[order]
    else:
        interp = PchipInterpolator(mesh, vals)
        mids = 0.5 * (mesh[:-1] + mesh[1:])
        dv = direct(mids)
        worst = float(np.max(np.abs(interp(mids) - dv)))
        if worst > 1e-6 * max(1.0, float(np.max(np.abs(vals)))):
            raise ApproxError(
                f"level map refinement stalled on [{lo}, {hi}] "
                f"(residual {worst:.3e})",
                interval=(lo, hi),
            )
    ts = _chebpts(4)
    scale = max(1.0, float(np.max(np.abs(vals))))
    out = []
    for a, b in zip(mesh[:-1], mesh[1:]):
        xs = 0.5 * (a + b) + 0.5 * (b - a) * ts
        # pin the endpoint samples: on cells a few ulp wide the affine
        # map rounds off the ends, and any endpoint drift breaks the
        # telescoping mass balance downstream
        xs[0] = a
        xs[-1] = b
        coef = _trim(_vals2coeffs(interp(xs)), 4.0 * _EPS * scale)
        out.append(ChebPiece(Interval(a, b), coef))
    return out


def _build_representation(
    pieces: list[MonotonePiece],
    atoms: list[tuple[float, float]],
    max_p: float,
    ctol: float,
) -> tuple[PiecewiseFn, float]:
    arrs = _PieceArrays(pieces)

    cand = [(0.0, 3), (float(max_p), 3)]
    for v, _ in atoms:
        cand.append((float(v), 2))
    end_slopes: list[tuple[float, float]] = []
    slope_ref = 1e-300
    for p in arrs.pieces:
        dcoef = p.poly.derivative_coefficients()
        for tloc in (-1.0, 1.0):
            value = max(float(p.poly.eval_local(tloc)), 0.0)
            slope = abs(float(cheb.chebval(tloc, dcoef)))
            end_slopes.append((value, slope))
        # steepest slope anywhere on the cell, so that densities whose
        # extrema all sit at equal heights still flag their critical
        # endpoints as square-root singularities of the level map
        slope_ref = max(slope_ref, float(np.sum(np.abs(dcoef))))
        cand.append((p.p_lo, 1))
        cand.append((p.p_hi, 1))
    reps = _cluster_levels(cand, ctol)

    snapped_lo = _snap(arrs.p_lo, reps, ctol)
    snapped_hi = _snap(arrs.p_hi, reps, ctol)

    def direct(levels):
        return _continuous_mass(arrs, np.asarray(levels, dtype=float),
                                p_lo=snapped_lo, p_hi=snapped_hi)

    rep_pieces: list[ChebPiece] = []
    for lo, hi in zip(reps[:-1], reps[1:]):
        w = hi - lo
        if w <= 50.0 * ctol:
            v0, v1 = direct(np.array([lo, hi]))
            rep_pieces.append(
                ChebPiece(Interval(lo, hi), np.array([0.5 * (v0 + v1), 0.5 * (v1 - v0)]))
            )
            continue
        # a span end attained with a near-zero density slope is a
        # square-root singularity of the map; strictly inside the span
        # the map is analytic, so only narrow end caps need the graded
        # monotone interpolant and the rest takes the adaptive fit
        lo_dirty = any(
            s < _CUSP_RATIO * slope_ref
            for v, s in end_slopes
            if abs(v - lo) <= ctol
        )
        hi_dirty = any(
            s < _CUSP_RATIO * slope_ref
            for v, s in end_slopes
            if abs(v - hi) <= ctol
        )
        if not (lo_dirty or hi_dirty):
            try:
                rep_pieces.extend(build(direct, Interval(lo, hi)).pieces)
                continue
            except ApproxError:
                rep_pieces.extend(_pchip_span(direct, lo, hi))
                continue
        cap = 1e-6 * w
        a = lo + cap if lo_dirty else lo
        b = hi - cap if hi_dirty else hi
        # geometric breakpoints keep each interior subpiece at a
        # proportionate distance from the end singularities, which
        # restores exponential convergence of the fit
        bps: list[float] = []
        delta = cap
        while delta < (b - a) / 4.0:
            if lo_dirty:
                bps.append(a + delta)
            if hi_dirty:
                bps.append(b - delta)
            delta *= 4.0
        if lo_dirty:
            rep_pieces.extend(_pchip_span(direct, lo, a))
        try:
            rep_pieces.extend(
                build(direct, Interval(a, b), breakpoints=sorted(set(bps))).pieces
            )
        except ApproxError:
            rep_pieces.extend(_pchip_span(direct, a, b))
        if hi_dirty:
            rep_pieces.extend(_pchip_span(direct, b, hi))

    # enforce continuity within spans and the exact atom jump across
    # span boundaries, so one-sided values at atoms come out exact
    rep_pieces.sort(key=lambda p: p.interval.lo)
    jump: dict[float, float] = {}
    for v, m in atoms:
        key = float(_snap(np.array([v]), reps, ctol)[0])
        jump[key] = jump.get(key, 0.0) + m
    running = 0.0
    snapped_pieces: list[ChebPiece] = []
    for p in rep_pieces:
        target = running + jump.get(p.interval.lo, 0.0)
        c = p.coefficients.copy()
        c[0] += target - float(p.eval_local(-1.0))
        q = ChebPiece(p.interval, c)
        snapped_pieces.append(q)
        running = float(q.eval_local(1.0))

    top_atom = jump.get(float(reps[-1]), 0.0)
    total = running + top_atom
    expected = arrs.total + float(sum(m for _, m in atoms))
    if abs(total - expected) > 1e-9 * max(1.0, expected):
        raise ApproxError(
            f"level-map construction lost mass: assembled {total!r}, "
            f"cells and atoms hold {expected!r}"
        )
    return PiecewiseFn(snapped_pieces), total
