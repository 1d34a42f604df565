"""Tests for the adaptive piecewise Chebyshev kernel."""

import numpy as np
import pytest

from gof.approx import ApproxError, ChebPiece, Interval, PiecewiseFn, build

from _oracles import gauss_legendre_integral


def test_build_exp_matches_function():
    f = build(np.exp, (0.0, 2.0))
    xs = np.linspace(0.0, 2.0, 2001)
    assert np.max(np.abs(f(xs) - np.exp(xs))) <= 1e-12 * np.exp(2.0)


def test_build_reproduces_polynomials_exactly():
    f = build(lambda x: x**3 - 2.0 * x + 0.5, (-2.0, 2.0))
    assert len(f.pieces) == 1
    xs = np.linspace(-2.0, 2.0, 101)
    assert np.max(np.abs(f(xs) - (xs**3 - 2.0 * xs + 0.5))) <= 1e-13 * 8.0


def test_definite_integral_exp():
    f = build(np.exp, (0.0, 2.0))
    exact = np.exp(2.0) - 1.0
    assert abs(f.definite_integral() - exact) <= 1e-12 * exact
    oracle = gauss_legendre_integral(np.exp, 0.0, 2.0, panels=200)
    assert abs(f.definite_integral() - oracle) <= 1e-12 * exact


def test_antiderivative_anchored():
    f = build(np.cos, (0.0, 3.0))
    F = f.antiderivative(0.0)
    xs = np.linspace(0.0, 3.0, 301)
    assert abs(F(0.0)) <= 1e-14
    assert np.max(np.abs(F(xs) - np.sin(xs))) <= 1e-12


def test_derivative():
    f = build(np.sin, (0.0, 3.0))
    df = f.derivative()
    xs = np.linspace(0.0, 3.0, 301)
    assert np.max(np.abs(df(xs) - np.cos(xs))) <= 1e-10


def test_breakpoints_give_exact_kink_fit():
    f = build(np.abs, (-1.0, 1.0), breakpoints=[0.0])
    assert [(p.interval.lo, p.interval.hi) for p in f.pieces] == [
        (-1.0, 0.0),
        (0.0, 1.0),
    ]
    xs = np.linspace(-1.0, 1.0, 401)
    assert np.max(np.abs(f(xs) - np.abs(xs))) <= 1e-13
    # a kink off the bisection grid forces adaptive subdivision
    g = build(lambda x: np.abs(x - 0.3), (-1.0, 1.0))
    assert len(g.pieces) > 2
    # near-duplicate breakpoints collapse to a single edge
    h = build(lambda x: np.abs(x - 0.3), (-1.0, 1.0), breakpoints=[0.3, 0.3 + 1e-16])
    assert len(h.pieces) == 2


def test_piece_index_right_continuous_at_boundary():
    f = build(np.abs, (-1.0, 1.0), breakpoints=[0.0])
    idx = f.piece_index(np.array([-0.5, 0.0, 0.5]))
    assert list(idx) == [0, 1, 1]


def test_breakpoint_validation():
    with pytest.raises(ValueError):
        build(np.exp, (0.0, 1.0), breakpoints=[1.0])
    with pytest.raises(ValueError):
        build(np.exp, (0.0, 1.0), breakpoints=[-0.2])


def test_tol_validation():
    with pytest.raises(ValueError):
        build(np.exp, (0.0, 1.0), tol=1e-5)
    with pytest.raises(ValueError):
        build(np.exp, (0.0, 1.0), tol=0.0)


def test_non_finite_values_raise_approx_error():
    def f(x):
        return np.where(np.asarray(x) > 0.5, np.nan, 1.0)

    with pytest.raises(ApproxError):
        build(f, (0.0, 1.0))


def test_evaluation_outside_domain():
    f = build(np.exp, (0.0, 1.0))
    assert f(1.0 + 1e-15) == pytest.approx(np.e, rel=1e-12)
    with pytest.raises(ValueError):
        f(2.0)
    with pytest.raises(ValueError):
        f(np.array([0.5, -1.0]))


def test_local_extrema_of_sin():
    f = build(np.sin, (0.0, 2.0 * np.pi))
    ex = f.local_extrema()
    interior = [e for e in ex if e.kind != "endpoint"]
    assert len(interior) == 2
    maxima = [e for e in interior if e.kind == "max"]
    minima = [e for e in interior if e.kind == "min"]
    assert len(maxima) == 1 and len(minima) == 1
    assert maxima[0].location == pytest.approx(np.pi / 2.0, abs=1e-8)
    assert maxima[0].value == pytest.approx(1.0, abs=1e-10)
    assert minima[0].location == pytest.approx(3.0 * np.pi / 2.0, abs=1e-8)
    assert minima[0].value == pytest.approx(-1.0, abs=1e-10)
    endpoints = sorted(e.location for e in ex if e.kind == "endpoint")
    assert endpoints == [0.0, 2.0 * np.pi]


def test_roots_at_level_cubic():
    f = build(lambda x: x**3 - 2.0 * x, (-2.0, 2.0))
    roots = f.roots_at_level(0.0)
    expected = np.array([-np.sqrt(2.0), 0.0, np.sqrt(2.0)])
    assert roots.size == 3
    assert np.max(np.abs(np.sort(roots) - expected)) <= 1e-9
    high = f.roots_at_level(100.0)
    assert high.size == 0


def test_roots_at_level_cosine():
    f = build(np.cos, (0.0, 2.0 * np.pi))
    roots = np.sort(f.roots_at_level(0.0))
    assert np.allclose(roots, [np.pi / 2.0, 3.0 * np.pi / 2.0], atol=1e-9)
    halves = np.sort(f.roots_at_level(0.5))
    assert np.allclose(halves, [np.pi / 3.0, 5.0 * np.pi / 3.0], atol=1e-9)


def test_cheb_piece_integral_and_restriction():
    piece = ChebPiece(Interval(0.0, 2.0), np.array([1.0, 1.0]))
    # f(x) = 1 + (x - 1) = x on [0, 2]
    assert piece.integral() == pytest.approx(2.0, abs=1e-14)
    sub = piece.restricted(0.5, 1.5)
    xs = np.linspace(0.5, 1.5, 11)
    assert np.max(np.abs(sub(xs) - xs)) <= 1e-14
    anti = piece.antiderivative_piece()
    assert anti(2.0) - anti(0.0) == pytest.approx(2.0, abs=1e-14)


def test_matrix_and_loop_paths_agree():
    pieces = [
        ChebPiece(Interval(float(k), float(k + 1)), np.array([0.5 + k, 0.5]))
        for k in range(6)
    ]
    f = PiecewiseFn(pieces)
    assert f._matrix() is not None
    xs = np.linspace(0.0, 6.0, 601)
    by_piece = np.concatenate(
        [pieces[k](xs[f.piece_index(xs) == k]) for k in range(6)]
    )
    order = np.argsort(f.piece_index(xs), kind="stable")
    assert np.array_equal(f(xs)[order], by_piece)
    assert f(2.5) == pytest.approx(pieces[2](2.5), abs=0.0)


def test_scalar_and_array_evaluation_agree():
    f = build(np.exp, (0.0, 1.0))
    xs = np.linspace(0.0, 1.0, 17)
    arr = f(xs)
    assert isinstance(f(0.5), float)
    for k, x in enumerate(xs):
        assert f(float(x)) == arr[k]


def test_interval_validation():
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)
    with pytest.raises(ValueError):
        Interval(np.nan, 1.0)
    assert Interval(0.0, 2.0).width == 2.0
