"""Tests for density construction, validation, and sampling."""

import numpy as np
import pytest

from gof.density import (
    GENERATOR_NAME,
    Density,
    density_from_spec_lines,
    piecewise_constant,
    read_samples,
    validate,
)

from gof.approx import build


TRIANGLE_SPEC = [
    "# triangle on [0, 2]",
    "support 0 2",
    "",
    "0 1 0.5 0.5",
    "1 2 0.5 -0.5",
]


def test_piecewise_constant_cdf_exact():
    d = piecewise_constant([0.0, 1.0, 2.0, 3.0], [0.2, 0.5, 0.3])
    P = d.cdf()
    assert P(0.0) == 0.0
    assert P(1.0) == pytest.approx(0.2, abs=1e-15)
    assert P(2.0) == pytest.approx(0.7, abs=1e-15)
    assert P(3.0) == 1.0
    assert P(1.5) == pytest.approx(0.45, abs=1e-15)
    # total on the real line
    assert P(-5.0) == 0.0
    assert P(10.0) == 1.0


def test_piecewise_constant_quantile_roundtrip():
    d = piecewise_constant([0.0, 1.0, 2.0, 3.0], [0.2, 0.5, 0.3])
    P = d.cdf()
    xs = np.linspace(0.01, 2.99, 57)
    assert np.max(np.abs(d.quantile(P(xs)) - xs)) <= 1e-12
    assert d.quantile(0.0) == 0.0
    assert d.quantile(1.0) == 3.0


def test_quantile_skips_zero_mass_gap():
    d = piecewise_constant([0.0, 1.0, 2.0, 3.0], [0.5, 0.0, 0.5])
    assert d.quantile(0.5) == pytest.approx(1.0, abs=1e-12)
    assert d.quantile(0.5 + 1e-9) == pytest.approx(2.0 + 2e-9, abs=1e-12)
    assert d.quantile(0.25) == pytest.approx(0.5, abs=1e-12)


def test_piecewise_constant_validation():
    with pytest.raises(ValueError):
        piecewise_constant([0.0, 1.0], [0.5])  # mass 0.5
    with pytest.raises(ValueError):
        piecewise_constant([0.0, 1.0, 0.5], [0.5, 0.5])
    with pytest.raises(ValueError):
        piecewise_constant([0.0, 1.0, 2.0], [1.5, -0.5])
    with pytest.raises(ValueError):
        piecewise_constant([0.0, 1.0, 2.0], [1.0])


def test_validate_rejects_negative_dip():
    # mass is exactly 1 but the parabola dips to -0.2 in the middle
    with pytest.raises(ValueError):
        Density.from_callable(
            lambda x: -0.2 + 14.4 * (x - 0.5) ** 2, (0.0, 1.0)
        )


def test_validate_rejects_wrong_mass():
    fn = build(lambda x: np.full_like(np.asarray(x, dtype=float), 0.9), (0.0, 1.0))
    with pytest.raises(ValueError):
        validate(fn)


def test_from_callable_cubic_cdf():
    d = Density.from_callable(lambda x: 3.0 * x**2, (0.0, 1.0), label="cubic")
    P = d.cdf()
    xs = np.linspace(0.0, 1.0, 101)
    assert np.max(np.abs(P(xs) - xs**3)) <= 1e-12
    assert d.label == "cubic"
    assert np.max(np.abs(d.quantile(xs**3) - xs)) <= 1e-9


def test_pdf_values_outside_support_are_zero():
    d = Density.from_callable(lambda x: 3.0 * x**2, (0.0, 1.0))
    vals = d.pdf_values(np.array([-0.5, 0.5, 1.5]))
    assert vals[0] == 0.0
    assert vals[2] == 0.0
    assert vals[1] == pytest.approx(0.75, rel=1e-12)
    assert isinstance(d.pdf_values(0.5), float)


def test_sampling_is_deterministic_and_inverse_cdf():
    d = piecewise_constant([0.0, 1.0, 2.0, 3.0], [0.2, 0.5, 0.3], label="steps")
    s1 = d.sample(100, 7)
    s2 = d.sample(100, 7)
    assert np.array_equal(s1.draws, s2.draws)
    s3 = d.sample(100, 8)
    assert not np.array_equal(s1.draws, s3.draws)
    u = np.random.default_rng(7).random(100)
    assert np.array_equal(s1.draws, d.quantile(u))
    assert s1.seed == 7
    assert s1.n == 100
    assert s1.source == "steps"
    assert s1.generator == GENERATOR_NAME == "pcg64"
    with pytest.raises(ValueError):
        d.sample(0, 1)


def test_quantile_rejects_out_of_range():
    d = piecewise_constant([0.0, 1.0], [1.0])
    with pytest.raises(ValueError):
        d.quantile(-0.1)
    with pytest.raises(ValueError):
        d.quantile(1.1)


def test_spec_lines_triangle_roundtrip():
    d = density_from_spec_lines(TRIANGLE_SPEC, origin="triangle.txt")
    assert d.label == "triangle.txt"
    assert (d.support.lo, d.support.hi) == (0.0, 2.0)
    xs = np.linspace(0.0, 2.0, 81)
    expect = np.where(xs <= 1.0, xs, 2.0 - xs)
    assert np.max(np.abs(d.pdf_values(xs) - expect)) <= 1e-14
    P = d.cdf()
    assert P(1.0) == pytest.approx(0.5, abs=1e-14)
    assert P(2.0) == pytest.approx(1.0, abs=1e-14)


def test_spec_lines_errors_carry_line_numbers():
    with pytest.raises(ValueError, match="missing 'support"):
        density_from_spec_lines(["0 1 1.0"])
    with pytest.raises(ValueError, match=":2:"):
        density_from_spec_lines(["support 0 1", "0 1 one"])
    with pytest.raises(ValueError, match=":1:"):
        density_from_spec_lines(["support 0"])
    with pytest.raises(ValueError, match="no piece lines"):
        density_from_spec_lines(["support 0 1", "# nothing else"])
    with pytest.raises(ValueError, match="differs from the declared support"):
        density_from_spec_lines(["support 0 3", "0 1 0.5 0.5", "1 2 0.5 -0.5"])


def test_spec_lines_rejects_non_density():
    with pytest.raises(ValueError, match="mass"):
        density_from_spec_lines(["support 0 1", "0 1 0.5"])


def test_read_samples(tmp_path):
    path = tmp_path / "draws.txt"
    path.write_text(
        "# seed: 42\n# source: somewhere\n# generator: pcg64\n"
        "# a free comment\n0.25\n\n0.75\n"
    )
    s = read_samples(str(path))
    assert np.array_equal(s.draws, [0.25, 0.75])
    assert s.seed == 42
    assert s.source == "somewhere"
    assert s.generator == "pcg64"


def test_read_samples_errors(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("0.5\nabc\n")
    with pytest.raises(ValueError, match=":2:"):
        read_samples(str(bad))
    empty = tmp_path / "empty.txt"
    empty.write_text("# only a comment\n")
    with pytest.raises(ValueError, match="no sample values"):
        read_samples(str(empty))
