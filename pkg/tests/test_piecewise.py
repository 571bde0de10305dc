import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covercert.piecewise import PiecewisePoly, indicator


def numeric_box_convolution(fn, width, x, steps=4001):
    """Oracle: (1/w) * integral of fn over [x - w/2, x + w/2] by midpoint rule."""
    ts = np.linspace(x - width / 2, x + width / 2, steps)
    mids = 0.5 * (ts[:-1] + ts[1:])
    return fn(mids).sum() * (ts[1] - ts[0]) / width


class TestSingleConvolution:
    def test_trapezoid_shape(self):
        # indicator of [-1, 1] smoothed by a box of width 1/2
        p = indicator(1.0).convolve_unit_box(0.5)
        assert p(0.0) == pytest.approx(1.0)
        assert p(0.74) == pytest.approx(1.0)          # plateau out to 0.75
        assert p(1.25) == pytest.approx(0.0, abs=1e-14)
        assert p(1.0) == pytest.approx(0.5)           # midpoint of the ramp
        assert p(2.0) == 0.0

    def test_matches_overlap_oracle(self):
        # box average of an indicator is the overlap length divided by w
        p = indicator(0.8).convolve_unit_box(0.3)
        for x in [-1.1, -0.9, -0.5, 0.0, 0.33, 0.71, 0.9, 1.05]:
            lo, hi = max(x - 0.15, -0.8), min(x + 0.15, 0.8)
            expected = max(hi - lo, 0.0) / 0.3
            assert p(x) == pytest.approx(expected, abs=1e-12)

    def test_second_stage_matches_numeric_oracle(self):
        stage1 = indicator(0.8).convolve_unit_box(0.3)
        stage2 = stage1.convolve_unit_box(0.2)
        for x in [-1.2, -0.8, -0.4, 0.1, 0.62, 0.95, 1.14]:
            expected = numeric_box_convolution(lambda t: stage1(t), 0.2, x)
            assert stage2(x) == pytest.approx(expected, abs=1e-6)


class TestExactIdentities:
    def test_derivative_is_difference_quotient(self):
        # (f * box_w)'(x) = (f(x + w/2) - f(x - w/2)) / w, exactly
        f = indicator(1.0).convolve_unit_box(0.4)
        g = f.convolve_unit_box(0.25)
        dg = g.derivative()
        for x in np.linspace(-1.6, 1.6, 37):
            expected = (f(x + 0.125) - f(x - 0.125)) / 0.25
            assert dg(x) == pytest.approx(expected, abs=1e-11)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(0.05, 0.6), min_size=1, max_size=4))
    def test_mass_preserved(self, widths):
        p = indicator(0.75)
        for w in widths:
            p = p.convolve_unit_box(w)
        assert p.mass() == pytest.approx(1.5, rel=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.05, 0.9), st.floats(-3.0, 3.0))
    def test_range_stays_in_unit_interval(self, width, x):
        p = indicator(1.0).convolve_unit_box(width).convolve_unit_box(width / 2)
        v = p(x)
        assert -1e-12 <= v <= 1.0 + 1e-12

    def test_zero_outside_support(self):
        p = indicator(0.5).convolve_unit_box(0.2).convolve_unit_box(0.1)
        lo, hi = p.support
        assert p(lo - 1e-9) == 0.0
        assert p(hi + 1e-9) == 0.0
        assert lo == pytest.approx(-0.65) and hi == pytest.approx(0.65)


class TestCalculus:
    def test_antiderivative_of_constant(self):
        p = PiecewisePoly(np.array([0.0, 2.0]), np.array([[3.0]]))
        anti = p.antiderivative()
        assert anti(2.0) == pytest.approx(6.0)
        assert anti(1.0) == pytest.approx(3.0)

    def test_max_abs_quadratic(self):
        # p(t) = t (2 - t) on [0, 2]: maximum 1 at t = 1
        p = PiecewisePoly(np.array([0.0, 2.0]), np.array([[0.0, 2.0, -1.0]]))
        assert p.max_abs() == pytest.approx(1.0)

    def test_max_abs_considers_endpoints(self):
        p = PiecewisePoly(np.array([0.0, 1.0]), np.array([[0.5, 1.0]]))
        assert p.max_abs() == pytest.approx(1.5)

    def test_continuity_at_knots(self):
        p = indicator(1.0)
        for w in (0.5, 0.25, 0.125):
            p = p.convolve_unit_box(w)
        for knot in p.knots[1:-1]:
            left = p(knot - 1e-12)
            right = p(knot + 1e-12)
            assert left == pytest.approx(right, abs=1e-9)

    def test_degree_grows_by_one_per_box(self):
        p = indicator(1.0)
        assert p.degree == 0
        p = p.convolve_unit_box(0.5)
        assert p.degree == 1
        p = p.convolve_unit_box(0.25)
        assert p.degree == 2
