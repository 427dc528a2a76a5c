import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import erfinv

from compandor.compressor import (
    LinearSplineCompressor,
    OptimalCompressor,
    QuadraticSplineCompressor,
    SegmentGrid,
    fit_linear_spline,
    fit_quadratic_spline,
    model_from_dict,
    quadratic_residuals,
    solve_quadratic_system,
)
from compandor.errors import DomainError, FitError
from compandor.special_math import adaptive_quadrature

from published import LEVELS, TABLE1, TABLE2


def models_for(grid):
    return [
        OptimalCompressor(grid.x_max, grid.sigma),
        fit_linear_spline(grid),
        fit_quadratic_spline(grid),
    ]


class TestSegmentGrid:
    def test_rejects_bad_grids(self):
        with pytest.raises(FitError):
            SegmentGrid((0.0, 1.0, 1.0), (0.0, 0.5, 1.0))
        with pytest.raises(FitError):
            SegmentGrid((0.0, 1.0, 2.0), (0.0, 1.5, 1.0))
        with pytest.raises(FitError):
            SegmentGrid((0.1, 1.0, 2.0), (0.0, 1.5, 2.0))
        with pytest.raises(FitError):
            SegmentGrid((0.0, 1.0, 2.0), (0.0, 1.5, 2.5))

    def test_properties(self, grids):
        g = grids[128]
        assert g.segments == 2
        assert g.x_max == g.knots[-1] == g.values[-1]


class TestOptimal:
    def test_examples(self, grids):
        c = OptimalCompressor(grids[128].x_max)
        assert c.evaluate(0.0) == 0.0
        assert c.evaluate(c.x_max) == c.x_max
        assert c.x_max == pytest.approx(4.0274, abs=5e-4)
        assert c.evaluate(grids[128].knots[1]) == pytest.approx(3.1029, abs=5e-4)

    def test_clamps_beyond_support(self):
        c = OptimalCompressor(3.0)
        assert c.evaluate(10.0) == 3.0
        assert c.evaluate(-10.0) == -3.0

    def test_derivative_even_and_integrates_to_x_max(self, grids):
        c = OptimalCompressor(grids[64].x_max)
        assert c.derivative(1.3) == c.derivative(-1.3)
        assert adaptive_quadrature(c.derivative, 0.0, c.x_max) == pytest.approx(c.x_max, abs=1e-12)

    @pytest.mark.parametrize("x", [0.0, 0.3, 1.0, 2.0, 3.5, 4.0])
    def test_derivative_vs_finite_difference(self, grids, x):
        c = OptimalCompressor(grids[128].x_max)
        h = 1e-5
        fd = (c.evaluate(x + h) - c.evaluate(x - h)) / (2 * h) if x > h else (c.evaluate(x + h) - c.evaluate(x)) / h
        rel = 1e-6 if x > h else 1e-5  # one-sided at the origin
        assert c.derivative(x) == pytest.approx(fd, rel=rel)

    def test_inverse_examples(self, grids):
        c = OptimalCompressor(grids[128].x_max)
        assert c.inverse(0.0) == 0.0
        assert c.inverse(c.x_max) == c.x_max
        assert c.inverse(3.1029) == pytest.approx(2.0137, abs=1e-3)
        with pytest.raises(DomainError):
            c.inverse(c.x_max * 1.01)

    @given(st.floats(-1, 1))
    def test_inverse_matches_erfinv(self, t):
        c = OptimalCompressor(3.5638, sigma=1.0)
        u = t * c.x_max
        # independent closed form of the inverse
        expected = math.sqrt(6) * erfinv(u * c.normalizer / c.x_max)
        assert c.inverse(u) == pytest.approx(expected, abs=1e-10)
        assert c.evaluate(c.inverse(u)) == pytest.approx(u, abs=1e-10)

    def test_non_finite(self):
        with pytest.raises(DomainError):
            OptimalCompressor(3.0).evaluate(math.nan)


class TestLinearSpline:
    @pytest.mark.parametrize("n", LEVELS)
    def test_slopes_match_table(self, grids, n):
        lin = fit_linear_spline(grids[n])
        assert lin.slopes == pytest.approx(TABLE1[n][4:], abs=5e-4)

    def test_fixes_knots(self, grids):
        for g in grids.values():
            lin = fit_linear_spline(g)
            assert lin.evaluate(np.array(g.knots)) == pytest.approx(g.values, abs=1e-12)

    def test_examples(self, grids):
        lin16 = fit_linear_spline(grids[16])
        assert lin16.evaluate(lin16.x_max) == pytest.approx(2.4746, abs=5e-4)
        lin128 = fit_linear_spline(grids[128])
        assert lin128.derivative(1.0) == pytest.approx(1.5409, abs=5e-4)
        # knot belongs to the left piece
        assert lin128.derivative(grids[128].knots[1]) == lin128.slopes[0]

    def test_rejects_nonpositive_slope(self, grids):
        with pytest.raises(FitError):
            LinearSplineCompressor(grids[16], (1.0, 0.0))

    def test_domain(self, grids):
        lin = fit_linear_spline(grids[16])
        with pytest.raises(DomainError):
            lin.evaluate(lin.x_max + 0.1)
        with pytest.raises(DomainError):
            lin.inverse(-lin.x_max - 0.1)


class TestQuadraticSpline:
    @pytest.mark.parametrize("n", LEVELS)
    def test_magnitudes_match_table(self, grids, n):
        pieces = fit_quadratic_spline(grids[n]).pieces
        coeffs = [c for p in pieces for c in p]
        assert [abs(c) for c in coeffs] == pytest.approx(TABLE2[n][2:], abs=5e-4)

    def test_signs(self, grids):
        signs = lambda n: [np.sign(c) for p in fit_quadratic_spline(grids[n]).pieces for c in p]
        assert signs(16) == [0, 1, 1, -1, 1, -1]
        assert signs(128) == [0, 1, -1, 1, 1, -1]

    @pytest.mark.parametrize("n", LEVELS)
    def test_cascade_matches_linear_solve(self, grids, n):
        model = fit_quadratic_spline(grids[n])
        cascade = np.array([c for p in model.pieces for c in p])
        assert np.max(np.abs(cascade - solve_quadratic_system(grids[n]))) <= 1e-10
        assert np.max(np.abs(quadratic_residuals(model))) <= 1e-12

    def test_examples(self, grids):
        q128 = fit_quadratic_spline(grids[128])
        assert q128.evaluate(0.0) == 0.0
        assert q128.evaluate(2.0137) == pytest.approx(3.1029, abs=1e-3)
        assert q128.derivative(q128.x_max) == pytest.approx(0.0, abs=1e-10)
        assert q128.inverse(3.1029) == pytest.approx(2.0137, abs=1e-3)
        q16 = fit_quadratic_spline(grids[16])
        x1 = grids[16].knots[1]
        (_, b1, d1), (_, b2, d2) = q16.pieces
        assert b1 + 2 * d1 * x1 == pytest.approx(b2 + 2 * d2 * x1, abs=1e-10)

    def test_needs_two_segments(self):
        g = SegmentGrid((0.0, 1.0, 2.0, 3.0), (0.0, 1.5, 2.5, 3.0))
        with pytest.raises(FitError):
            fit_quadratic_spline(g)

    def test_rejects_non_monotone(self, grids):
        g = grids[16]
        with pytest.raises(FitError):
            QuadraticSplineCompressor(g, ((0.0, -1.0, 1.0), (0.0, 1.0, 0.0)))

    def test_degenerate_curvature_inverts_linearly(self):
        g = SegmentGrid((0.0, 1.0, 2.0), (0.0, 1.0, 2.0))
        q = QuadraticSplineCompressor(g, ((0.0, 1.0, 0.0), (0.0, 1.0, 0.0)))
        assert q.inverse(1.5) == pytest.approx(1.5, abs=1e-15)


class TestAllModels:
    @pytest.mark.parametrize("n", LEVELS)
    def test_round_trip(self, grids, n):
        x = np.linspace(0, grids[n].x_max, 1000)
        for m in models_for(grids[n]):
            u = m.evaluate(x)
            back = np.array([m.inverse(v) for v in u])
            assert np.max(np.abs(back - x)) <= 1e-9, m.kind

    @pytest.mark.parametrize("n", LEVELS)
    def test_monotone(self, grids, n):
        x = np.linspace(0, grids[n].x_max, 10_001)[:-1]
        for m in models_for(grids[n]):
            assert np.all(m.derivative(x) > 0), m.kind
            assert np.all(np.diff(m.evaluate(x)) > 0), m.kind

    @given(st.floats(0, 1))
    def test_odd(self, t):
        g = SegmentGrid((0.0, 1.5, 3.0), (0.0, 2.0, 3.0))
        for m in models_for(g):
            x = t * m.x_max
            assert m.evaluate(-x) == -m.evaluate(x)
            assert m.inverse(-m.evaluate(x)) == -m.inverse(m.evaluate(x))

    @pytest.mark.parametrize("n", LEVELS)
    def test_continuity_at_knots(self, grids, n):
        g = grids[n]
        x1 = g.knots[1]
        lin, quad = fit_linear_spline(g), fit_quadratic_spline(g)
        for m in (lin, quad):
            left = m._evaluate_positive(np.array(x1))
            right = m._evaluate_positive(np.array(np.nextafter(x1, np.inf)))
            assert abs(left - right) <= 1e-12
            assert abs(m.evaluate(0.0)) == 0.0
            assert m.evaluate(m.x_max) == pytest.approx(m.x_max, abs=1e-12)

    def test_quadratic_beats_linear_in_sup_norm(self, grids):
        g = grids[128]
        opt, lin, quad = models_for(g)
        x = np.linspace(0, g.x_max, 10_000)
        c = opt.evaluate(x)
        assert np.max(np.abs(quad.evaluate(x) - c)) < np.max(np.abs(lin.evaluate(x) - c))

    def test_json_round_trip(self, grids):
        for m in models_for(grids[32]):
            data = json.loads(json.dumps(m.to_dict()))
            assert {"kind", "sigma", "x_max"} <= data.keys()
            clone = model_from_dict(data)
            x = np.linspace(-m.x_max, m.x_max, 101)
            assert np.array_equal(clone.evaluate(x), m.evaluate(x))
