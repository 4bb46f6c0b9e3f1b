import math
import warnings
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causecommit import stats, synthetic
from causecommit.stats import (
    EntityDesignRow,
    RankDeficientError,
    log1p_counts,
    ols,
    ols_fit,
    regularized_incomplete_beta,
    student_t_two_sided_p,
)


def t_tail_oracle(t, df):
    """Two-sided tail by quadrature of the Student-t density at 50 digits."""
    with mpmath.workdps(50):
        nu = mpmath.mpf(df)
        c = mpmath.gamma((nu + 1) / 2) / (mpmath.sqrt(nu * mpmath.pi) * mpmath.gamma(nu / 2))
        dens = lambda x: c * (1 + x * x / nu) ** (-(nu + 1) / 2)
        return float(2 * mpmath.quad(dens, [abs(t), mpmath.inf]))


HAND_X = [1, 2, 3, 4, 5, 6]
HAND_Y = [2, 3, 5, 4, 6, 8]


def hand_fit():
    """Simple regression from the 2x2 normal equations in exact arithmetic."""
    n = len(HAND_X)
    sx, sy = sum(HAND_X), sum(HAND_Y)
    sxx = sum(x * x for x in HAND_X)
    sxy = sum(x * y for x, y in zip(HAND_X, HAND_Y))
    det = Fraction(n * sxx - sx * sx)
    b1 = (n * sxy - sx * sy) / det
    b0 = (sxx * sy - sx * sxy) / det
    ssr = sum((y - b0 - b1 * x) ** 2 for x, y in zip(HAND_X, HAND_Y))
    s2 = ssr / (n - 2)
    # inverse Gram diagonal: sxx/det and n/det
    se0 = math.sqrt(s2 * sxx / det)
    se1 = math.sqrt(s2 * n / det)
    return float(b0), float(b1), se0, se1


class TestTDistribution:
    def test_reference_point(self):
        p = student_t_two_sided_p(2.0, 10)
        assert p == pytest.approx(0.0734, abs=5e-4)
        assert p == pytest.approx(t_tail_oracle(2.0, 10), abs=1e-10)

    @pytest.mark.parametrize("t, df", [(0.5, 1), (1.3, 3), (2.7, 4), (4.0, 7), (10.0, 30), (0.01, 100), (25.0, 2)])
    def test_against_quadrature(self, t, df):
        assert student_t_two_sided_p(t, df) == pytest.approx(t_tail_oracle(t, df), abs=1e-10)

    def test_zero(self):
        assert student_t_two_sided_p(0.0, 5) == 1.0

    @given(st.floats(-50, 50), st.integers(1, 200))
    def test_symmetry(self, t, df):
        assert student_t_two_sided_p(t, df) == student_t_two_sided_p(-t, df)

    @given(st.floats(0, 30), st.floats(0, 30), st.integers(1, 60))
    def test_monotone(self, a, b, df):
        a, b = sorted((a, b))
        assert student_t_two_sided_p(b, df) <= student_t_two_sided_p(a, df) + 1e-15

    def test_bad_df(self):
        with pytest.raises(ValueError):
            student_t_two_sided_p(1.0, 0.5)

    @pytest.mark.parametrize("a, b, x", [(0.5, 0.5, 0.3), (2, 3, 0.4), (5, 0.5, 0.9), (10, 10, 0.5)])
    def test_incomplete_beta(self, a, b, x):
        assert regularized_incomplete_beta(a, b, x) == pytest.approx(float(mpmath.betainc(a, b, 0, x, regularized=True)), abs=1e-12)


class TestLog1p:
    def test_values(self):
        assert log1p_counts(0) == 0.0
        assert log1p_counts(1) == pytest.approx(0.693147, abs=1e-6)

    def test_monotone(self):
        vals = [log1p_counts(c) for c in range(50)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("bad", [-1, 1.5, True])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            log1p_counts(bad)


class TestOLS:
    def test_hand_dataset(self):
        b0, b1, se0, se1 = hand_fit()
        res = ols(HAND_Y, np.array(HAND_X, dtype=float))
        np.testing.assert_allclose(res.coefficients, [b0, b1], atol=1e-8)
        np.testing.assert_allclose(res.standard_errors, [se0, se1], rtol=1e-8)
        for j, (b, se) in enumerate(((b0, se0), (b1, se1))):
            assert res.t_statistics[j] == pytest.approx(b / se, rel=1e-8)
            assert res.p_values[j] == pytest.approx(t_tail_oracle(b / se, 4), abs=5e-4)
        assert res.df_resid == 4

    def test_noiseless(self):
        x = np.arange(10.0)
        res = ols(2 + 3 * x, x)
        np.testing.assert_allclose(res.coefficients, [2, 3], atol=1e-10)
        assert res.r_squared == pytest.approx(1.0, abs=1e-10)
        assert np.abs(res.residuals).max() < 1e-10

    def test_rank_deficient(self):
        x = np.arange(8.0)
        with pytest.raises(RankDeficientError) as err:
            ols(x, np.column_stack([x, 2 * x]), ["a", "b"])
        assert err.value.columns == ["b"]

    def test_too_few(self):
        with pytest.raises(ValueError):
            ols([1, 2, 3], np.array([[1, 0], [0, 1], [1, 1.0]]))

    def test_condition_warning(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=50)
        X = np.column_stack([x, x + 1e-9 * rng.normal(size=50)])
        with pytest.warns(RuntimeWarning, match="ill-conditioned"):
            ols(rng.normal(size=50), X)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000), st.floats(-100, 100), st.floats(0.01, 100))
    def test_invariants(self, seed, shift, alpha):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(30, 3))
        y = X @ [1.0, -2.0, 0.5] + rng.normal(size=30)
        base = ols(y, X)
        Xd = np.column_stack([np.ones(30), X])
        assert np.abs(Xd.T @ base.residuals).max() < 1e-8 * 30
        shifted = ols(y + shift, X)
        assert shifted.coefficients[0] == pytest.approx(base.coefficients[0] + shift, abs=1e-9)
        np.testing.assert_allclose(shifted.coefficients[1:], base.coefficients[1:], atol=1e-10)
        X2 = X.copy()
        X2[:, 1] *= alpha
        scaled = ols(y, X2)
        assert scaled.coefficients[2] == pytest.approx(base.coefficients[2] / alpha, rel=1e-8)
        assert scaled.t_statistics[2] == pytest.approx(base.t_statistics[2], rel=1e-8)
        assert scaled.p_values[2] == pytest.approx(base.p_values[2], abs=1e-8)

    def test_coverage(self):
        beta = np.array([5.0, -1.0, 0.5, 1.5])
        hits = 0
        total = 0
        for seed in range(50):
            rows = synthetic.regression_rows(200, tuple(beta), sigma=0.5, seed=seed)
            res = ols_fit(rows)
            hits += int(np.sum(np.abs(res.coefficients - beta) <= 3 * res.standard_errors))
            total += 4
        assert hits / total >= 0.99


class TestEntityRows:
    def test_from_counts(self):
        r = EntityDesignRow.from_counts("a", 0, 1, 3, 7.0)
        assert (r.x1, r.x2, r.y) == (0.0, math.log(2), 7.0)

    def test_minimum_rows(self):
        rows = [EntityDesignRow.from_counts(f"e{i}", i, i, i, i) for i in range(4)]
        with pytest.raises(ValueError):
            ols_fit(rows)

    def test_csv_writers(self):
        import io
        rows = synthetic.regression_rows(20, seed=1)
        res = ols_fit(rows)
        buf = io.StringIO()
        stats.write_regression_csv(res, buf)
        assert buf.getvalue().splitlines()[0] == "predictor,coef,std_err,t,p_value"
        buf = io.StringIO()
        stats.write_scatter_csv(rows, "high_commit", buf)
        assert len(buf.getvalue().splitlines()) == 21
