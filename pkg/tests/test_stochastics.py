"""Keyed streams, chi-square generation, and the empirical quantile rule."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from slopesize.stochastics import (
    SimPlan,
    StreamKey,
    chisq_array,
    empirical_quantile,
    generator,
    normal_array,
    normal_matrix,
    sample_chisq,
    sample_normal,
)

SEED = 20260808


class TestStreamKey:
    def test_determinism(self):
        key = StreamKey(SEED, 42, 3)
        assert np.array_equal(normal_array(key, 16), normal_array(key, 16))

    def test_distinct_keys_differ(self):
        base = normal_array(StreamKey(SEED, 1, 0), 8)
        for other in (StreamKey(SEED, 2, 0), StreamKey(SEED, 1, 1), StreamKey(SEED + 1, 1, 0)):
            assert not np.array_equal(base, normal_array(other, 8))

    def test_prefix_property(self):
        # sequential draws: the first k of n draws equal a k-draw run
        key = StreamKey(SEED, 7, 100)
        assert np.array_equal(normal_array(key, 64)[:16], normal_array(key, 16))

    def test_batch_matches_per_key_draws(self):
        rows = normal_matrix(SEED, [5, 11, 23], 101, 12)
        for row, task in zip(rows, (5, 11, 23)):
            assert np.array_equal(row, normal_array(StreamKey(SEED, task, 101), 12))

    def test_field_ranges(self):
        with pytest.raises(ValueError):
            StreamKey(-1, 0, 0)
        with pytest.raises(ValueError):
            StreamKey(0, 2**64, 0)
        with pytest.raises(ValueError):
            StreamKey(0, 0, 2**32)

    def test_schedule_invariance(self):
        # assembling replicates in any order gives identical results
        tasks = list(range(20))
        forward = [float(normal_array(StreamKey(SEED, t, 0), 1)[0]) for t in tasks]
        backward = [float(normal_array(StreamKey(SEED, t, 0), 1)[0]) for t in reversed(tasks)]
        assert forward == backward[::-1]


class TestSimPlan:
    def test_defaults(self):
        plan = SimPlan(master_seed=1)
        assert plan.reps_inner == 10_000
        assert plan.reps_outer == 1_000

    @pytest.mark.parametrize("kwargs", [{"reps_inner": 99}, {"reps_outer": 0}, {"master_seed": -1}])
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            SimPlan(**{"master_seed": 0, **kwargs})


class TestSampleNormal:
    def test_degenerate_sd(self):
        assert sample_normal(StreamKey(SEED, 0, 0), 3.5, 0.0) == 3.5

    def test_rejects_negative_sd(self):
        with pytest.raises(ValueError):
            sample_normal(StreamKey(SEED, 0, 0), 0.0, -1.0)

    def test_mean_and_variance_clt_bounds(self):
        draws = normal_array(StreamKey(SEED, 3, 0), 10**6)
        assert abs(draws.mean()) < 4 / math.sqrt(10**6)
        assert abs(draws.var() - 1.0) < 0.01


class TestSampleChisq:
    def test_positive_and_deterministic(self):
        key = StreamKey(SEED, 9, 2)
        value = sample_chisq(key, 1)
        assert value > 0.0
        assert value == sample_chisq(key, 1)

    def test_rejects_bad_df(self):
        with pytest.raises(ValueError):
            sample_chisq(StreamKey(SEED, 0, 0), 0)

    def test_mean_df5(self):
        # mean=df, var=2*df: 4-sigma band for 1e6 draws
        draws = chisq_array(StreamKey(SEED, 11, 0), 5, 10**6)
        assert abs(draws.mean() - 5.0) < 4 * math.sqrt(10.0 / 10**6)

    def test_df1_is_squared_normal(self):
        # P(chi2_1 <= 1) = P(|Z| <= 1) = 0.682689
        draws = chisq_array(StreamKey(SEED, 19, 0), 1, 10**6)
        frac = float(np.mean(draws <= 1.0))
        se = math.sqrt(0.6827 * 0.3173 / 10**6)
        assert abs(frac - 0.6826895) < 3 * se

    def test_df2_is_exponential(self):
        # chi2_2 = -2 ln U exactly
        draws = chisq_array(StreamKey(SEED, 13, 0), 2, 10**5)
        res = stats.kstest(draws, stats.chi2(2).cdf)
        assert res.pvalue > 0.01

    def test_additivity_in_distribution(self):
        a = chisq_array(StreamKey(SEED, 14, 0), 3, 10**5)
        b = chisq_array(StreamKey(SEED, 15, 1), 4, 10**5)
        c = chisq_array(StreamKey(SEED, 16, 2), 7, 10**5)
        res = stats.ks_2samp(a + b, c)
        assert res.pvalue > 0.01

    def test_fractional_shape_boost_path(self):
        # df=1 exercises the shape < 1 boost; check the full CDF
        draws = chisq_array(StreamKey(SEED, 17, 0), 1, 10**5)
        res = stats.kstest(draws, stats.chi2(1).cdf)
        assert res.pvalue > 0.01


class TestEmpiricalQuantile:
    def test_median_odd(self):
        assert empirical_quantile([1, 2, 3, 4, 5], 0.5) == 3.0

    def test_median_even_interpolates(self):
        assert empirical_quantile([1, 2, 3, 4], 0.5) == 2.5

    def test_hand_interpolation(self):
        # m=2, h = 0.75: 10 + 0.75 * (20 - 10)
        assert empirical_quantile([10, 20], 0.75) == 17.5

    def test_unsorted_input(self):
        assert empirical_quantile([5, 1, 4, 2, 3], 0.5) == 3.0

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            empirical_quantile([], 0.5)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1])
    def test_rejects_bad_p(self, p):
        with pytest.raises(ValueError):
            empirical_quantile([1.0, 2.0], p)

    @given(
        st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40),
        st.floats(0.001, 0.999),
        st.floats(0.001, 0.999),
    )
    @settings(max_examples=100)
    def test_monotone_in_p_and_bounded(self, samples, p1, p2):
        lo, hi = sorted((p1, p2))
        q_lo = empirical_quantile(samples, lo)
        q_hi = empirical_quantile(samples, hi)
        assert q_lo <= q_hi
        assert min(samples) <= q_lo and q_hi <= max(samples)


class TestGeneratorContract:
    def test_generator_returns_fresh_state(self):
        key = StreamKey(SEED, 21, 5)
        g1 = generator(key)
        g1.standard_normal(10)
        g2 = generator(key)
        assert np.array_equal(g2.standard_normal(3), normal_array(key, 3))
