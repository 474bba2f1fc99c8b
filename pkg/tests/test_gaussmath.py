import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from jesbo import gaussmath as gm


def trunc_moments_quadrature(mu, var, upper):
    """Independent oracle: adaptive quadrature of the truncated density."""
    sigma = math.sqrt(var)

    def pdf(f):
        return math.exp(-0.5 * ((f - mu) / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))

    mass, _ = quad(pdf, upper - 12 * sigma, upper, limit=200)
    m1, _ = quad(lambda f: f * pdf(f), upper - 12 * sigma, upper, limit=200)
    m2, _ = quad(lambda f: f * f * pdf(f), upper - 12 * sigma, upper, limit=200)
    mean = m1 / mass
    return mean, m2 / mass - mean**2, math.log(mass)


class TestStdNormal:
    def test_at_zero(self):
        pdf, cdf = gm.std_normal(0.0)
        assert pdf == pytest.approx(0.3989423, abs=1e-7)
        assert cdf == 0.5

    def test_tail_limit(self):
        pdf, cdf = gm.std_normal(40.0)
        assert pdf < 1e-300
        assert cdf == pytest.approx(1.0, abs=1e-15)

    @given(st.floats(-8, 8))
    @settings(max_examples=50, deadline=None)
    def test_cdf_symmetry(self, z):
        _, c1 = gm.std_normal(z)
        _, c2 = gm.std_normal(-z)
        assert c1 + c2 == pytest.approx(1.0, abs=1e-12)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            gm.std_normal(float("nan"))


class TestTruncatedMoments:
    def test_standard_half(self):
        tm = gm.truncated_moments(0.0, 1.0, 0.0)
        assert tm.mean == pytest.approx(-0.7978846, abs=1e-7)
        assert tm.variance == pytest.approx(0.3633802, abs=1e-7)
        assert tm.log_mass == pytest.approx(math.log(0.5), abs=1e-12)

    def test_shift_scale(self):
        tm = gm.truncated_moments(2.0, 4.0, 2.0)
        assert tm.mean == pytest.approx(0.4042308, abs=1e-6)
        assert tm.variance == pytest.approx(1.4535208, abs=1e-6)

    def test_no_truncation_limit(self):
        tm = gm.truncated_moments(1.5, 2.0, 1.5 + 10 * math.sqrt(2.0))
        assert tm.mean == pytest.approx(1.5, abs=1e-8)
        assert tm.variance == pytest.approx(2.0, abs=1e-8)

    def test_against_quadrature(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            mu = rng.normal(0, 3)
            var = rng.uniform(0.1, 9.0)
            beta = rng.uniform(-6, 6)
            upper = mu + beta * math.sqrt(var)
            tm = gm.truncated_moments(mu, var, upper)
            mean_q, var_q, logm_q = trunc_moments_quadrature(mu, var, upper)
            assert tm.variance == pytest.approx(var_q, rel=1e-6)
            assert tm.mean == pytest.approx(mean_q, rel=1e-6, abs=1e-9)
            assert tm.log_mass == pytest.approx(logm_q, rel=1e-6, abs=1e-9)

    def test_variance_monotone_in_upper(self):
        uppers = np.linspace(-8, 8, 100)
        variances = [gm.truncated_moments(0.0, 1.0, u).variance for u in uppers]
        assert np.all(np.diff(variances) >= -1e-12)

    @given(st.floats(-5, 5), st.floats(0.01, 20), st.floats(-40, 40))
    @settings(max_examples=100, deadline=None)
    def test_invariants(self, mu, var, beta):
        upper = mu + beta * math.sqrt(var)
        tm = gm.truncated_moments(mu, var, upper)
        assert tm.variance <= var * (1 + 1e-12)
        assert tm.mean <= upper
        assert tm.log_mass <= 0.0

    def test_deep_truncation_stable(self):
        # far beyond where the normal cdf underflows
        for beta in (-10.0, -40.0, -60.0, -100.0, -1000.0):
            tm = gm.truncated_moments(0.0, 1.0, beta)
            assert 0.0 < tm.variance < 1.0 / beta**2 * 1.01
            assert tm.mean <= beta

    def test_rejects_bad_variance(self):
        with pytest.raises(ValueError):
            gm.truncated_moments(0.0, 0.0, 1.0)


class TestGaussianEntropy:
    def test_unit(self):
        assert gm.gaussian_entropy(1.0) == pytest.approx(1.4189385, abs=1e-7)

    def test_log_scaling(self):
        assert gm.gaussian_entropy(math.e**2) == pytest.approx(1.4189385 + 1.0, abs=1e-7)

    def test_halving(self):
        drop = gm.gaussian_entropy(2.0) - gm.gaussian_entropy(1.0)
        assert drop == pytest.approx(0.5 * math.log(2), abs=1e-12)

    @given(st.floats(1e-6, 1e6), st.floats(1.01, 3.0))
    @settings(max_examples=50, deadline=None)
    def test_strictly_increasing(self, var, factor):
        assert gm.gaussian_entropy(var * factor) > gm.gaussian_entropy(var)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            gm.gaussian_entropy(0.0)


class TestEsnDensity:
    def test_matches_numerical_convolution(self):
        mu, var_f, var_noise, upper = 0.3, 1.7, 0.6, 0.9
        beta = (upper - mu) / math.sqrt(var_f)
        z = math.sqrt(var_f)

        def conv(y):
            def integrand(f):
                p_f = math.exp(-0.5 * ((f - mu) / z) ** 2) / (z * math.sqrt(2 * math.pi))
                p_e = math.exp(-0.5 * (y - f) ** 2 / var_noise) / math.sqrt(2 * math.pi * var_noise)
                return p_f * p_e

            val, _ = quad(integrand, upper - 12 * z, upper, limit=200)
            from scipy.special import ndtr

            return val / ndtr(beta)

        for y in (-2.0, -0.5, 0.0, 0.8, 1.4, 3.0):
            expected = math.log(conv(y))
            assert float(gm.esn_log_density(y, mu, var_f, var_noise, upper)) == pytest.approx(
                expected, abs=1e-9
            )

    def test_integrates_to_one(self):
        val, _ = quad(
            lambda y: math.exp(float(gm.esn_log_density(y, 0.0, 1.0, 0.5, 0.2))), -12, 6, limit=300
        )
        assert val == pytest.approx(1.0, abs=1e-8)


class TestMcTruncationEntropy:
    def test_no_truncation_no_noise(self):
        ent, se = gm.mc_truncation_entropy(0.0, 1.3, 0.0, 40.0, 50_000, seed=1)
        assert abs(ent - gm.gaussian_entropy(1.3)) < 3 * max(se, 1e-6)

    def test_pure_noise(self):
        ent, se = gm.mc_truncation_entropy(0.0, 1e-12, 0.7, 1.0, 50_000, seed=2)
        assert abs(ent - gm.gaussian_entropy(0.7)) < 3 * max(se, 1e-4) + 1e-4

    def test_moment_matching_is_upper_bound(self):
        # Gaussian max-entropy: the moment-matched entropy dominates the MC one
        ent, se = gm.mc_truncation_entropy(0.0, 1.0, 1.0, 0.0, 200_000, seed=3)
        mm = gm.gaussian_entropy(1.0 + gm.truncated_moments(0.0, 1.0, 0.0).variance)
        assert mm <= ent + 3 * se

    def test_deterministic(self):
        a = gm.mc_truncation_entropy(0.1, 1.0, 0.2, 0.5, 2000, seed=9)
        b = gm.mc_truncation_entropy(0.1, 1.0, 0.2, 0.5, 2000, seed=9)
        assert a == b

    def test_rejects_small_sample(self):
        with pytest.raises(ValueError):
            gm.mc_truncation_entropy(0, 1, 0, 0, 10, seed=0)

    def test_reduction_bound_on_grid(self):
        # moment-matched entropy reduction never exceeds the MC one
        h0 = gm.gaussian_entropy(1.0)
        for r in (1e-2, 0.5):
            for q in (1e-4, 0.5):
                from scipy.special import ndtri

                var_n, var_f = r, 1.0 - r
                upper = math.sqrt(var_f) * float(ndtri(q))
                mm_red = h0 - gm.gaussian_entropy(var_n + gm.truncated_moments(0.0, var_f, upper).variance)
                ent, se = gm.mc_truncation_entropy(0.0, var_f, var_n, upper, 20_000, seed=11)
                mc_red = h0 - ent
                assert mm_red <= mc_red + 3 * se
