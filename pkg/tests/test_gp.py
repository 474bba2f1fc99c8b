import math

import numpy as np
import pytest
from scipy.stats import multivariate_normal

from jesbo import gp


def params_1d(ls=1.0, scale=1.0, noise=0.0):
    return gp.KernelParams(length_scales=[ls], output_scale=scale, noise_variance=noise)


def random_instance(rng, n, d, noise=0.05):
    params = gp.KernelParams(
        length_scales=rng.uniform(0.2, 1.5, d), output_scale=rng.uniform(0.5, 5.0),
        noise_variance=noise,
    )
    x = rng.random((n, d))
    y = rng.normal(0, math.sqrt(params.output_scale), n)
    data = [gp.Observation(xi, yi) for xi, yi in zip(x, y)]
    return params, data


class TestKernelEval:
    def test_diagonal_is_output_scale(self):
        assert gp.kernel_eval(params_1d(), [0.0], [0.0]) == 1.0
        p = gp.KernelParams([0.1, 0.1], 10.0, 0.0)
        assert gp.kernel_eval(p, [0.3, 0.7], [0.3, 0.7]) == 10.0

    def test_unit_distance(self):
        assert gp.kernel_eval(params_1d(), [0.0], [1.0]) == pytest.approx(math.exp(-0.5), abs=1e-12)

    def test_symmetric(self):
        p = gp.KernelParams([0.4, 1.3, 0.9], 2.0, 0.0)
        rng = np.random.default_rng(0)
        a, b = rng.random(3), rng.random(3)
        assert gp.kernel_eval(p, a, b) == gp.kernel_eval(p, b, a)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            gp.kernel_eval(params_1d(), [0.0, 1.0], [0.0, 1.0])


class TestFitPredict:
    def test_empty_data_is_prior(self):
        post = gp.fit_posterior([], params_1d(scale=2.5, noise=0.3))
        mean, var_f, var_y = post.predict([0.7])
        assert mean == 0.0
        assert var_f == 2.5
        assert var_y == pytest.approx(2.8)

    def test_noiseless_interpolation_single(self):
        post = gp.fit_posterior([gp.Observation([0.4], 3.0)], params_1d())
        mean, var_f, _ = post.predict([0.4])
        assert mean == pytest.approx(3.0, abs=1e-8)
        assert var_f == pytest.approx(0.0, abs=1e-8)

    def test_unit_noise_case(self):
        post = gp.fit_posterior(
            [gp.Observation([0.0], 1.0)], params_1d(noise=1.0)
        )
        mean, var_f, var_y = post.predict([0.0])
        # the 1e-10 diagonal jitter shifts the exact 0.5 by ~2.5e-11
        assert mean == pytest.approx(0.5, abs=1e-9)
        assert var_f == pytest.approx(0.5, abs=1e-9)
        assert var_y == pytest.approx(1.5, abs=1e-9)

    def test_training_reproduction(self):
        rng = np.random.default_rng(1)
        data = [gp.Observation(rng.random(2), rng.normal(), 0.0) for _ in range(10)]
        post = gp.fit_posterior(data, gp.KernelParams([0.25, 0.25], 1.0, 0.0))
        for obs in data:
            mean, _, _ = post.predict(obs.x)
            assert mean == pytest.approx(obs.y, abs=1e-8)

    def test_noiseless_interpolation_with_jitter_noise(self):
        rng = np.random.default_rng(2)
        params = gp.KernelParams([0.4, 0.4, 0.4], 2.0, 0.1)
        data = [gp.Observation(rng.random(3), rng.normal(), params.jitter) for _ in range(10)]
        post = gp.fit_posterior(data, params)
        for obs in data:
            mean, _, _ = post.predict(obs.x)
            assert abs(mean - obs.y) < 1e-6

    def test_cholesky_reconstruction(self):
        rng = np.random.default_rng(3)
        params, data = random_instance(rng, 30, 3)
        post = gp.fit_posterior(data, params)
        k = np.array([[gp.kernel_eval(params, a.x, b.x) for b in data] for a in data])
        target = k + np.diag(post.noise_diag)
        recon = post.chol_factor @ post.chol_factor.T
        rel = np.linalg.norm(recon - target) / np.linalg.norm(target)
        assert rel < 1e-10

    def test_far_point_recovers_prior_variance(self):
        post = gp.fit_posterior([gp.Observation([0.0], 1.0)], params_1d(scale=3.0, noise=0.1))
        _, var_f, _ = post.predict([50.0])
        assert var_f == pytest.approx(3.0, abs=1e-6)

    def test_var_y_adds_model_noise(self):
        rng = np.random.default_rng(4)
        params, data = random_instance(rng, 8, 2, noise=0.2)
        post = gp.fit_posterior(data, params)
        _, var_f, var_y = post.predict(rng.random(2))
        assert var_y == pytest.approx(var_f + 0.2, abs=1e-14)

    def test_variance_bounded_by_prior(self):
        rng = np.random.default_rng(5)
        params, data = random_instance(rng, 25, 2)
        post = gp.fit_posterior(data, params)
        _, var_f = post.predict_batch(rng.random((200, 2)))
        assert np.all(var_f >= 0.0)
        assert np.all(var_f <= params.output_scale)

    def test_clamp_counter(self):
        gp.reset_clamp_events()
        assert gp.clamp_event_count() == 0
        rng = np.random.default_rng(6)
        params, data = random_instance(rng, 10, 2)
        post = gp.fit_posterior(data, params)
        post.predict_batch(rng.random((50, 2)))
        assert gp.clamp_event_count() >= 0  # counts, never raises


class TestRankOneExtend:
    def test_base_case_empty(self):
        params = params_1d(noise=0.1)
        via_extend = gp.rank_one_extend(gp.fit_posterior([], params), gp.Observation([0.2], 1.5))
        via_fit = gp.fit_posterior([gp.Observation([0.2], 1.5)], params)
        x = np.linspace(0, 1, 20)[:, None]
        np.testing.assert_allclose(
            via_extend.predict_batch(x)[0], via_fit.predict_batch(x)[0], atol=1e-12
        )

    def test_matches_full_refit(self):
        rng = np.random.default_rng(7)
        params, data = random_instance(rng, 10, 2)
        post = gp.fit_posterior(data, params)
        new = gp.Observation(rng.random(2), rng.normal(), 0.05)
        extended = gp.rank_one_extend(post, new)
        refit = gp.fit_posterior(list(data) + [new], params)
        xt = rng.random((100, 2))
        m1, v1 = extended.predict_batch(xt)
        m2, v2 = refit.predict_batch(xt)
        assert np.max(np.abs(m1 - m2)) < 1e-8
        assert np.max(np.abs(v1 - v2)) < 1e-8

    def test_randomized_refit_equivalence(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            n = int(rng.integers(1, 50))
            d = int(rng.integers(1, 7))
            params, data = random_instance(rng, n, d)
            post = gp.fit_posterior(data, params)
            new = gp.Observation(rng.random(d), rng.normal())
            extended = gp.rank_one_extend(post, new)
            refit = gp.fit_posterior(list(data) + [new], params)
            xt = rng.random((100, d))
            np.testing.assert_allclose(extended.predict_batch(xt)[0], refit.predict_batch(xt)[0], atol=1e-8)
            np.testing.assert_allclose(extended.predict_batch(xt)[1], refit.predict_batch(xt)[1], atol=1e-8)

    def test_noiseless_pin(self):
        rng = np.random.default_rng(9)
        params, data = random_instance(rng, 12, 2)
        post = gp.fit_posterior(data, params)
        x_star = rng.random(2)
        extended = gp.rank_one_extend(post, gp.Observation(x_star, 4.0, params.jitter))
        _, var_f, _ = extended.predict(x_star)
        assert var_f <= params.jitter * (1 + 1e-6)

    def test_variance_never_increases(self):
        rng = np.random.default_rng(10)
        params, data = random_instance(rng, 15, 3)
        post = gp.fit_posterior(data, params)
        extended = gp.rank_one_extend(post, gp.Observation(rng.random(3), 0.3))
        xt = rng.random((100, 3))
        _, v_before = post.predict_batch(xt)
        _, v_after = extended.predict_batch(xt)
        assert np.all(v_after <= v_before + 1e-10)

    def test_dimension_mismatch(self):
        post = gp.fit_posterior([], params_1d())
        with pytest.raises(ValueError):
            gp.rank_one_extend(post, gp.Observation([0.0, 1.0], 0.0))


class TestLogMarginalLikelihood:
    def test_empty(self):
        assert gp.log_marginal_likelihood([], params_1d()) == 0.0

    def test_single_observation(self):
        v = 1.0 + 0.4  # prior variance plus noise
        got = gp.log_marginal_likelihood([gp.Observation([0.3], 0.0)], params_1d(noise=0.4))
        assert got == pytest.approx(-0.5 * math.log(2 * math.pi * v), abs=1e-9)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(11)
        params, data = random_instance(rng, 12, 2)
        a = gp.log_marginal_likelihood(data, params)
        b = gp.log_marginal_likelihood(list(reversed(data)), params)
        assert abs(a - b) < 1e-10

    def test_against_multivariate_normal(self):
        rng = np.random.default_rng(12)
        params, data = random_instance(rng, 9, 2, noise=0.3)
        k = np.array([[gp.kernel_eval(params, a.x, b.x) for b in data] for a in data])
        cov = k + 0.3 * np.eye(9)
        y = np.array([obs.y for obs in data])
        expected = multivariate_normal.logpdf(y, mean=np.zeros(9), cov=cov)
        assert gp.log_marginal_likelihood(data, params) == pytest.approx(expected, abs=1e-6)


class TestFitHyperparameters:
    def test_fixed_mode_verbatim(self):
        true = gp.KernelParams([0.2, 0.2, 0.2, 0.2], 10.0, 0.01)
        cfg = gp.HyperFitConfig(mode="fixed", fixed_params=true)
        got = gp.fit_hyperparameters([], np.array([[0.0, 1.0]] * 4), cfg, seed=0)
        assert got == [true]

    def test_map_recovery(self):
        rng = np.random.default_rng(13)
        true = gp.KernelParams([0.3, 0.6], 2.0, 0.01)
        x = rng.random((100, 2))
        post = gp.fit_posterior([], true)
        # draw a GP realization at the inputs and add noise
        k = np.array([[gp.kernel_eval(true, a, b) for b in x] for a in x])
        f = rng.multivariate_normal(np.zeros(100), k + 1e-10 * np.eye(100))
        data = [gp.Observation(xi, fi + rng.normal(0, 0.1)) for xi, fi in zip(x, f)]
        bounds = np.array([[0.0, 1.0], [0.0, 1.0]])
        cfg = gp.HyperFitConfig(mode="map", n_restarts=3, max_iter=300)
        got = gp.fit_hyperparameters(data, bounds, cfg, seed=1)[0]
        assert np.all(np.abs(np.log(got.length_scales) - np.log(true.length_scales)) < 0.5)

    def test_ensemble_first_set_is_map(self):
        rng = np.random.default_rng(14)
        params, data = random_instance(rng, 20, 2)
        bounds = np.array([[0.0, 1.0], [0.0, 1.0]])
        map_cfg = gp.HyperFitConfig(mode="map", n_restarts=2, max_iter=80)
        ens_cfg = gp.HyperFitConfig(mode="ensemble", n_sets=1, n_restarts=2, max_iter=80)
        a = gp.fit_hyperparameters(data, bounds, map_cfg, seed=3)
        b = gp.fit_hyperparameters(data, bounds, ens_cfg, seed=3)
        assert len(b) == 1
        np.testing.assert_array_equal(a[0].length_scales, b[0].length_scales)
        assert a[0].output_scale == b[0].output_scale

    def test_requires_two_observations(self):
        with pytest.raises(ValueError):
            gp.fit_hyperparameters(
                [gp.Observation([0.1], 0.0)], np.array([[0.0, 1.0]]), gp.HyperFitConfig(), seed=0
            )


def test_params_validation():
    with pytest.raises(ValueError):
        gp.KernelParams([0.0], 1.0, 0.0)
    with pytest.raises(ValueError):
        gp.KernelParams([1.0], -1.0, 0.0)
    with pytest.raises(ValueError):
        gp.KernelParams([1.0], 1.0, -0.1)
