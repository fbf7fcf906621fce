import math

import numpy as np
import pytest

from conftest import batch_se
from nhppbayes import (McmcConfig, ModelError, PointPattern, PriorSpec,
                       RngStream, estimate_intensity, estimate_intensity_multi,
                       posterior_lambda_bar, posterior_weight_mean, run_mcmc)
from nhppbayes.kernels import eval_kernel

TWO_PI = 2.0 * math.pi


class TestPosteriorWeightMean:
    def test_improper_non_shrinkage(self, uniform_prior):
        # |alpha| = 2*pi, gamma = 0, N = 10, s = 1
        assert posterior_weight_mean(uniform_prior, 10, 1.0) == \
            pytest.approx(10.0 + TWO_PI, abs=1e-12)

    def test_improper_shrinkage(self, circle):
        prior = PriorSpec.uniform_unit(circle, gamma=TWO_PI - 1.0)
        assert posterior_weight_mean(prior, 10, 1.0) == pytest.approx(11.0)

    def test_finite_beta(self, circle):
        prior = PriorSpec.uniform_unit(circle, beta=1.0, gamma=TWO_PI - 1.0)
        assert posterior_weight_mean(prior, 0, 1.0) == pytest.approx(0.5)

    def test_requires_positive_exposure(self, uniform_prior):
        with pytest.raises(ModelError):
            posterior_weight_mean(uniform_prior, 3, 0.0)


class TestRunMcmc:
    def test_determinism(self, circle, vm5, uniform_prior):
        pattern = PointPattern(circle, [0.3, 1.1, 1.2, 4.0])
        cfg = McmcConfig(burn_in=50, samples=40, thin=2)
        a = run_mcmc(pattern, uniform_prior, vm5, cfg, RngStream(5))
        b = run_mcmc(pattern, uniform_prior, vm5, cfg, RngStream(5))
        assert a.acceptance_rate == b.acceptance_rate
        for da, db in zip(a.draws, b.draws):
            np.testing.assert_array_equal(da.assignments, db.assignments)
            np.testing.assert_array_equal(da.locations, db.locations)
            np.testing.assert_array_equal(da.counts, db.counts)

    def test_requires_observations(self, circle, vm5, uniform_prior):
        with pytest.raises(ModelError):
            run_mcmc(PointPattern.empty(circle), uniform_prior, vm5,
                     McmcConfig(), RngStream(0))

    def test_counts_sum_to_n(self, circle, vm5, uniform_prior):
        pattern = PointPattern(circle, [0.3, 1.1, 1.2, 4.0, 4.1])
        cfg = McmcConfig(burn_in=100, samples=50, thin=2)
        res = run_mcmc(pattern, uniform_prior, vm5, cfg, RngStream(6))
        for d in res.draws:
            assert int(d.counts.sum()) == 5
            assert d.assignments.max() < d.n_clusters

    def test_single_point_posterior_location(self, circle, vm5, uniform_prior):
        # with one observation and a uniform base the cluster location has
        # stationary law proportional to the kernel centered at the point
        x1 = 1.3
        pattern = PointPattern(circle, [x1])
        cfg = McmcConfig(burn_in=500, samples=4000, thin=5)
        res = run_mcmc(pattern, uniform_prior, vm5, cfg, RngStream(11))
        locs = np.array([d.locations[0] for d in res.draws])
        z = np.exp(1j * locs)
        cos_trace = np.cos(locs - x1)
        from scipy.special import i0, i1
        target = float(i1(5.0) / i0(5.0))
        se = batch_se(cos_trace)
        assert abs(cos_trace.mean() - target) < 3 * se
        # mean direction centered at the observation
        mean_dir = math.atan2(np.sin(locs - x1).mean(), cos_trace.mean())
        assert abs(mean_dir) < 3 * batch_se(np.sin(locs - x1))

    def test_identical_points_prefer_one_cluster(self, circle, uniform_prior):
        from nhppbayes import KernelSpec
        sharp = KernelSpec.von_mises(50.0, circle)
        pattern = PointPattern(circle, [2.0] * 6)
        cfg = McmcConfig(burn_in=300, samples=1000, thin=2)
        res = run_mcmc(pattern, uniform_prior, sharp, cfg, RngStream(12))
        from collections import Counter
        occupancy = Counter(d.n_clusters for d in res.draws)
        # ranking assertion: the single-cluster state is the modal partition
        assert occupancy[1] == max(occupancy.values())

    def test_two_point_coclustering_matches_quadrature(self, circle, vm5,
                                                       uniform_prior):
        x = [1.0, 1.8]
        pattern = PointPattern(circle, x)
        theta = uniform_prior.total_mass_alpha
        nodes, wts = circle.quad_nodes(4096)
        k1 = eval_kernel(vm5, x[0], nodes)
        k2 = eval_kernel(vm5, x[1], nodes)
        overlap = float(np.dot(wts, k1 * k2)) / TWO_PI
        p_together = overlap / (overlap + theta / TWO_PI ** 2)
        cfg = McmcConfig(burn_in=1000, samples=12000, thin=2)
        res = run_mcmc(pattern, uniform_prior, vm5, cfg, RngStream(13))
        indicator = np.array(
            [1.0 if d.assignments[0] == d.assignments[1] else 0.0
             for d in res.draws])
        se = batch_se(indicator)
        assert abs(indicator.mean() - p_together) < 3 * se


class TestPosteriorLambdaBar:
    def test_prior_predictive_is_uniform(self, circle, vm5, uniform_prior):
        density = posterior_lambda_bar([], uniform_prior, vm5)
        np.testing.assert_allclose(density.values, 1.0 / TWO_PI, rtol=1e-12)

    def test_integrates_to_one(self, circle, vm5, uniform_prior):
        pattern = PointPattern(circle, [0.3, 1.1, 4.0])
        cfg = McmcConfig(burn_in=200, samples=200, thin=2)
        res = run_mcmc(pattern, uniform_prior, vm5, cfg, RngStream(21))
        density = posterior_lambda_bar(res.draws, uniform_prior, vm5)
        assert density.integral() == pytest.approx(1.0, abs=1e-3)

    def test_single_point_matches_quadrature_oracle(self, circle, vm5,
                                                    uniform_prior):
        # closed form for one observation: the posterior expectation of the
        # kernel is integral k(y,u) k(x,u) du (uniform unit base), so
        # lambda_bar(y) = (1 + that integral) / (|alpha| + 1).  The standard
        # error comes from independent chains, which stays honest at nodes
        # far from the observation where within-chain traces are heavy-tailed.
        x1 = 2.2
        pattern = PointPattern(circle, [x1])
        theta = uniform_prior.total_mass_alpha
        grid = circle.grid(256)
        nodes, wts = circle.quad_nodes(4096)
        kx = eval_kernel(vm5, x1, nodes)
        oracle = np.array([
            (1.0 + float(np.dot(wts, eval_kernel(vm5, y, nodes) * kx)))
            / (theta + 1.0) for y in grid])
        cfg = McmcConfig(burn_in=1000, samples=8000, thin=5)
        chains = np.stack([
            posterior_lambda_bar(
                run_mcmc(pattern, uniform_prior, vm5, cfg,
                         RngStream(51, c)).draws,
                uniform_prior, vm5, grid).values
            for c in range(16)])
        grand = chains.mean(axis=0)
        se = chains.std(axis=0, ddof=1) / math.sqrt(chains.shape[0])
        assert np.all(np.abs(grand - oracle) < 3 * se)


class TestEstimateIntensity:
    def test_empty_pattern_prior_mean(self, circle, vm5, uniform_prior):
        summary = estimate_intensity(PointPattern.empty(circle), uniform_prior,
                                     vm5, 1.0, McmcConfig(), RngStream(0))
        assert summary.weight_mean == pytest.approx(TWO_PI)
        np.testing.assert_allclose(summary.lambda_hat.values, 1.0, rtol=1e-12)

    def test_lambda_hat_integrates_to_weight(self, circle, vm5, uniform_prior):
        pattern = PointPattern(circle, [0.3, 1.1, 4.0])
        cfg = McmcConfig(burn_in=200, samples=200, thin=2)
        summary = estimate_intensity(pattern, uniform_prior, vm5, 1.0, cfg,
                                     RngStream(31))
        assert summary.lambda_hat.integral() == \
            pytest.approx(summary.weight_mean, abs=1e-3 * summary.weight_mean)

    def test_shape_invariant_across_gamma_and_beta(self, circle, vm5):
        pattern = PointPattern(circle, [0.3, 1.1, 4.0])
        cfg = McmcConfig(burn_in=100, samples=100, thin=1)
        priors = [PriorSpec.uniform_unit(circle, gamma=0.0),
                  PriorSpec.uniform_unit(circle, gamma=TWO_PI - 1.0),
                  PriorSpec.uniform_unit(circle, beta=2.0, gamma=1.0)]
        values = []
        for prior in priors:
            summary = estimate_intensity(pattern, prior, vm5, 1.0, cfg,
                                         RngStream(32))
            values.append(summary.lambda_bar.values)
        np.testing.assert_array_equal(values[0], values[1])
        np.testing.assert_array_equal(values[0], values[2])

    def test_time_scale_change(self, circle, vm5, uniform_prior):
        # doubling s leaves the shape bit-identical and exactly halves the
        # weight (halving is exact in binary floating point)
        pattern = PointPattern(circle, [0.3, 1.1, 4.0])
        cfg = McmcConfig(burn_in=100, samples=100, thin=1)
        one = estimate_intensity(pattern, uniform_prior, vm5, 1.0, cfg,
                                 RngStream(33))
        two = estimate_intensity(pattern, uniform_prior, vm5, 2.0, cfg,
                                 RngStream(33))
        np.testing.assert_array_equal(one.lambda_bar.values,
                                      two.lambda_bar.values)
        assert two.weight_mean == one.weight_mean / 2.0

    def test_multi_gamma_shares_shape_object(self, circle, vm5, uniform_prior):
        pattern = PointPattern(circle, [0.3, 1.1])
        cfg = McmcConfig(burn_in=100, samples=80, thin=1)
        a, b = estimate_intensity_multi(pattern, uniform_prior, vm5, 1.0,
                                        [0.0, TWO_PI - 1.0], cfg, RngStream(34))
        assert a.lambda_bar is b.lambda_bar
        np.testing.assert_array_equal(a.lambda_hat.values,
                                      a.weight_mean * a.lambda_bar.values)
        np.testing.assert_array_equal(b.lambda_hat.values,
                                      b.weight_mean * b.lambda_bar.values)

    def test_json_summary(self, circle, vm5, uniform_prior):
        pattern = PointPattern(circle, [0.5])
        cfg = McmcConfig(burn_in=50, samples=20, thin=1)
        summary = estimate_intensity(pattern, uniform_prior, vm5, 1.0, cfg,
                                     RngStream(35), grid_size=64)
        obj = summary.to_json()
        assert len(obj["grid"]) == 64
        assert obj["weight_mean"] == summary.weight_mean
        assert "acceptance_rate" in obj["diagnostics"]
