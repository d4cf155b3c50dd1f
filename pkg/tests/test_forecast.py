import math

import numpy as np
import pytest

from psgraph import (
    ValidationError,
    ar_forecast,
    causal_tti_selector,
    directed_laplacian,
    eigendecompose,
    evaluate,
    fit_ar,
    fit_cluster_model,
    fit_tar,
    forecast_cluster,
    gft,
    tar_forecast,
    transform_series,
    tti,
)
from psgraph.forecast import ARModel, ClusterModel, TARModel

RNG = np.random.default_rng


def ar1_series(a, t, noise, seed, intercept=0.0, y0=1.0):
    rng = RNG(seed)
    y = np.empty(t)
    y[0] = y0
    e = noise * rng.standard_normal(t)
    for k in range(1, t):
        y[k] = intercept + a * y[k - 1] + e[k]
    return y


def trivial_basis(n=1):
    return eigendecompose(np.zeros((n, n)))


class TestTTI:
    def test_free_flow_gives_one(self):
        assert tti(12.0, 12.0) == 1.0

    def test_double_gives_two(self):
        assert tti(24.0, 12.0) == 2.0

    def test_fractional(self):
        assert tti(170.0, 100.0) == pytest.approx(1.7)

    def test_arrays(self):
        out = tti(np.array([10.0, 30.0]), np.array([10.0, 20.0]))
        assert np.allclose(out, [1.0, 1.5])

    def test_validation(self):
        with pytest.raises(ValidationError):
            tti(10.0, 0.0)
        with pytest.raises(ValidationError):
            tti(-1.0, 10.0)


class TestFitAR:
    def test_noiseless_recovery_is_exact(self):
        y = ar1_series(0.5, 80, noise=0.0, seed=0)
        model = fit_ar(y, m=1)
        assert model.coefficients[0] == pytest.approx(0.5, abs=1e-10)
        assert model.intercept == pytest.approx(0.0, abs=1e-10)
        assert model.noise_scale <= 1e-10

    def test_white_noise_has_no_structure(self):
        t = 20_000
        y = RNG(1).standard_normal(t)
        model = fit_ar(y, m=3)
        assert np.max(np.abs(model.coefficients)) <= 3.0 / math.sqrt(t)

    def test_ar2_recovery(self):
        rng = RNG(2)
        t = 10_000
        y = np.zeros(t)
        e = 0.3 * rng.standard_normal(t)
        for k in range(2, t):
            y[k] = 0.5 * y[k - 1] - 0.3 * y[k - 2] + e[k]
        model = fit_ar(y, m=2)
        assert model.coefficients[0] == pytest.approx(0.5, abs=0.05)
        assert model.coefficients[1] == pytest.approx(-0.3, abs=0.05)

    def test_residuals_orthogonal_to_design(self):
        y = ar1_series(0.7, 400, noise=1.0, seed=3)
        m = 3
        model = fit_ar(y, m=m)
        cols = [np.ones(y.shape[0] - m)]
        cols += [y[m - i: y.shape[0] - i] for i in range(1, m + 1)]
        design = np.column_stack(cols)
        theta = np.concatenate(([model.intercept], model.coefficients))
        resid = y[m:] - design @ theta
        assert np.max(np.abs(design.T @ resid)) <= 1e-8 * y.shape[0]

    def test_length_guard(self):
        with pytest.raises(ValidationError):
            fit_ar(np.ones(17), m=5)

    def test_constant_series_falls_back_to_intercept(self):
        model = fit_ar(np.full(30, 4.0), m=2)
        assert model.coefficients == (0.0, 0.0)
        assert model.intercept == pytest.approx(4.0)
        assert model.noise_scale <= 1e-12


class TestFitTAR:
    def test_two_regime_recovery(self):
        rng = RNG(4)
        t = 3000
        z = rng.uniform(0.0, 1.0, t)
        y = np.zeros(t)
        e = 0.05 * rng.standard_normal(t)
        for k in range(1, t):
            a = 0.8 if z[k] <= 0.5 else -0.4
            y[k] = a * y[k - 1] + e[k]
        model = fit_tar(y, z, regimes=2, m=1, grid=20)
        beta = model.thresholds[1]
        assert beta == pytest.approx(0.5, abs=0.06)
        assert model.regimes[0].coefficients[0] == pytest.approx(0.8, abs=0.05)
        assert model.regimes[1].coefficients[0] == pytest.approx(-0.4, abs=0.05)

    def test_single_regime_wraps_plain_ar(self):
        y = ar1_series(0.4, 60, noise=0.2, seed=5)
        z = RNG(6).normal(size=60)
        model = fit_tar(y, z, regimes=1, m=2)
        assert model.thresholds == (-math.inf, math.inf)
        assert model.regimes == (fit_ar(y, 2),)

    def test_constant_selector_rejected(self):
        # a constant selector yields a single candidate threshold, which
        # cannot separate three regimes
        y = ar1_series(0.4, 60, noise=0.2, seed=7)
        with pytest.raises(ValidationError, match="distinct"):
            fit_tar(y, np.zeros(60), regimes=3, m=1)
        # with two regimes it fails later, on regime occupancy
        with pytest.raises(ValidationError, match="layout"):
            fit_tar(y, np.zeros(60), regimes=2, m=1)

    def test_occupancy_floor_unsatisfiable(self):
        y = ar1_series(0.4, 40, noise=0.2, seed=8)
        z = np.zeros(40)
        z[10] = z[20] = 1.0
        with pytest.raises(ValidationError, match="layout"):
            fit_tar(y, z, regimes=2, m=1)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            fit_tar(np.ones(30), np.ones(29), regimes=2, m=1)

    def test_identical_regimes_match_plain_ar(self):
        y = ar1_series(0.5, 300, noise=0.0, seed=9)
        z = RNG(10).uniform(0.0, 1.0, 300)
        tar = fit_tar(y, z, regimes=2, m=1, grid=10)
        ar = fit_ar(y, m=1)
        fa = ar_forecast(ar, y, horizon=8)
        ft = tar_forecast(tar, y, 0.5, horizon=8)
        assert np.max(np.abs(fa - ft)) <= 1e-6

    def test_regime_boundary_is_inclusive_on_the_left(self):
        model = TARModel(thresholds=(-math.inf, 0.5, math.inf),
                         regimes=(ARModel(1, (0.0,), -1.0, 0.0),
                                  ARModel(1, (0.0,), 1.0, 0.0)))
        assert model.regime_of(0.5) == 0
        assert model.regime_of(0.5 + 1e-9) == 1


class TestScalarForecasts:
    def test_halving_recursion(self):
        model = ARModel(order=1, coefficients=(0.5,), intercept=0.0,
                        noise_scale=0.0)
        out = ar_forecast(model, [8.0], horizon=3)
        assert np.allclose(out, [4.0, 2.0, 1.0])

    def test_history_shorter_than_order(self):
        model = ARModel(order=3, coefficients=(0.1, 0.1, 0.1), intercept=0.0,
                        noise_scale=0.0)
        with pytest.raises(ValidationError):
            ar_forecast(model, [1.0, 2.0], horizon=1)

    def test_tar_uses_selected_regime(self):
        model = TARModel(thresholds=(-math.inf, 0.0, math.inf),
                         regimes=(ARModel(1, (0.5,), 0.0, 0.0),
                                  ARModel(1, (-0.4,), 1.0, 0.0)))
        high = tar_forecast(model, [2.0], z=1.0, horizon=1)
        assert high[0] == pytest.approx(1.0 - 0.4 * 2.0)
        low = tar_forecast(model, [2.0], z=-1.0, horizon=1)
        assert low[0] == pytest.approx(0.5 * 2.0)

    def test_tar_selector_broadcast_and_per_step(self):
        model = TARModel(thresholds=(-math.inf, 0.0, math.inf),
                         regimes=(ARModel(1, (0.0,), -5.0, 0.0),
                                  ARModel(1, (0.0,), 7.0, 0.0)))
        out = tar_forecast(model, [0.0], z=[1.0, -1.0], horizon=2)
        assert np.allclose(out, [7.0, -5.0])


class TestClusterModelFit:
    def test_per_frequency_ar_recovery(self, path4):
        basis = eigendecompose(directed_laplacian(path4))
        coeffs = [0.3, 0.5, -0.4, 0.7]
        rng = RNG(11)
        t = 3000
        spectral = np.zeros((4, t))
        for f, a in enumerate(coeffs):
            e = 0.1 * rng.standard_normal(t)
            for k in range(1, t):
                spectral[f, k] = a * spectral[f, k - 1] + e[k]
        x = basis.eigenvectors @ spectral
        model = fit_cluster_model(x, basis, kind="ar", order=1)
        got = [fm.coefficients[0] for fm in model.frequency_models]
        assert np.allclose(got, coeffs, atol=0.05)

    def test_constant_zero_series_gives_zero_models(self):
        basis = trivial_basis(2)
        model = fit_cluster_model(np.zeros((2, 40)), basis, kind="ar", order=2)
        for fm in model.frequency_models:
            assert fm.coefficients == (0.0, 0.0)
            assert fm.intercept == 0.0

    def test_single_vertex_cluster_equals_plain_ar(self):
        y = ar1_series(0.6, 200, noise=0.3, seed=12)
        model = fit_cluster_model(y[None, :], trivial_basis(1), kind="ar",
                                  order=2)
        assert model.frequency_models[0] == fit_ar(y, 2)

    def test_tar_requires_selector(self):
        with pytest.raises(ValidationError):
            fit_cluster_model(np.ones((1, 40)), trivial_basis(1), kind="tar")

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValidationError):
            fit_cluster_model(np.ones((1, 40)), trivial_basis(1), kind="arma")

    def test_order_property_spans_tar_regimes(self):
        fm = TARModel(thresholds=(-math.inf, math.inf),
                      regimes=(ARModel(4, (0.0,) * 4, 0.0, 0.0),))
        cm = ClusterModel(cluster_id=0, vertices=(0,), basis=trivial_basis(1),
                          kind="tar", frequency_models=(fm,))
        assert cm.order == 4


class TestClusterForecast:
    def test_zero_model_zero_history(self):
        fm = ARModel(1, (0.0,), 0.0, 0.0)
        cm = ClusterModel(0, (0, 1), trivial_basis(2), "ar", (fm, fm))
        out = forecast_cluster(cm, np.zeros((2, 5)), horizon=4)
        assert np.allclose(out, 0.0)

    def test_halving_recursion_per_vertex(self):
        basis = eigendecompose(np.eye(2))
        fm = ARModel(1, (0.5,), 0.0, 0.0)
        cm = ClusterModel(0, (0, 1), basis, "ar", (fm, fm))
        out = forecast_cluster(cm, np.array([[2.0], [-3.0]]), horizon=3)
        assert np.allclose(out[0], [1.0, 0.5, 0.25])
        assert np.allclose(out[1], [-1.5, -0.75, -0.375])

    def test_differenced_levels_accumulate(self):
        fm = ARModel(1, (0.5,), 0.0, 0.0)
        cm = ClusterModel(0, (0,), trivial_basis(1), "ar", (fm,),
                          differenced=True)
        history = np.array([[0.0, 1.0, 1.5, 1.75]])
        out = forecast_cluster(cm, history, horizon=2)
        assert np.allclose(out[0], [1.875, 1.9375])

    def test_seasonal_phase_alignment(self):
        fm = ARModel(1, (0.0,), 0.0, 0.0)
        means = np.array([[10.0, -10.0]])
        cm = ClusterModel(0, (0,), trivial_basis(1), "ar", (fm,),
                          seasonal_period=2, seasonal_means=means)
        history = np.array([[10.0, -10.0, 10.0]])
        out = forecast_cluster(cm, history, horizon=2, t0=0)
        assert np.allclose(out[0], [-10.0, 10.0])

    def test_tar_regime_switches_on_reconstructed_sum(self):
        fm = TARModel(thresholds=(-math.inf, 0.0, math.inf),
                      regimes=(ARModel(1, (0.0,), -5.0, 0.0),
                               ARModel(1, (0.0,), 7.0, 0.0)))
        cm = ClusterModel(0, (0,), trivial_basis(1), "tar", (fm,))
        up = forecast_cluster(cm, np.array([[3.0]]), horizon=2)
        assert np.allclose(up[0], [7.0, 7.0])
        down = forecast_cluster(cm, np.array([[-2.0]]), horizon=3)
        assert np.allclose(down[0], [-5.0, -5.0, -5.0])

    def test_noiseless_generator_reproduced(self):
        basis = eigendecompose(np.eye(2))
        t = 60
        spectral = np.zeros((2, t + 10))
        spectral[:, 0] = [1.0, -2.0]
        for k in range(1, t + 10):
            spectral[0, k] = 0.2 + 0.5 * spectral[0, k - 1]
            spectral[1, k] = -0.1 + 0.8 * spectral[1, k - 1]
        x = spectral
        model = fit_cluster_model(x[:, :t], basis, kind="ar", order=1)
        out = forecast_cluster(model, x[:, :t], horizon=10)
        assert np.max(np.abs(out - x[:, t:])) <= 1e-8

    def test_history_too_short_for_order(self):
        fm = ARModel(3, (0.1, 0.1, 0.1), 0.0, 0.0)
        cm = ClusterModel(0, (0,), trivial_basis(1), "ar", (fm,))
        with pytest.raises(ValidationError):
            forecast_cluster(cm, np.array([[1.0, 2.0]]), horizon=1)

    def test_relabeling_equivariance(self, path4):
        rng = RNG(13)
        x = np.cumsum(0.1 * rng.standard_normal((4, 400)), axis=1)
        basis = eigendecompose(directed_laplacian(path4))
        model = fit_cluster_model(x, basis, kind="ar", order=2)
        base = forecast_cluster(model, x, horizon=5)

        perm = np.array([2, 0, 3, 1])  # new id of each old vertex
        from psgraph import build_graph
        edges = [(perm[s], perm[d], w) for s, d, w in path4.edges]
        gp = build_graph(4, edges)
        xp = np.empty_like(x)
        xp[perm] = x
        basis_p = eigendecompose(directed_laplacian(gp))
        model_p = fit_cluster_model(xp, basis_p, kind="ar", order=2)
        out_p = forecast_cluster(model_p, xp, horizon=5)
        expected = np.empty_like(base)
        expected[perm] = base
        assert np.allclose(out_p, expected, atol=1e-8)


class TestTransformHelpers:
    def test_transform_round_trip_metadata(self):
        x = RNG(14).normal(size=(2, 24)) + 5.0
        work, means = transform_series(x, period=4, differenced=True)
        assert work.shape == (2, 23)
        assert means.shape == (2, 4)
        again, _ = transform_series(x, period=4, differenced=True, means=means)
        assert np.array_equal(work, again)

    def test_no_period_returns_none_means(self):
        x = RNG(15).normal(size=(2, 10))
        work, means = transform_series(x)
        assert means is None
        assert np.array_equal(work, x)

    def test_selector_alignment_differenced(self):
        raw = np.array([[1.0, 2.0, 3.0], [10.0, 20.0, 30.0]])
        assert np.allclose(causal_tti_selector(raw, differenced=True),
                           [11.0, 22.0])

    def test_selector_alignment_levels(self):
        raw = np.array([[1.0, 2.0, 3.0], [10.0, 20.0, 30.0]])
        assert np.allclose(causal_tti_selector(raw, differenced=False),
                           [11.0, 11.0, 22.0])


class TestEvaluate:
    def test_perfect_forecast(self):
        x = RNG(16).normal(size=(2, 5)) + 3.0
        m = evaluate(x, x)
        assert (m.mae, m.rmse, m.mape) == (0.0, 0.0, 0.0)

    def test_frozen_symmetric_errors(self):
        m = evaluate([110.0, 90.0], [100.0, 100.0])
        assert m.mae == pytest.approx(10.0)
        assert m.rmse == pytest.approx(10.0)
        assert m.mape == pytest.approx(10.0)

    def test_zero_truth_masked_from_mape_only(self):
        m = evaluate([1.0, 110.0], [0.0, 100.0])
        assert m.mae == pytest.approx(5.5)
        assert m.mape == pytest.approx(10.0)

    def test_all_masked_rejected(self):
        with pytest.raises(ValidationError):
            evaluate([1.0, 2.0], [0.0, 0.0])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            evaluate(np.ones((1, 2)), np.ones((2, 1)))

    def test_explicit_mask(self):
        m = evaluate([110.0, 90.0], [100.0, 100.0],
                     mask=[True, False])
        assert m.mape == pytest.approx(10.0)
        with pytest.raises(ValidationError):
            evaluate([110.0], [100.0], mask=[False])

    def test_rmse_dominates_mae(self):
        p = RNG(17).normal(size=50)
        t = RNG(18).normal(size=50)
        m = evaluate(p, t)
        assert m.rmse >= m.mae
