# ./tests/unit/module_utils/estimation/test_askf.py

from dataclasses import replace

import numpy as np
import pytest

from numdiff.module_utils.common.errors import DegenerateFilterError, InvalidArgumentError
from numdiff.module_utils.estimation.askf import (
    AdaptConfig,
    KfState,
    ResidualStatistics,
    StateSpaceModel,
    adapt_covariances,
    adaptation_metric,
    candidate_covariances,
    closed_loop_matrix,
    eta_grid,
    forecast_criterion,
    has_zero_uncertainty,
    kf_assimilate,
    kf_forecast,
    kf_residual,
    model_for_order,
    sse_select,
)

SINGLE = model_for_order(1, 0.01)
DOUBLE = model_for_order(2, 0.01)


def scalar_state(P_f=0.0, P_da=0.0, x_fc=0.0):
    state = KfState.initial(SINGLE)
    return replace(state, P_f=np.array([[P_f]]), P_da=np.array([[P_da]]), x_fc=np.array([x_fc]))


class TestModels:

    def test_single_integrator(self):
        np.testing.assert_array_equal(SINGLE.A, [[1.0]])
        np.testing.assert_array_equal(SINGLE.B, [[0.01]])
        np.testing.assert_array_equal(SINGLE.C, [[1.0]])
        assert SINGLE.n == 1

    def test_double_integrator(self):
        np.testing.assert_allclose(DOUBLE.A, [[1.0, 0.01], [0.0, 1.0]])
        np.testing.assert_allclose(DOUBLE.B, [[0.00005], [0.01]])
        np.testing.assert_array_equal(DOUBLE.C, [[1.0, 0.0]])

    def test_invalid(self):
        with pytest.raises(InvalidArgumentError):
            model_for_order(3, 0.01)
        with pytest.raises(InvalidArgumentError):
            model_for_order(1, 0.0)
        with pytest.raises(InvalidArgumentError):
            StateSpaceModel(A=np.ones((2, 3)), B=np.ones(2), C=np.ones(2))


class TestForecast:

    def test_zero(self):
        state = kf_forecast(KfState.initial(DOUBLE), DOUBLE, 0.0, 0.0)
        np.testing.assert_array_equal(state.x_fc, np.zeros(2))
        np.testing.assert_array_equal(state.P_f, np.zeros((2, 2)))

    def test_single_integrator_step(self):
        state = replace(KfState.initial(SINGLE), x_da=np.array([1.0]))
        assert kf_forecast(state, SINGLE, 2.0, 0.0).x_fc[0] == pytest.approx(1.02)

    def test_double_integrator_matches_dense_arithmetic(self):
        rng = np.random.default_rng(3)
        root = rng.standard_normal((2, 2))
        v1_root = rng.standard_normal((2, 2))
        state = replace(KfState.initial(DOUBLE), x_da=rng.standard_normal(2), P_da=root @ root.T)
        V1 = v1_root @ v1_root.T
        dhat = float(rng.standard_normal())
        forecast = kf_forecast(state, DOUBLE, dhat, V1)
        np.testing.assert_allclose(forecast.x_fc, DOUBLE.A @ state.x_da + DOUBLE.B[:, 0] * dhat, rtol=1e-12)
        np.testing.assert_allclose(forecast.P_f, DOUBLE.A @ state.P_da @ DOUBLE.A.T + V1, rtol=1e-12)

    def test_scalar_v1_means_identity(self):
        forecast = kf_forecast(KfState.initial(DOUBLE), DOUBLE, 0.0, 0.5)
        np.testing.assert_array_equal(forecast.P_f, 0.5 * np.eye(2))

    def test_wrong_v1_shape(self):
        with pytest.raises(InvalidArgumentError):
            kf_forecast(KfState.initial(DOUBLE), DOUBLE, 0.0, np.eye(3))


class TestResidual:

    def test_perfect_forecast(self):
        _, z_k = kf_residual(scalar_state(x_fc=2.5), SINGLE, 2.5)
        assert z_k == 0.0

    def test_forecast_minus_measurement(self):
        state = replace(KfState.initial(DOUBLE), x_fc=np.array([3.0, 7.0]))
        updated, z_k = kf_residual(state, DOUBLE, 1.0)
        assert z_k == 2.0
        assert updated.residual_count == 1
        assert updated.residual_mean == 2.0

    def test_statistics_match_batch(self):
        rng = np.random.default_rng(8)
        residuals = rng.standard_normal(300) * 3.0 + 1.0
        stats = ResidualStatistics()
        assert stats.sample_variance == 0.0
        for k, z_k in enumerate(residuals):
            stats = stats.update(z_k)
            prefix = residuals[:k + 1]
            assert stats.mean == pytest.approx(prefix.mean(), rel=1e-12, abs=1e-12)
            expected = prefix.var(ddof=1) if k >= 1 else 0.0
            assert stats.sample_variance == pytest.approx(expected, rel=1e-12, abs=1e-12)

    def test_unrecorded_residual_leaves_statistics(self):
        state = replace(scalar_state(x_fc=4.0), residuals=ResidualStatistics().update(1.0))
        updated, z_k = kf_residual(state, SINGLE, 1.5, record=False)
        assert z_k == 2.5
        assert updated.residuals == state.residuals


class TestAssimilate:

    def test_no_state_uncertainty(self):
        state = kf_assimilate(scalar_state(P_f=0.0, x_fc=4.0), SINGLE, 1.5, 0.1)
        np.testing.assert_array_equal(state.K_da, [0.0])
        np.testing.assert_array_equal(state.x_da, [4.0])

    def test_scalar_closed_form(self):
        state = kf_assimilate(scalar_state(P_f=1.0, x_fc=0.0), SINGLE, 2.0, 1.0)
        assert state.K_da[0] == pytest.approx(-0.5)
        assert state.P_da[0, 0] == pytest.approx(0.5)
        assert state.x_da[0] == pytest.approx(-1.0)

    def test_gain_shrinks_as_sensor_noise_grows(self):
        gains = [abs(kf_assimilate(scalar_state(P_f=1.0), SINGLE, 1.0, v2).K_da[0]) for v2 in (1.0, 10.0, 100.0)]
        assert gains[0] > gains[1] > gains[2] > 0.0

    def test_degenerate(self):
        with pytest.raises(DegenerateFilterError):
            kf_assimilate(scalar_state(P_f=0.0), SINGLE, 1.0, 0.0)
        assert has_zero_uncertainty(scalar_state(P_f=0.0), SINGLE, 0.0)
        assert not has_zero_uncertainty(scalar_state(P_f=0.0), SINGLE, 0.1)

    def test_negative_sensor_noise(self):
        with pytest.raises(InvalidArgumentError):
            kf_assimilate(scalar_state(P_f=1.0), SINGLE, 1.0, -0.1)

    def test_closed_loop_matrix(self):
        state = kf_assimilate(scalar_state(P_f=1.0), SINGLE, 0.0, 1.0)
        np.testing.assert_allclose(closed_loop_matrix(state, SINGLE), [[0.5]])

    def test_covariances_stay_psd(self):
        rng = np.random.default_rng(12)
        state = KfState.initial(DOUBLE)
        for _ in range(2000):
            root = rng.standard_normal((2, 2)) * 0.1
            state = kf_forecast(state, DOUBLE, float(rng.standard_normal()), root @ root.T)
            state, z_k = kf_residual(state, DOUBLE, float(rng.standard_normal()))
            state = kf_assimilate(state, DOUBLE, z_k, float(rng.uniform(0.0, 1.0)) + 1e-6)
            for matrix in (state.P_f, state.P_da):
                np.testing.assert_array_equal(matrix, matrix.T)
                scale = max(1.0, np.max(np.abs(matrix)))
                assert np.min(np.linalg.eigvalsh(matrix)) >= -1e-10 * scale


class TestAdaptationMetric:

    def test_matched(self):
        assert adaptation_metric(3.0, np.array([[2.0]]), SINGLE, 1.0) == 0.0

    def test_value(self):
        assert adaptation_metric(5.0, np.array([[2.0]]), SINGLE, 1.0) == 2.0

    def test_equals_forecast_criterion_gap(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            root = rng.standard_normal((2, 2))
            state = replace(KfState.initial(DOUBLE), P_da=root @ root.T)
            eta, s_hat, v2 = rng.uniform(0.0, 2.0, size=3)
            p_f = DOUBLE.A @ state.P_da @ DOUBLE.A.T + eta * np.eye(2)
            j_f = forecast_criterion(state, DOUBLE, s_hat, np.array([eta]))[0]
            assert adaptation_metric(s_hat, p_f, DOUBLE, v2) == pytest.approx(abs(j_f - v2), rel=1e-12, abs=1e-12)

    def test_negative_s_hat(self):
        with pytest.raises(InvalidArgumentError):
            adaptation_metric(-1.0, np.zeros((1, 1)), SINGLE, 0.0)

    def test_stack_matches_single_covariances(self):
        rng = np.random.default_rng(16)
        root = rng.standard_normal((2, 2))
        state = replace(KfState.initial(DOUBLE), P_da=root @ root.T)
        etas = eta_grid(AdaptConfig(eta_lower=1e-4, eta_upper=10.0, grid_points=12))
        stack = candidate_covariances(state, DOUBLE, etas)
        metric = adaptation_metric(1.7, stack, DOUBLE, 0.2)
        assert metric.shape == etas.shape
        for value, p_f in zip(metric, stack):
            assert value == pytest.approx(adaptation_metric(1.7, p_f, DOUBLE, 0.2), rel=1e-12)


class TestCandidateCovariances:

    def test_each_candidate_adds_eta_identity(self):
        rng = np.random.default_rng(18)
        root = rng.standard_normal((2, 2))
        state = replace(KfState.initial(DOUBLE), P_da=root @ root.T)
        etas = np.array([0.0, 0.5, 3.0])
        stack = candidate_covariances(state, DOUBLE, etas)
        assert stack.shape == (3, 2, 2)
        for eta, p_f in zip(etas, stack):
            np.testing.assert_allclose(p_f, DOUBLE.A @ state.P_da @ DOUBLE.A.T + eta * np.eye(2), rtol=1e-12)

    def test_empty_grid(self):
        with pytest.raises(InvalidArgumentError):
            candidate_covariances(KfState.initial(SINGLE), SINGLE, np.array([]))


class TestGrid:

    @pytest.mark.parametrize("kwargs", [
        dict(eta_lower=1.0, eta_upper=1.0), dict(eta_lower=-1.0, eta_upper=1.0),
        dict(eta_lower=1e-6, eta_upper=1.0, grid_points=0), dict(eta_lower=0.0, eta_upper=1.0),
        dict(eta_lower=1e-6, eta_upper=1.0, grid_scale="cubic"),
        dict(eta_lower=1e-6, eta_upper=1.0, alpha=1.5),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            AdaptConfig(**kwargs)

    def test_linear_from_zero_allowed(self):
        grid = eta_grid(AdaptConfig(eta_lower=0.0, eta_upper=1.0, grid_points=4, grid_scale="linear"))
        np.testing.assert_allclose(grid, [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_logarithmic(self):
        grid = eta_grid(AdaptConfig(eta_lower=1e-6, eta_upper=1e2, grid_points=8))
        assert grid.shape == (9,)
        np.testing.assert_allclose(grid, 10.0 ** np.arange(-6, 3), rtol=1e-12)

    def test_empty_grid(self):
        with pytest.raises(InvalidArgumentError):
            forecast_criterion(KfState.initial(SINGLE), SINGLE, 1.0, np.array([]))

    def test_criterion_affine_with_slope(self):
        rng = np.random.default_rng(10)
        root = rng.standard_normal((2, 2))
        state = replace(KfState.initial(DOUBLE), P_da=root @ root.T)
        etas = eta_grid(AdaptConfig(eta_lower=0.0, eta_upper=2.0, grid_points=20, grid_scale="linear"))
        j_f = forecast_criterion(state, DOUBLE, 4.0, etas)
        slope = float(DOUBLE.C @ DOUBLE.C.T)
        np.testing.assert_allclose(np.diff(j_f) / np.diff(etas), -slope, atol=1e-10)
        assert np.all(np.diff(j_f) < 0)


class TestAdaptCovariances:

    def test_no_positive_value_picks_smallest_eta(self):
        config = AdaptConfig(eta_lower=0.1, eta_upper=1.0, grid_points=9, grid_scale="linear")
        V1, V2 = adapt_covariances(KfState.initial(SINGLE), SINGLE, 0.0, config)
        np.testing.assert_allclose(V1, [[0.1]])
        assert V2 == 0.0

    def test_hand_enumerated_grid(self):
        config = AdaptConfig(eta_lower=0.25, eta_upper=0.75, grid_points=2, grid_scale="linear", alpha=0.5)
        V1, V2 = adapt_covariances(KfState.initial(SINGLE), SINGLE, 1.0, config)
        np.testing.assert_allclose(V1, [[0.5]])
        assert V2 == pytest.approx(0.5)

    def test_alpha_one_takes_largest_positive(self):
        config = AdaptConfig(eta_lower=0.1, eta_upper=1.5, grid_points=14, grid_scale="linear", alpha=1.0)
        V1, V2 = adapt_covariances(KfState.initial(SINGLE), SINGLE, 0.95, config)
        assert V1[0, 0] == pytest.approx(0.9)
        assert V2 == pytest.approx(0.05)

    def test_alpha_zero_takes_smallest_eta(self):
        config = AdaptConfig(eta_lower=0.1, eta_upper=1.5, grid_points=14, grid_scale="linear", alpha=0.0)
        V1, V2 = adapt_covariances(KfState.initial(SINGLE), SINGLE, 0.95, config)
        assert V1[0, 0] == pytest.approx(0.1)
        assert V2 == pytest.approx(0.85)

    def test_chosen_pair_matches_residual_variance(self):
        rng = np.random.default_rng(14)
        config = AdaptConfig(eta_lower=1e-6, eta_upper=1.0)
        for _ in range(10):
            root = rng.standard_normal((2, 2)) * 0.1
            state = replace(KfState.initial(DOUBLE), P_da=root @ root.T)
            s_hat = float(rng.uniform(1.0, 3.0))
            V1, V2 = adapt_covariances(state, DOUBLE, s_hat, config)
            assert V2 > 0
            p_f = DOUBLE.A @ state.P_da @ DOUBLE.A.T + V1
            assert adaptation_metric(s_hat, p_f, DOUBLE, V2) == pytest.approx(0.0, abs=1e-12)

    def test_without_positive_value_minimises_metric(self):
        rng = np.random.default_rng(20)
        config = AdaptConfig(eta_lower=1e-3, eta_upper=1.0, grid_points=30)
        etas = eta_grid(config)
        for _ in range(10):
            root = rng.standard_normal((2, 2))
            state = replace(KfState.initial(DOUBLE), P_da=root @ root.T + np.eye(2))
            s_hat = float(rng.uniform(0.0, 0.5))
            assert not np.any(forecast_criterion(state, DOUBLE, s_hat, etas) > 0)
            V1, V2 = adapt_covariances(state, DOUBLE, s_hat, config)
            metric = adaptation_metric(s_hat, candidate_covariances(state, DOUBLE, etas), DOUBLE, 0.0)
            assert V2 == 0.0
            assert V1[0, 0] == etas[int(np.argmin(metric))]

    def test_sse_pins_sensor_covariance(self):
        config = AdaptConfig(eta_lower=0.25, eta_upper=0.75, grid_points=2, grid_scale="linear")
        V1, V2 = sse_select(KfState.initial(SINGLE), SINGLE, 1.0, config, 0.3)
        np.testing.assert_allclose(V1, [[0.75]])
        assert V2 == 0.3
