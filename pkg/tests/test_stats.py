import numpy as np
import pytest

from alob.errors import (
    DegenerateSeries,
    InsufficientHistory,
    InvalidMemory,
    InvalidParameters,
    LengthMismatch,
    SeriesTooShort,
    SingularSystem,
)
from alob.flow.dar import DarParams, gen_dar
from alob.stats.autocorr import AutocorrEstimate, sample_autocorr
from alob.stats.dar_fit import moving_average, smooth_and_project, yule_walker_fit, yule_walker_solve
from alob.stats.predictors import (
    DarPredictor,
    PRIVATE_LMF,
    PUBLIC_DAR,
    SignPrediction,
    SignWindow,
    dar_bound,
    dar_predictions,
    day_burn_in_mask,
    mse,
    predict,
    predict_lagged,
)


def exact_acf(rho) -> AutocorrEstimate:
    return AutocorrEstimate(np.asarray(rho, dtype=float), n_obs=10**6, variance=1.0)


class TestSampleAutocorr:
    def test_matches_direct_sum(self):
        x = np.random.default_rng(0).normal(size=500)
        acf = sample_autocorr(x, 5)
        centred = x - x.mean()
        direct = [np.dot(centred[: x.size - k], centred[k:]) / np.dot(centred, centred) for k in range(6)]
        np.testing.assert_allclose(acf.rho, direct, atol=1e-12)
        assert acf.rho[0] == 1.0
        assert acf.max_lag == 5
        np.testing.assert_array_equal(acf.lags, np.arange(1, 6))

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            sample_autocorr(np.ones(100), 10)

    def test_constant_series(self):
        with pytest.raises(DegenerateSeries):
            sample_autocorr(np.ones(1000), 10)

    def test_autocovariance(self):
        x = np.random.default_rng(1).choice([-1.0, 1.0], size=2000)
        acf = sample_autocorr(x, 3)
        assert acf.autocovariance()[0] == pytest.approx(np.var(x))


class TestYuleWalker:
    def test_exact_dar1(self):
        coefficients = yule_walker_solve(exact_acf(0.5 ** np.arange(6)), 3)
        np.testing.assert_allclose(coefficients, [0.5, 0.0, 0.0], atol=1e-12)

    def test_singular(self):
        with pytest.raises(SingularSystem):
            yule_walker_solve(exact_acf(np.ones(5)), 3)

    def test_order_beyond_estimate(self):
        with pytest.raises(ValueError):
            yule_walker_solve(exact_acf([1.0, 0.5]), 3)

    def test_recovers_simulated_parameters(self):
        params = DarParams(0.5, (0.5, 0.3, 0.2))
        x = gen_dar(params, 400_000, np.random.default_rng(2))
        fitted = yule_walker_fit(sample_autocorr(x, 3), 3, window=1)
        assert fitted.chi == pytest.approx(0.5, abs=0.03)
        np.testing.assert_allclose(fitted.coefficients, params.coefficients, atol=0.02)


class TestSmoothing:
    def test_moving_average_window(self):
        smoothed = moving_average(np.arange(20.0), 10)
        assert smoothed[10] == pytest.approx(9.5)
        assert smoothed[0] == pytest.approx(2.0)
        assert smoothed[19] == pytest.approx(16.5)
        np.testing.assert_allclose(moving_average(np.ones(7), 10), np.ones(7))

    def test_negatives_are_clipped(self):
        params = smooth_and_project([0.3, -0.1, 0.05], window=1)
        assert params.chi == pytest.approx(0.35)
        assert params.phi == pytest.approx((0.3 / 0.35, 0.0, 0.05 / 0.35))

    def test_full_memory_rejected(self):
        with pytest.raises(InvalidMemory):
            smooth_and_project([0.6, 0.6], window=1)

    def test_smoothed_phi_is_a_distribution(self):
        raw = np.random.default_rng(3).normal(0.002, 0.004, size=200)
        params = smooth_and_project(raw)
        assert params.p == 200
        assert min(params.phi) >= 0.0
        assert sum(params.phi) == pytest.approx(1.0)
        assert 0.0 <= params.chi < 1.0


class TestPredictors:
    params = DarParams.from_coefficients([0.3, 0.2])

    def test_one_step(self):
        # latest sign -1, the one before +1
        assert predict(self.params, [1, 1, -1]).value == pytest.approx(0.3 * -1 + 0.2 * 1)

    def test_drift(self):
        params = DarParams(0.5, mu_z=0.4)
        assert predict(params, [1]).value == pytest.approx(0.5 + 0.4 * 0.5)

    def test_insufficient_history(self):
        with pytest.raises(InsufficientHistory):
            predict(self.params, [1])

    def test_lagged_zero_is_one_step(self):
        history = [1, -1, -1, 1]
        assert predict_lagged(self.params, history, 0).value == pytest.approx(predict(self.params, history).value)

    def test_lagged_recursion(self):
        one = predict(self.params, [1, -1]).value
        two = 0.3 * one + 0.2 * -1
        assert predict_lagged(self.params, [1, -1], 1).value == pytest.approx(two)

    def test_vectorised_matches_pointwise(self):
        params = DarParams(0.6, (0.4, 0.3, 0.2, 0.1), mu_z=0.1)
        series = gen_dar(params, 300, np.random.default_rng(4))
        for s in (0, 1, 3):
            out = dar_predictions(params, series, s)
            assert np.all(np.isnan(out[: params.p + s]))
            for t in range(params.p + s, series.size, 17):
                assert out[t] == pytest.approx(predict_lagged(params, series[: t - s], s).value)

    def test_short_series_is_all_nan(self):
        assert np.all(np.isnan(dar_predictions(self.params, [1, -1], 0)))

    def test_prediction_validation(self):
        with pytest.raises(InvalidParameters):
            SignPrediction(1.5)
        with pytest.raises(InvalidParameters):
            SignPrediction(0.2, horizon=-1)

    def test_prediction_within_its_source_bound(self):
        with pytest.raises(InvalidParameters, match=PRIVATE_LMF):
            SignPrediction(0.7, source=PRIVATE_LMF, bound=0.6)
        assert SignPrediction(-0.6, source=PRIVATE_LMF, bound=0.6).value == -0.6
        with pytest.raises(InvalidParameters):
            SignPrediction(0.0, bound=1.5)

    def test_dar_forecast_carries_its_bound(self):
        params = DarParams(0.6, (0.5, 0.5), mu_z=0.5)
        assert dar_bound(params) == pytest.approx(0.8)
        forecast = predict(params, [1, 1])
        assert forecast.source == PUBLIC_DAR
        assert forecast.bound == pytest.approx(0.8)
        assert forecast.value == pytest.approx(0.8)


class TestMse:
    def test_skips_nan(self):
        result = mse([1, -1, 1, 1], [np.nan, 0.0, 0.5, 1.0])
        assert result.n_obs == 3
        assert result.mse == pytest.approx((1.0 + 0.25 + 0.0) / 3)
        assert result.null_bound == pytest.approx(1.0 + (0.0 + 0.25 + 1.0) / 3)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            mse([1, -1], [0.0])

    def test_dar_beats_null(self):
        params = DarParams(0.7, (0.6, 0.4))
        series = gen_dar(params, 50_000, np.random.default_rng(5))
        result = mse(series, dar_predictions(params, series))
        assert result.mse < 1.0
        assert result.mse < result.null_bound


def test_day_burn_in_mask():
    np.testing.assert_array_equal(
        day_burn_in_mask([1, 1, 1, 2, 2, 2], 2),
        [False, False, True, False, False, True],
    )


class TestSignWindow:
    def test_latest_last(self):
        window = SignWindow(3)
        for v in (1, 2, 3, 4, 5):
            window.push(v)
        np.testing.assert_array_equal(window.values(), [3, 4, 5])
        assert window.lagged(1) == 5
        assert window.lagged(3) == 3
        assert window.full

    def test_predictor_matches_batch(self):
        params = DarParams.from_coefficients([0.3, 0.2, 0.1])
        predictor = DarPredictor(params)
        history = []
        for sign in (1, -1):
            predictor.push(sign)
            history.append(sign)
        assert not predictor.ready
        with pytest.raises(InsufficientHistory):
            predictor.predict()
        for sign in (1, 1, -1, 1):
            predictor.push(sign)
            history.append(sign)
            assert predictor.predict() == pytest.approx(predict(params, history).value)
