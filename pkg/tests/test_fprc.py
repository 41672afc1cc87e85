"""The reservoir-plus-fuzzy feedforward pipeline and its linear ablation."""
import numpy as np
import pytest

from pneurc.datasets import Dataset
from pneurc.errors import (DimensionError, InvalidDataError, InvalidSpecError,
                           NumericError)
from pneurc.fprc import (FprcFeedforward, FprcModel, FprcParams, FprcState,
                         FprcTrainer, TapBuffer, convert_angle,
                         fprc_collect_training, fprc_feature, fprc_step,
                         fprc_weight_analysis, lowpass_step,
                         simulate_reservoir_record)
from pneurc.fuzzy import FuzzyRuleSet, fuzzy_infer_batch
from pneurc.plant import ReservoirPlant
from pneurc.training import ridge_solve


def make_dataset(theta, p_exp, p_o=None, dt=1 / 200):
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    p_o = np.zeros(n) if p_o is None else np.asarray(p_o, dtype=float)
    return Dataset(theta=theta, p_exp=np.asarray(p_exp, dtype=float),
                   p_i=np.zeros(n), p_o=p_o, dt=dt)


# ---------------------------------------------------------------------------
# elementary stages


def test_convert_angle():
    assert convert_angle(30.0, 7.0) == 210.0
    assert convert_angle(100.0, 7.0) == 450.0   # clamped to the supply limit
    assert convert_angle(-5.0, 7.0) == 0.0
    assert convert_angle(100.0, 7.0, limit=800.0) == 700.0
    with pytest.raises(NumericError):
        convert_angle(float("nan"), 7.0)


def test_params_validation():
    with pytest.raises(InvalidSpecError):
        FprcParams(k_in=0.0)
    with pytest.raises(InvalidSpecError):
        FprcParams(epsilon=0.0)
    with pytest.raises(InvalidSpecError):
        FprcParams(epsilon=1.5)
    with pytest.raises(InvalidSpecError):
        FprcParams(n_u=0)
    with pytest.raises(InvalidSpecError):
        FprcParams(filter_init="steady")
    assert FprcParams(epsilon=1.0).epsilon == 1.0
    assert FprcParams().replace(n_c=2).n_c == 2


def test_tap_buffer_most_recent_first():
    taps = TapBuffer(3)
    np.testing.assert_array_equal(taps.view(), [0.0, 0.0, 0.0])
    taps.push(1.0)
    taps.push(2.0)
    np.testing.assert_array_equal(taps.view(), [2.0, 1.0, 0.0])
    taps.push(3.0)
    taps.push(4.0)
    np.testing.assert_array_equal(taps.view(), [4.0, 3.0, 2.0])
    view = taps.view()
    view[0] = 99.0
    assert taps.view()[0] == 4.0  # views are copies
    taps.reset()
    np.testing.assert_array_equal(taps.view(), [0.0, 0.0, 0.0])
    assert len(taps) == 3
    with pytest.raises(InvalidSpecError):
        TapBuffer(0)
    with pytest.raises(NumericError):
        taps.push(float("inf"))


def test_lowpass_first_sample_init():
    state = FprcState(FprcParams())
    # first-sample init: the first output equals the first input exactly
    assert lowpass_step(state, 120.0, 0.01) == pytest.approx(120.0)
    expected = 0.01 * 50.0 + 0.99 * 120.0
    assert lowpass_step(state, 50.0, 0.01) == pytest.approx(expected)


def test_lowpass_zero_init():
    state = FprcState(FprcParams(filter_init="zero"))
    assert lowpass_step(state, 120.0, 0.01) == pytest.approx(1.2)
    with pytest.raises(NumericError):
        lowpass_step(state, float("nan"), 0.01)


def test_lowpass_matches_scalar_recursion(rng):
    params = FprcParams(epsilon=0.03)
    state = FprcState(params)
    p = rng.uniform(80.0, 300.0, size=50)
    filt = None
    for v in p:
        if filt is None:
            filt = v
        filt = 0.03 * v + 0.97 * filt
        assert lowpass_step(state, v, 0.03) == pytest.approx(filt, rel=1e-14)


def test_fprc_feature_layout():
    state = FprcState(FprcParams(n_y=2, n_u=2))
    state.theta_taps.push(10.0)
    state.theta_taps.push(20.0)
    state.p_taps.push(100.0)
    x = fprc_feature(state)
    np.testing.assert_array_equal(x, [20.0, 10.0, 100.0, 0.0])
    lin = FprcState(FprcParams(n_y=2), reservoir_features=False)
    lin.theta_taps.push(5.0)
    np.testing.assert_array_equal(fprc_feature(lin), [5.0, 0.0])
    lin.reset()
    np.testing.assert_array_equal(fprc_feature(lin), [0.0, 0.0])


# ---------------------------------------------------------------------------
# training-matrix assembly


def test_tap_matrix_via_fuzzy_linear_collect():
    X, y = fprc_collect_training([1.0, 2.0, 3.0], [7.0, 8.0, 9.0],
                                 params=FprcParams(n_y=2), reservoir_features=False)
    np.testing.assert_array_equal(X, [[1.0, 0.0], [2.0, 1.0], [3.0, 2.0]])
    np.testing.assert_array_equal(y, [7.0, 8.0, 9.0])


def test_collect_filters_recorded_pressure():
    theta = np.array([1.0, 2.0])
    p_o = np.array([100.0, 200.0])
    X, _ = fprc_collect_training(theta, theta, p_o=p_o,
                                 params=FprcParams(n_y=1, n_u=1, epsilon=0.5))
    # filtered series: [100, 150]; columns are [theta, p_filt]
    np.testing.assert_allclose(X, [[1.0, 100.0], [2.0, 150.0]])


def test_collect_validation():
    params = FprcParams()
    with pytest.raises(InvalidSpecError):
        fprc_collect_training([1.0], [1.0])
    with pytest.raises(InvalidDataError):
        fprc_collect_training([1.0, 2.0], [1.0], params=params)
    with pytest.raises(InvalidSpecError):
        fprc_collect_training([1.0], [1.0], params=params)  # no p_o, no reservoir
    with pytest.raises(InvalidDataError):
        fprc_collect_training([1.0, 2.0], [1.0, 2.0], p_o=[1.0], params=params)
    with pytest.raises(InvalidDataError):
        fprc_collect_training([], [], params=params, reservoir_features=False)


def test_simulated_record_matches_generated_dataset(small_dataset, default_config):
    params = default_config.fprc_params()
    fresh = default_config.build_reservoir()
    p_o = simulate_reservoir_record(small_dataset.theta, fresh, params,
                                    small_dataset.dt)
    np.testing.assert_array_equal(p_o, small_dataset.p_o)


# ---------------------------------------------------------------------------
# model behaviour


def test_single_rule_pipeline_reduces_to_affine(rng):
    # epsilon = 1 disables the filter, single taps and one rule collapse the
    # pipeline to ridge regression on [1, theta, p_o]
    params = FprcParams(epsilon=1.0, n_u=1, n_y=1, n_c=1, alpha=1e-10)
    theta = rng.uniform(0.0, 60.0, size=400)
    p_o = rng.uniform(80.0, 300.0, size=400)
    p_exp = 3.0 * theta + 0.5 * p_o + 20.0
    ds = make_dataset(theta, p_exp, p_o=p_o)
    model = FprcTrainer(params, seed=0).fit([ds])
    yhat, y = model.evaluate(ds)
    np.testing.assert_allclose(yhat, y, atol=1e-4)
    X = np.column_stack([np.ones(400), theta, p_o])
    w = ridge_solve(X, p_exp, alpha=1e-10)
    np.testing.assert_allclose(model.ruleset.w_out[0], w, atol=1e-6)


def test_evaluate_matches_manual_inference(small_dataset, default_config):
    trainer = FprcTrainer(default_config.fprc_params(), seed=1)
    model = trainer.fit([small_dataset])
    yhat, y = model.evaluate(small_dataset)
    X, y2 = fprc_collect_training(small_dataset.theta, small_dataset.p_exp,
                                  p_o=small_dataset.p_o, params=model.params)
    np.testing.assert_array_equal(y, y2)
    np.testing.assert_array_equal(yhat, fuzzy_infer_batch(model.ruleset, X))
    assert yhat.shape == (len(small_dataset),)


def test_step_loop_matches_vectorized_evaluate(small_dataset, default_config):
    model = FprcTrainer(default_config.fprc_params(), seed=1).fit([small_dataset])
    yhat, _ = model.evaluate(small_dataset)
    ff = model.feedforward(default_config.build_reservoir())
    stepped = np.array([ff.step(th, small_dataset.dt)[0]
                        for th in small_dataset.theta])
    np.testing.assert_allclose(stepped, yhat, rtol=1e-10, atol=1e-10)


def test_step_reports_pipeline_signals(small_dataset, default_config):
    model = FprcTrainer(default_config.fprc_params(), seed=1).fit([small_dataset])
    ff = model.feedforward(default_config.build_reservoir())
    p_ff, p_i, p_o, p_filt = ff.step(30.0, 1 / 200)
    assert p_i == pytest.approx(convert_angle(30.0, model.params.k_in))
    assert p_filt == pytest.approx(p_o)  # first-sample filter init
    assert np.isfinite(p_ff)
    assert ff.kind == "fprc"


def test_fuzzy_linear_step_has_no_pressure_path(small_dataset, default_config):
    trainer = FprcTrainer(default_config.fprc_params(), seed=1,
                          reservoir_features=False)
    model = trainer.fit([small_dataset])
    assert model.kind == "fuzzy-linear"
    assert model.ruleset.state_dim == model.params.n_y
    ff = model.feedforward()
    p_ff, p_i, p_o, p_filt = ff.step(30.0, 1 / 200)
    assert (p_i, p_o, p_filt) == (0.0, 0.0, 0.0)
    assert np.isfinite(p_ff)


def test_feedforward_requires_reservoir(small_dataset, default_config):
    model = FprcTrainer(default_config.fprc_params(), seed=1).fit([small_dataset])
    with pytest.raises(InvalidSpecError):
        model.feedforward()


def test_model_dim_check():
    params = FprcParams(n_y=5, n_u=3)
    rs = FuzzyRuleSet(centers=np.zeros((1, 4)), w_out=np.zeros((1, 5)), sigma=1.0)
    with pytest.raises(DimensionError):
        FprcModel(params, rs)


def test_trainer_rejects_empty_fit(default_config):
    with pytest.raises(InvalidDataError):
        FprcTrainer(default_config.fprc_params()).fit([])


def test_trainer_fold_changes_clustering_seed(small_dataset, default_config):
    trainer = FprcTrainer(default_config.fprc_params(), seed=1)
    m0 = trainer.fit([small_dataset], fold=0)
    m0b = trainer.fit([small_dataset], fold=0)
    m1 = trainer.fit([small_dataset], fold=1)
    np.testing.assert_array_equal(m0.ruleset.centers, m0b.ruleset.centers)
    assert not np.array_equal(m0.ruleset.centers, m1.ruleset.centers)


# ---------------------------------------------------------------------------
# artifacts


def test_model_json_round_trip(tmp_path, small_dataset, default_config):
    model = FprcTrainer(default_config.fprc_params(), seed=1).fit([small_dataset])
    path = tmp_path / "model.json"
    model.save(path)
    loaded = FprcModel.load(path)
    assert loaded.kind == "fprc"
    assert loaded.params == model.params
    y1, _ = model.evaluate(small_dataset)
    y2, _ = loaded.evaluate(small_dataset)
    np.testing.assert_array_equal(y1, y2)


def test_fuzzy_linear_json_round_trip(tmp_path, small_dataset, default_config):
    trainer = FprcTrainer(default_config.fprc_params(), seed=1,
                          reservoir_features=False)
    model = trainer.fit([small_dataset])
    path = tmp_path / "model.json"
    model.save(path)
    loaded = FprcModel.load(path)
    assert loaded.kind == "fuzzy-linear"
    y1, _ = model.evaluate(small_dataset)
    y2, _ = loaded.evaluate(small_dataset)
    np.testing.assert_array_equal(y1, y2)


def test_model_load_rejects_unknown_format(tmp_path):
    path = tmp_path / "model.json"
    path.write_text('{"format_version": 99}\n')
    with pytest.raises(InvalidDataError, match="format"):
        FprcModel.load(path)


# ---------------------------------------------------------------------------
# weight analysis


def test_weight_analysis_shares(small_dataset, default_config):
    params = default_config.fprc_params().replace(n_c=2)
    shares = fprc_weight_analysis(small_dataset.theta, small_dataset.p_exp,
                                  small_dataset.p_o, params, seed=0)
    total = (shares["mean_bias_share"] + shares["mean_theta_share"]
             + shares["mean_reservoir_share"])
    assert total == pytest.approx(1.0)
    assert shares["per_rule"].shape == (2, 1 + params.n_y + params.n_u)
    assert shares["mean_reservoir_share"] > 0.0
