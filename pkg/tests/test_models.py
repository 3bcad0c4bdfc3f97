import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signrel.datasets import karate_paths
from signrel.errors import DegenerateTrainingError, ModelError, UndefinedScoreError
from signrel.graph import ingest_interactions, make_relations
from signrel.models import (
    FitResult,
    FitSpec,
    TrainingSet,
    assemble_training_set,
    fit,
    logistic_gradient,
    logistic_loglik,
    modularity_matrix,
    modularity_score,
    ordered_negloglik,
    ordered_unpack,
    predict,
)


def _ts(X, y, predictor="phi"):
    X = np.asarray(X, dtype=float)
    return TrainingSet(X=X, y=np.asarray(y, dtype=float), dyads=tuple(("a", str(i)) for i in range(len(y))),
                       predictor=predictor)


def _central(f, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


@pytest.mark.parametrize("seed", range(5))
def test_logistic_gradient_matches_differences(seed):
    rng = np.random.default_rng(seed)
    Xd = np.column_stack([np.ones(30), rng.random((30, 2))])
    y = (rng.random(30) < 0.4).astype(float)
    beta = rng.normal(size=3)
    num = _central(lambda b: logistic_loglik(b, Xd, y, 0.1), beta)
    np.testing.assert_allclose(logistic_gradient(beta, Xd, y, 0.1), num, rtol=1e-6, atol=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_ordered_gradient_matches_differences(seed):
    rng = np.random.default_rng(seed)
    K = 4
    X = rng.random((40, 2))
    y = rng.integers(1, K + 1, 40).astype(float)
    params = rng.normal(size=K - 1 + 2)
    num = _central(lambda p: ordered_negloglik(p, X, y, K, 0.05)[0], params)
    np.testing.assert_allclose(ordered_negloglik(params, X, y, K, 0.05)[1], num, rtol=1e-6, atol=1e-7)


@settings(max_examples=100)
@given(st.lists(st.floats(-30, 30), min_size=5, max_size=5))
def test_cutpoints_always_increasing(params):
    theta, beta = ordered_unpack(np.array(params), 4)
    assert np.all(np.diff(theta) > 0)
    assert len(beta) == 2


def test_logistic_converges_on_overlapping_classes():
    rng = np.random.default_rng(1)
    X = rng.random((200, 2))
    y = (rng.random(200) < 0.2 + 0.6 * X[:, 0]).astype(float)
    spec = FitSpec()
    res = fit(spec, _ts(X, y))
    assert res.converged and not res.separated
    assert res.grad_norm < spec.tol * 200
    assert res.coef["a"] > 0


def test_linear_recovery_and_orthogonal_residuals():
    rng = np.random.default_rng(2)
    X = rng.random((400, 2))
    y = 0.3 * X[:, 0] - 0.1 * X[:, 1] + 0.05 + rng.normal(0, 0.01, 400)
    res = fit(FitSpec(response="linear"), _ts(X, y))
    se = res.std_errors
    assert abs(res.coef["a"] - 0.3) < 3 * se["a"]
    assert abs(res.coef["b"] + 0.1) < 3 * se["b"]
    assert abs(res.intercept - 0.05) < 3 * se["c"]
    resid = y - predict(res, X).values
    Xd = np.column_stack([np.ones(400), X])
    assert np.max(np.abs(Xd.T @ resid)) < 1e-9


def test_separation_is_flagged_and_finite():
    X = np.array([[0.1, 0.9], [0.2, 0.8], [0.3, 0.7], [0.7, 0.2], [0.8, 0.1], [0.9, 0.05]])
    y = [0, 0, 0, 1, 1, 1]
    res = fit(FitSpec(), _ts(X, y))
    assert res.separated
    assert res.ridge == pytest.approx(1e-4)
    assert all(np.isfinite(v) for v in res.coef.values())
    assert np.array_equal(predict(res, X).classes, y)


def test_ordered_fit_recovers_direction():
    rng = np.random.default_rng(4)
    X = rng.random((300, 2))
    latent = 4.0 * X[:, 0] - 2.0 * X[:, 1] + rng.logistic(size=300)
    y = 1 + np.digitize(latent, [0.0, 1.0, 2.0])
    res = fit(FitSpec(response="ordered", levels=4), _ts(X, y))
    assert res.coef["a"] > 0 > res.coef["b"]
    assert np.all(np.diff(res.cutpoints) > 0)
    cls = predict(res, X).classes
    assert set(np.unique(cls)) <= {1, 2, 3, 4}
    assert np.mean(cls == y) > 0.4


def test_ordered_prediction_uses_cutpoints():
    res = FitResult(predictor="phi", response="ordered", coef={"a": 1.0, "b": 0.0}, intercept=0.0,
                    cutpoints=(0.2, 0.5, 0.8), levels=4)
    X = np.array([[0.0, 0], [0.3, 0], [0.6, 0], [0.95, 0]])
    assert list(predict(res, X).classes) == [1, 2, 3, 4]


def test_null_logistic_predicts_half():
    res = FitResult(predictor="phi", response="logistic", coef={"a": 0.0, "b": 0.0}, intercept=0.0)
    out = predict(res, np.random.default_rng(0).random((10, 2)))
    assert np.all(out.values == 0.5)


def test_prediction_monotone_in_p_under():
    res = FitResult(predictor="phi", response="logistic", coef={"a": 2.5, "b": -1.0}, intercept=-0.3)
    grid = np.column_stack([np.linspace(0, 1, 50), np.full(50, 0.3)])
    assert np.all(np.diff(predict(res, grid).values) >= 0)


def test_feature_kind_mismatch():
    res = FitResult(predictor="phi", response="logistic", coef={"a": 1.0, "b": -1.0}, intercept=0.0)
    with pytest.raises(ModelError):
        predict(res, np.zeros((3, 2)), predictor="threshold")
    with pytest.raises(ModelError):
        predict(res, np.zeros((3, 3)))
    with pytest.raises(ModelError):
        fit(FitSpec(predictor="threshold"), _ts(np.zeros((4, 2)), [0, 1, 0, 1]))


def test_fit_result_json_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    X = rng.random((50, 2))
    y = (X[:, 0] + rng.normal(0, 0.3, 50) > 0.5).astype(float)
    spec = FitSpec()
    res = fit(spec, _ts(X, y))
    p = tmp_path / "fit.json"
    res.to_json(p, spec)
    back = FitResult.from_json(p)
    assert back.coef == res.coef and back.intercept == res.intercept
    assert back.training_digest == res.training_digest


def test_modularity_arithmetic():
    # A_vw = 3, k_out(v) = 4, k_in(w) = 5, m = 10
    g = ingest_interactions(
        [("v", "w", None, 3), ("v", "x"), ("y", "w", None, 2), ("y", "z", None, 4)], directed=True
    )
    assert g.m == 10
    assert modularity_score(g, "v", "w") == pytest.approx(1.0)
    assert modularity_matrix(g).sum() == pytest.approx(0.0, abs=1e-12)


def test_modularity_empty_graph():
    g = ingest_interactions([], nodes=["a", "b"])
    with pytest.raises(UndefinedScoreError):
        modularity_score(g, "a", "b")


def test_karate_modularity_by_hand(karate):
    g, _ = karate
    deg, weight = {}, {}
    total = 0
    with open(karate_paths()["edges"], newline="") as fh:
        for row in csv.DictReader(fh):
            w = int(row["weight"])
            for v in (row["source"], row["target"]):
                deg[v] = deg.get(v, 0) + w
            weight[frozenset((row["source"], row["target"]))] = w
            total += w
    a = weight.get(frozenset(("1", "34")), 0)
    expected = a - deg["1"] * deg["34"] / (2 * total)
    assert modularity_score(g, "1", "34") == pytest.approx(expected, rel=1e-12)
    assert modularity_matrix(g).sum() == pytest.approx(0.0, abs=1e-9)


def test_binary_training_set_uses_unlabelled_pairs_as_negatives():
    g = ingest_interactions([("a", "b", None, 4), ("b", "c"), ("c", "d", None, 2), ("a", "d")])
    lab = make_relations({("a", "b"): 1, ("c", "d"): 1}, "binary", surveyed=["a", "b", "c", "d"])
    ts = assemble_training_set(lab, g, predictor="threshold")
    assert len(ts) == 6
    assert ts.y.sum() == 2
    lab = make_relations({}, "binary", surveyed=["a", "b"])
    with pytest.raises(DegenerateTrainingError):
        assemble_training_set(lab, g, predictor="threshold")
