import os
import subprocess

import numpy as np
import pytest

import hpcpred


@pytest.fixture
def problem():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(200, 5))
    w = np.array([1.0, -2.0, 0.0, 0.5, 0.0])
    y = 1.5 + X @ w + 0.01 * rng.normal(size=200)
    return X, y, w


def test_ols_matches_lstsq(problem):
    X, y, _ = problem
    m = hpcpred.fit_ols(X, y)
    A = np.column_stack([np.ones(len(y)), X])
    ref = np.linalg.lstsq(A, y, rcond=None)[0]
    assert m.intercept == pytest.approx(ref[0], abs=1e-10)
    np.testing.assert_allclose(m.coef, ref[1:], atol=1e-10)
    np.testing.assert_allclose(m.predict(X), A @ ref, atol=1e-9)


def test_ridge_matches_closed_form(problem):
    X, y, _ = problem
    m = hpcpred.fit_ridge(X, y, alpha=3.0)
    Xc, yc = X - X.mean(0), y - y.mean()
    w = np.linalg.solve(Xc.T @ Xc + 3.0 * np.eye(X.shape[1]), Xc.T @ yc)
    np.testing.assert_allclose(m.coef, w, atol=1e-10)


def test_sparse_models_find_support(problem):
    X, y, w = problem
    lars = hpcpred.fit_lasso_lars_ic(X, y, "bic")
    assert set(np.flatnonzero(np.abs(lars.coef) > 1e-8)) >= set(np.flatnonzero(w))
    enet = hpcpred.fit_elastic_net_cv(X, y)
    assert "alpha" in enet.hyperparameters
    assert hpcpred.r_squared(y, enet.predict(X)) > 0.99
    with pytest.raises(ValueError):
        hpcpred.fit_lasso_lars_ic(X, y, "cp")


def test_classifiers_separate_easy_data():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(300, 3))
    y = (X[:, 0] + 0.2 * X[:, 1] > 0).astype(float)
    for model in (
        hpcpred.fit_logistic(X, y),
        hpcpred.fit_gnb(X, y),
        hpcpred.fit_random_forest(X, y, n_trees=15, seed=1),
        hpcpred.fit_cart_classifier(X, y, max_depth=4),
    ):
        assert hpcpred.accuracy(y, model.predict(X)) > 0.85
    a = hpcpred.fit_random_forest(X, y, n_trees=5, seed=9)
    b = hpcpred.fit_random_forest(X, y, n_trees=5, seed=9)
    np.testing.assert_array_equal(a.predict_proba(X), b.predict_proba(X))


def test_metrics():
    t = np.array([1.0, 0.0, 1.0, 1.0])
    p = np.array([1.0, 1.0, 0.0, 1.0])
    assert hpcpred.precision(t, p) == pytest.approx(2 / 3)
    assert hpcpred.recall(t, p) == pytest.approx(2 / 3)
    assert hpcpred.f1_score(t, p) == pytest.approx(2 / 3)


def test_errors_map_to_exception():
    X = np.ones((4, 2))
    with pytest.raises(hpcpred.HpcpredError):
        hpcpred.fit_gnb(X, np.zeros(4))


def test_workload_and_inprocess_cli(tmp_path):
    acc, roles, n = hpcpred.generate_workload(n_users=4, jobs_per_user=50, seed=3)
    assert n == 200
    assert sum(1 for line in acc.splitlines() if line and not line.startswith("#")) == 200
    (tmp_path / "accounting").write_text(acc)
    (tmp_path / "roles").write_text(roles)
    code, out, err = hpcpred.run_cli(["ingest", "--in", str(tmp_path), "--min-jobs", "1"])
    assert code == 0, err
    assert len(out.strip().splitlines()) == 201
    assert hpcpred.run_cli(["bogus"])[0] == 1


@pytest.mark.skipif("HPCPRED_CLI" not in os.environ, reason="CLI binary path not provided")
def test_cli_binary_evaluate(tmp_path):
    cli = os.environ["HPCPRED_CLI"]
    subprocess.run([cli, "synth", "--out", str(tmp_path / "w"), "--users", "6", "--jobs-per-user", "80"],
                   check=True, capture_output=True)
    r = subprocess.run([cli, "evaluate", "--in", str(tmp_path / "w"), "--tasks", "failure_classification",
                        "--n-trees", "5", "--min-jobs", "1", "--timing", "off", "--format", "csv"],
                       check=True, capture_output=True, text=True)
    rows = [line for line in r.stdout.splitlines() if line.strip() and not line.startswith("#")]
    assert len(rows) == 1 + 8
