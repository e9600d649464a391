import numpy as np
import pytest

from cropyield.models.knn import fit_knn

from oracles import knn_bruteforce


def test_k1_returns_own_target(rng):
    X = rng.normal(size=(25, 6))
    y = rng.normal(size=25)
    m = fit_knn(X, y, k=1)
    assert np.array_equal(m.predict(X), y)


def test_k_equals_n_gives_mean(rng):
    X = rng.normal(size=(12, 6))
    y = rng.normal(size=12)
    pred = fit_knn(X, y, k=12).predict(rng.normal(size=(4, 6)))
    assert np.allclose(pred, y.mean(), rtol=0, atol=1e-12)


def test_matches_bruteforce_oracle():
    rng = np.random.default_rng(77)
    for trial in range(50):
        n = 20
        # half the instances on a coarse grid so exact distance ties occur
        if trial % 2:
            X = rng.integers(0, 3, size=(n, 6)).astype(float)
            Q = rng.integers(0, 3, size=(7, 6)).astype(float)
        else:
            X = rng.normal(size=(n, 6))
            Q = rng.normal(size=(7, 6))
        y = rng.normal(size=n)
        k = int(rng.integers(1, 6))
        assert np.array_equal(fit_knn(X, y, k=k).predict(Q), knn_bruteforce(X, y, Q, k))


def test_ties_go_to_lower_index():
    X = np.array([[1.0], [-1.0], [1.0]])
    y = np.array([10.0, 20.0, 30.0])
    m = fit_knn(X, y, k=1)
    # rows 0 and 1 are both at distance 1 from the origin; row 0 wins
    assert m.neighbors(np.array([[0.0]])).tolist() == [[0]]
    assert m.predict(np.array([[0.0]])).tolist() == [10.0]
    assert fit_knn(X, y, k=2).neighbors(np.array([[0.0]])).tolist() == [[0, 1]]


def test_scaling():
    X = np.array([[0.0, 1000.0, 5.0], [1.0, 0.0, 5.0], [2.0, 500.0, 5.0]])
    y = np.array([1.0, 2.0, 3.0])
    m = fit_knn(X, y, k=1, scale=True)
    assert np.allclose(m.X.mean(axis=0), 0, atol=1e-12)
    assert np.allclose(m.X[:, :2].std(axis=0), 1)
    assert np.all(m.X[:, 2] == 0)  # constant feature left at zero
    assert m.predict(X).tolist() == y.tolist()


def test_prediction_within_target_range(rng):
    X = rng.normal(size=(40, 6))
    y = rng.uniform(10, 20, size=40)
    pred = fit_knn(X, y, k=4).predict(rng.normal(size=(30, 6)) * 5)
    assert pred.min() >= y.min() and pred.max() <= y.max()


def test_k_validation(rng):
    X, y = rng.normal(size=(3, 6)), rng.normal(size=3)
    with pytest.raises(ValueError, match="k must be ≥ 1"):
        fit_knn(X, y, k=0)
    with pytest.raises(ValueError, match="exceeds"):
        fit_knn(X, y, k=4)
