"""Sklearn-facing estimator wrapper."""

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.model_selection import cross_val_score
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from prune_lab.data import gen_synthetic
from prune_lab.estimator import PrunedMLPClassifier


@pytest.fixture(scope="module")
def xy():
    ds = gen_synthetic("gaussians", 300, 0.4, seed=5, classes=3)
    return ds.features, ds.labels


def make_clf(**kwargs):
    defaults = dict(hidden_layer_sizes=(16,), epochs=8, batch_size=32,
                    lr_max=0.05, final_sparsity=0.8, random_state=0)
    defaults.update(kwargs)
    return PrunedMLPClassifier(**defaults)


def test_fit_predict_shapes(xy):
    X, y = xy
    clf = make_clf().fit(X, y)
    pred = clf.predict(X)
    assert pred.shape == y.shape
    assert set(pred) <= set(clf.classes_)
    proba = clf.predict_proba(X[:5])
    assert proba.shape == (5, 3)
    assert np.allclose(proba.sum(axis=1), 1.0)


def test_reaches_target_sparsity(xy):
    X, y = xy
    clf = make_clf(final_sparsity=0.9).fit(X, y)
    total = sum(l.weight.size for l in clf.network_.layers)
    assert clf.sparsity_ == np.floor(0.9 * total) / total


def test_get_params_round_trip(xy):
    clf = make_clf(schedule="agp", final_sparsity=0.7)
    params = clf.get_params()
    assert params["schedule"] == "agp"
    cloned = clone(clf)
    assert cloned.get_params() == params


def test_deterministic_given_random_state(xy):
    X, y = xy
    a = make_clf().fit(X, y)
    b = make_clf().fit(X, y)
    for la, lb in zip(a.network_.layers, b.network_.layers):
        assert np.array_equal(la.weight, lb.weight)


def test_composes_with_pipeline_and_cv(xy):
    X, y = xy
    pipe = make_pipeline(StandardScaler(), make_clf(epochs=5))
    scores = cross_val_score(pipe, X, y, cv=3)
    assert scores.shape == (3,)
    assert scores.mean() > 0.5  # well-separated blobs


def test_non_contiguous_labels(xy):
    X, y = xy
    relabeled = np.array([10, 20, 30])[y]
    clf = make_clf().fit(X, relabeled)
    assert set(clf.classes_) == {10, 20, 30}
    assert set(clf.predict(X[:20])) <= {10, 20, 30}
