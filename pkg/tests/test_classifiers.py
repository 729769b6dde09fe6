import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gsmemlab import classifiers as C
from gsmemlab import dataset as ds
from gsmemlab.classifiers import trees
from gsmemlab.errors import ParseError, TrainingError

from oracles import best_tree_gini, separating_line_exists

ALL = C.TAGS


def cfg(tag, **kw):
    return C.TrainConfig.for_algorithm(tag, **kw)


# -- scaler ----------------------------------------------------------------

def test_scaler_constant_column_maps_to_zero():
    d = ds.Dataset([[850e6, 1.0], [850e6, 3.0]], [0, 1])
    s = C.fit_scaler(d)
    assert np.all(C.apply_scaler(s, d.features)[:, 0] == 0.0)
    assert s.std[0] == C.EPS


def test_scaler_standardised_input_unchanged():
    d = ds.Dataset([[-1.0, 1.0], [1.0, 1.0]], [0, 1])
    out = C.apply_scaler(C.fit_scaler(d), d.features)
    assert out[:, 0].tolist() == [-1.0, 1.0]


def test_scaler_maps_mean_to_zero(small_data):
    s = C.fit_scaler(small_data)
    assert np.allclose(s.apply(small_data.features.mean(axis=0)), 0.0, atol=1e-12)


# -- config ----------------------------------------------------------------

@pytest.mark.parametrize("kw", [dict(algorithm="KNN"), dict(algorithm="LR", epochs=0),
                                dict(algorithm="LR", learning_rate=0.0),
                                dict(algorithm="LR", regularization=-1.0),
                                dict(algorithm="RF", n_trees=0)])
def test_train_config_validation(kw):
    with pytest.raises(ValueError):
        C.TrainConfig(**kw)


def test_single_class_training_rejected():
    d = ds.Dataset([[1.0, 1.0], [2.0, 2.0]], [1, 1])
    for tag in ALL:
        with pytest.raises(TrainingError):
            C.train(cfg(tag), d)


# -- per-family behaviour --------------------------------------------------

def test_naive_bayes_hand_estimates():
    d = ds.Dataset([[0, 0], [0, 2], [4, 0], [4, 2]], [0, 0, 1, 1])
    m = C.train(cfg("NBC"), d)
    assert m.means.tolist() == [[0.0, 1.0], [4.0, 1.0]]
    assert m.variances.tolist() == [[C.EPS, 1.0], [C.EPS, 1.0]]
    assert m.priors.tolist() == [0.5, 0.5]


def test_naive_bayes_tie_goes_benign():
    d = ds.Dataset([[0, 0], [0, 2], [2, 0], [2, 2], [1, 5], [1, 7], [3, 5], [3, 7]],
                   [0, 0, 0, 0, 1, 1, 1, 1])
    m = C.train(cfg("NBC"), d)
    # equal priors and equal variances: the midpoint is equally likely under both
    p = C.predict(m, (1.5, 3.5))
    assert p.score == 0.5
    assert p.label is ds.Label.BENIGN


@settings(max_examples=50, deadline=None)
@given(st.floats(-1e9, 2e9), st.floats(0, 10))
def test_naive_bayes_posteriors_sum_to_one(default_split, f, a):
    m = C.train(cfg("NBC"), default_split[0])
    post = m.posteriors(np.array([[f, a]]))
    assert abs(post.sum() - 1.0) <= 1e-9


def test_logistic_separable_reaches_full_accuracy():
    x = np.array([[0.0, 0.0], [1.0, 0.2], [2.0, 3.0], [3.0, 2.5]])
    y = np.array([0, 0, 1, 1])
    assert separating_line_exists(x, y)
    m = C.train(cfg("LR", regularization=0.0, epochs=2000, learning_rate=1.0), ds.Dataset(x, y))
    assert np.array_equal(C.predict_labels(m, x), y)


def test_depth_zero_tree_is_majority_leaf():
    x = np.column_stack([np.arange(10.0), np.arange(10.0)])
    y = [0] * 9 + [1]
    m = C.train(cfg("DT", max_depth=0), ds.Dataset(x, y))
    for point in [(0.0, 0.0), (9.0, 9.0), (-5.0, 100.0)]:
        p = C.predict(m, point)
        assert p.label is ds.Label.BENIGN and p.score == pytest.approx(0.1)


def test_boosting_zero_rounds_is_constant(small_data):
    m = C.train(cfg("BT", rounds=0), small_data)
    s = C.predict_scores(m, small_data.features)
    assert np.all(s == 1.0 / (1.0 + np.exp(-m.init_log_odds)))
    assert s[0] == pytest.approx(0.5)


def test_boosting_loss_non_increasing(default_split):
    tr = default_split[0]
    m = C.train(cfg("BT", rounds=30, shrinkage=0.5, max_depth=2), tr)
    y = tr.labels.astype(float)
    losses = [trees.logistic_loss(f, y) for f in m.staged_log_odds(tr.features)]
    assert len(losses) == 31
    assert all(b <= a for a, b in zip(losses, losses[1:]))


def test_forest_single_tree_matches_decision_tree(default_split):
    tr, te = default_split
    dt = C.train(cfg("DT", max_depth=4), tr)
    rf = C.train(cfg("RF", n_trees=1, bootstrap=False, max_features=2, max_depth=4), tr)
    (t,) = rf.trees
    for k in ("feature", "threshold", "left", "right", "value"):
        assert np.array_equal(getattr(t, k), getattr(dt.tree, k))
    assert np.array_equal(C.predict_labels(rf, te.features), C.predict_labels(dt, te.features))


def _tiny(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    x = np.column_stack([rng.permutation(n), rng.permutation(n)]).astype(float)
    x += rng.uniform(0, 0.5, x.shape)
    y = rng.integers(0, 2, n)
    y[0], y[1] = 0, 1
    return x, y


@pytest.mark.parametrize("seed", range(25))
@pytest.mark.parametrize("depth", [1, 2])
def test_tiny_tree_matches_brute_force(seed, depth):
    x, y = _tiny(seed)
    m = C.train(cfg("DT", max_depth=depth), ds.Dataset(x, y))
    assert m.tree.depth() <= depth
    assert trees.training_gini(m.tree) == pytest.approx(float(best_tree_gini(x, y, depth)), abs=1e-9)


def test_xor_needs_lookahead():
    x = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
    y = np.array([0, 0, 1, 1])
    greedy = trees.build_classification_tree(x, y, 2, lookahead=False)
    assert greedy.n_nodes == 1
    m = C.train(cfg("DT", max_depth=2), ds.Dataset(x, y))
    assert np.array_equal(C.predict_labels(m, x), y)


@pytest.mark.parametrize("seed", range(10))
def test_every_split_lowers_gini(seed):
    rng = np.random.default_rng(seed)
    x = np.abs(rng.normal(size=(60, 2)))
    y = (x[:, 0] + 0.5 * rng.normal(size=60) > 0.8).astype(int)
    t = C.train(cfg("DT", max_depth=5), ds.Dataset(x, y)).tree
    assert t.depth() <= 5

    def subtree_gini(node):
        if t.feature[node] < 0:
            n = t.n_samples[node]
            a = round(t.value[node] * n)
            return n - (a * a + (n - a) ** 2) / n
        return subtree_gini(t.left[node]) + subtree_gini(t.right[node])

    for node in np.flatnonzero(t.feature >= 0):
        n = t.n_samples[node]
        a = round(t.value[node] * n)
        assert subtree_gini(node) < n - (a * a + (n - a) ** 2) / n
        assert t.left[node] >= 0 and t.right[node] >= 0


# -- shared contract -------------------------------------------------------

@pytest.fixture(scope="module")
def trained(default_split):
    tr = default_split[0]
    fast = {"LR": dict(epochs=100), "BPNN": dict(epochs=20), "RF": dict(n_trees=5),
            "BT": dict(rounds=10), "SVM": dict(epochs=5)}
    return {tag: C.train(cfg(tag, seed=5, **fast.get(tag, {})), tr) for tag in ALL}


@pytest.mark.parametrize("tag", ALL)
def test_scores_in_unit_interval_and_label_rule(trained, tag):
    rng = np.random.default_rng(0)
    x = np.column_stack([rng.uniform(0, 2e9, 500), rng.uniform(0, 6, 500)])
    m = trained[tag]
    s = C.predict_scores(m, x)
    assert np.all((s >= 0) & (s <= 1))
    for row, score in zip(x[:50], s[:50]):
        p = C.predict(m, row)
        # single-row and batched BLAS calls may differ in the last ulp
        assert p.score == pytest.approx(score, rel=1e-12, abs=1e-15)
        assert (p.label is ds.Label.ATTACK) == (p.score > 0.5)


@pytest.mark.parametrize("tag", ALL)
def test_training_is_deterministic(default_split, trained, tag):
    again = C.train(trained[tag].config, default_split[0])
    assert C.dumps_model(again) == C.dumps_model(trained[tag])


@pytest.mark.parametrize("tag", ALL)
def test_persistence_round_trip(tmp_path, trained, default_split, tag):
    m = trained[tag]
    path = tmp_path / f"{tag}.json"
    C.save_model(m, path)
    loaded = C.load_model(path)
    x = default_split[1].features
    assert np.array_equal(C.predict_scores(loaded, x), C.predict_scores(m, x))
    assert loaded.config == m.config
    assert C.dumps_model(loaded) == path.read_text()


def test_load_model_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  nope")
    with pytest.raises(ParseError) as err:
        C.load_model(bad)
    assert err.value.line == 2
    bad.write_text('{"format": "gsmemlab-model", "algorithm": "KNN", "params": {}}')
    with pytest.raises(ParseError):
        C.load_model(bad)


@pytest.mark.parametrize("tag", ALL)
def test_predict_rejects_non_finite(trained, tag):
    with pytest.raises(ValueError):
        C.predict(trained[tag], (float("nan"), 1.0))
    with pytest.raises(ValueError):
        C.predict(trained[tag], (850e6, float("inf")))


# -- gradient checks --------------------------------------------------------

def test_gradient_check_logistic(small_data):
    assert C.gradient_check(cfg("LR", regularization=0.01, seed=3), small_data) <= 1e-6


@pytest.mark.parametrize("hidden", [1, 3, 8])
def test_gradient_check_neural(small_data, hidden):
    assert C.gradient_check(cfg("BPNN", hidden=hidden, regularization=0.01, seed=4),
                            small_data) <= 1e-4


def test_symmetric_data_zero_bias_gradient():
    from gsmemlab.classifiers.linear import logistic_loss_grad
    x = np.array([[-1.0, 2.0], [1.0, -2.0], [-1.0, -2.0], [1.0, 2.0]])
    y = np.array([0.0, 1.0, 0.0, 1.0])
    _, _, gb = logistic_loss_grad(np.zeros(2), 0.0, x, y, 0.0)
    assert gb == 0.0


def test_gradient_check_rejects_other_algorithms(small_data):
    with pytest.raises(ValueError):
        C.gradient_check(cfg("SVM"), small_data)
