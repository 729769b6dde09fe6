"""Unified train / predict interface over the six detector families.

>>> model = train(TrainConfig.for_algorithm("NBC"), train_set)   # doctest: +SKIP
>>> predict(model, FeatureVector(850e6, 2.1))                    # doctest: +SKIP
Prediction(label=<Label.ATTACK: 1>, score=0.99...)
"""

import json

import numpy as np

from ..dataset import FeatureVector, Label
from ..errors import ParseError, TrainingError
from . import linear, neural
from .base import (ALGORITHMS, EPS, TAGS, Prediction, Scaler, TrainConfig,
                   apply_scaler, check_finite, fit_scaler)
from .bayes import NaiveBayesModel, train_naive_bayes
from .linear import LinearSVMModel, LogisticModel, train_logistic, train_svm
from .neural import NeuralNetModel, train_neural_net
from .trees import (BoostedTreesModel, DecisionTreeModel, RandomForestModel, Tree,
                    train_boosted_trees, train_decision_tree, train_random_forest)

__all__ = [
    "ALGORITHMS", "TAGS", "EPS", "TrainConfig", "Scaler", "Prediction",
    "fit_scaler", "apply_scaler", "train", "predict", "predict_scores",
    "gradient_check", "dumps_model", "loads_model", "save_model", "load_model",
    "LogisticModel", "LinearSVMModel", "NaiveBayesModel", "DecisionTreeModel",
    "RandomForestModel", "BoostedTreesModel", "NeuralNetModel", "Tree",
]

_TRAINERS = {
    "LR": train_logistic,
    "SVM": train_svm,
    "NBC": train_naive_bayes,
    "DT": train_decision_tree,
    "RF": train_random_forest,
    "BT": train_boosted_trees,
    "BPNN": train_neural_net,
}

_MODELS = {cls.tag: cls for cls in (LogisticModel, LinearSVMModel, NaiveBayesModel,
                                    DecisionTreeModel, RandomForestModel,
                                    BoostedTreesModel, NeuralNetModel)}

MODEL_FORMAT = "gsmemlab-model"
MODEL_VERSION = 1


def train(config, train_set):
    """Fit the model family named by ``config.algorithm`` on ``train_set``."""
    x = train_set.features
    y = train_set.labels.astype(np.int64)
    counts = np.bincount(y, minlength=2)
    if counts[Label.BENIGN] == 0 or counts[Label.ATTACK] == 0:
        raise TrainingError(
            f"training set needs both classes (benign={counts[0]}, attack={counts[1]})")
    model = _TRAINERS[config.algorithm](config, x, y)
    # remember the config so persisted models are self-describing
    object.__setattr__(model, "config", config)
    return model


def predict_scores(model, x):
    """Attack scores in [0, 1] for every row of an ``(n, 2)`` array."""
    x = check_finite(np.asarray(x, dtype=np.float64).reshape(-1, 2))
    return np.clip(model.scores(x), 0.0, 1.0)


def predict_labels(model, x):
    return (predict_scores(model, x) > 0.5).astype(np.int8)


def predict(model, features):
    fv = FeatureVector(*features)
    return Prediction.from_score(predict_scores(model, np.array([fv], dtype=np.float64))[0])


def gradient_check(config, train_set, step=1e-5):
    """Worst relative gap between analytic and central-difference gradients.

    Evaluated for LR or BPNN at a random parameter point drawn from
    ``config.seed``, on standardised features.
    """
    if config.algorithm not in ("LR", "BPNN"):
        raise ValueError("gradient_check supports LR and BPNN only")
    rng = np.random.default_rng(config.seed)
    x = Scaler.fit(train_set.features).apply(train_set.features)
    y = train_set.labels.astype(np.float64)
    reg = config.regularization
    d = x.shape[1]

    if config.algorithm == "LR":
        theta = rng.normal(0.0, 1.0, d + 1)

        def loss(t):
            return linear.logistic_loss_grad(t[:d], t[d], x, y, reg)[0]

        _, gw, gb = linear.logistic_loss_grad(theta[:d], theta[d], x, y, reg)
        analytic = np.concatenate([gw, [gb]])
    else:
        h = config.hidden
        shapes = [(d, h), (h,), (h,), ()]
        sizes = [int(np.prod(s)) for s in shapes]
        theta = rng.normal(0.0, 1.0, sum(sizes))

        def unpack(t):
            parts, at = [], 0
            for shape, size in zip(shapes, sizes):
                chunk = t[at:at + size]
                parts.append(chunk.reshape(shape) if shape else float(chunk[0]))
                at += size
            return parts

        def loss(t):
            return neural.loss_grad(*unpack(t), x, y, reg)[0]

        _, grads = neural.loss_grad(*unpack(theta), x, y, reg)
        analytic = np.concatenate([np.ravel(g) for g in grads])

    numeric = np.empty_like(theta)
    for i in range(theta.size):
        up = theta.copy()
        dn = theta.copy()
        up[i] += step
        dn[i] -= step
        numeric[i] = (loss(up) - loss(dn)) / (2.0 * step)
    rel = np.abs(analytic - numeric) / np.maximum(1e-8, np.abs(analytic) + np.abs(numeric))
    return float(rel.max())


def dumps_model(model):
    """JSON document with tag, hyperparameters and every parameter.

    Floats are written with ``repr`` precision, so loading reproduces
    predictions exactly.
    """
    config = getattr(model, "config", None)
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "algorithm": model.tag,
        "config": None if config is None else config.to_dict(),
        "params": model.params(),
    }
    return json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n"


def loads_model(text, path=None):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ParseError("not a gsmemlab model document", path)
    tag = doc.get("algorithm")
    if tag not in _MODELS:
        raise ParseError(f"unknown algorithm {tag!r}", path)
    try:
        model = _MODELS[tag].from_params(doc["params"])
        config = None if doc.get("config") is None else TrainConfig.from_dict(doc["config"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad {tag} parameters: {exc}", path) from None
    object.__setattr__(model, "config", config)
    return model


def save_model(model, path):
    with open(path, "w") as fh:
        fh.write(dumps_model(model))


def load_model(path):
    with open(path) as fh:
        return loads_model(fh.read(), path)
