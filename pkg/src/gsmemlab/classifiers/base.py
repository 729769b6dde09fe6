from dataclasses import asdict, dataclass, fields
from typing import NamedTuple

import numpy as np

from ..dataset import Label

EPS = 1e-9

ALGORITHMS = ("LR", "RF", "SVM", "BT", "BPNN", "NBC")
# DT is a single CART tree; not part of the comparison roster but trainable
TAGS = ALGORITHMS + ("DT",)

# hyperparameters that differ from the TrainConfig field defaults
ALGORITHM_DEFAULTS = {
    "LR": {"learning_rate": 0.5, "epochs": 500},
    "SVM": {"learning_rate": 1.0, "epochs": 50, "regularization": 1e-3},
    "RF": {"n_trees": 30, "max_depth": 6, "max_features": 1},
    "DT": {"max_depth": 6, "max_features": 2},
    "BT": {"rounds": 50, "max_depth": 3, "shrinkage": 0.1},
    "BPNN": {"learning_rate": 0.1, "epochs": 500, "hidden": 8},
    "NBC": {},
}


def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for one training run.

    Fields irrelevant to ``algorithm`` are carried along but ignored.
    ``max_depth`` and ``rounds`` may be 0 (a single leaf / the constant
    log-odds model).
    """

    algorithm: str
    learning_rate: float = 0.1
    epochs: int = 500
    regularization: float = 0.0
    batch_size: int = 32
    hidden: int = 8
    n_trees: int = 30
    max_depth: int = 5
    max_features: int = 2
    bootstrap: bool = True
    rounds: int = 50
    shrinkage: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in TAGS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {TAGS}")
        for name in ("epochs", "batch_size", "hidden", "n_trees", "max_features"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("max_depth", "rounds"):
            if int(getattr(self, name)) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not (self.learning_rate > 0 and self.shrinkage > 0):
            raise ValueError("learning_rate and shrinkage must be > 0")
        if not self.regularization >= 0:
            raise ValueError("regularization must be >= 0")

    @classmethod
    def for_algorithm(cls, algorithm, **overrides):
        """Config with the per-algorithm defaults, then ``overrides``."""
        if algorithm not in TAGS:
            raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {TAGS}")
        params = dict(ALGORITHM_DEFAULTS[algorithm])
        params.update(overrides)
        return cls(algorithm=algorithm, **params)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown TrainConfig field(s): {', '.join(sorted(unknown))}")
        return cls(**d)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class Scaler:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[0] == 0:
            raise ValueError("cannot fit a scaler on no samples")
        return cls(x.mean(axis=0), np.maximum(x.std(axis=0), EPS))

    def apply(self, x):
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std

    def to_dict(self):
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["mean"], dtype=np.float64), np.array(d["std"], dtype=np.float64))


def fit_scaler(train):
    return Scaler.fit(train.features)


def apply_scaler(scaler, features):
    return scaler.apply(features)


class Prediction(NamedTuple):
    label: Label
    score: float

    @classmethod
    def from_score(cls, score):
        score = float(score)
        return cls(Label.ATTACK if score > 0.5 else Label.BENIGN, score)


def check_finite(x):
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    return x

