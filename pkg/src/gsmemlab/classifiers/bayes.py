from dataclasses import dataclass

import numpy as np

from .base import EPS, sigmoid


@dataclass(frozen=True, eq=False)
class NaiveBayesModel:
    """Gaussian naive Bayes; row 0 is benign, row 1 attack."""

    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    tag = "NBC"

    def log_joint(self, x):
        x = np.asarray(x, dtype=np.float64)
        out = np.empty((x.shape[0], 2))
        for c in range(2):
            var = self.variances[c]
            ll = -0.5 * np.log(2.0 * np.pi * var) - (x - self.means[c]) ** 2 / (2.0 * var)
            out[:, c] = np.log(self.priors[c]) + ll.sum(axis=1)
        return out

    def posteriors(self, x):
        """``(n, 2)`` array of P(benign|x), P(attack|x)."""
        lj = self.log_joint(x)
        attack = sigmoid(lj[:, 1] - lj[:, 0])
        benign = sigmoid(lj[:, 0] - lj[:, 1])
        return np.column_stack([benign, attack])

    def scores(self, x):
        lj = self.log_joint(x)
        return sigmoid(lj[:, 1] - lj[:, 0])

    def params(self):
        return {"priors": self.priors.tolist(), "means": self.means.tolist(),
                "variances": self.variances.tolist()}

    @classmethod
    def from_params(cls, p):
        return cls(*(np.array(p[k], dtype=np.float64) for k in ("priors", "means", "variances")))


def train_naive_bayes(config, x, y):
    priors = np.empty(2)
    means = np.empty((2, x.shape[1]))
    variances = np.empty((2, x.shape[1]))
    for c in range(2):
        xc = x[y == c]
        priors[c] = xc.shape[0] / x.shape[0]
        means[c] = xc.mean(axis=0)
        variances[c] = np.maximum(((xc - means[c]) ** 2).mean(axis=0), EPS)
    return NaiveBayesModel(priors, means, variances)
