"""Logistic regression and linear SVM on standardised features."""

from dataclasses import dataclass

import numpy as np

from .base import Scaler, sigmoid


def logistic_loss_grad(w, b, x, y, reg):
    """Mean cross-entropy plus ``reg/2 * |w|^2``, and its gradient.

    Returns ``(loss, grad_w, grad_b)``.
    """
    z = x @ w + b
    # log(1 + e^z) - y z, evaluated without overflow
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * reg * (w @ w)
    err = sigmoid(z) - y
    n = y.shape[0]
    grad_w = x.T @ err / n + reg * w
    grad_b = err.sum() / n
    return float(loss), grad_w, float(grad_b)


@dataclass(frozen=True, eq=False)
class LogisticModel:
    weights: np.ndarray
    bias: float
    scaler: Scaler

    tag = "LR"

    def scores(self, x):
        return sigmoid(self.scaler.apply(x) @ self.weights + self.bias)

    def params(self):
        return {"weights": self.weights.tolist(), "bias": self.bias,
                "scaler": self.scaler.to_dict()}

    @classmethod
    def from_params(cls, p):
        return cls(np.array(p["weights"], dtype=np.float64), float(p["bias"]),
                   Scaler.from_dict(p["scaler"]))


def train_logistic(config, x, y):
    """Full-batch gradient descent from the zero vector."""
    scaler = Scaler.fit(x)
    xs = scaler.apply(x)
    yf = y.astype(np.float64)
    w = np.zeros(xs.shape[1])
    b = 0.0
    for _ in range(config.epochs):
        _, gw, gb = logistic_loss_grad(w, b, xs, yf, config.regularization)
        w = w - config.learning_rate * gw
        b = b - config.learning_rate * gb
    return LogisticModel(w, float(b), scaler)


@dataclass(frozen=True, eq=False)
class LinearSVMModel:
    weights: np.ndarray
    bias: float
    scaler: Scaler

    tag = "SVM"

    def margins(self, x):
        return self.scaler.apply(x) @ self.weights + self.bias

    def scores(self, x):
        return sigmoid(self.margins(x))

    def params(self):
        return {"weights": self.weights.tolist(), "bias": self.bias,
                "scaler": self.scaler.to_dict()}

    @classmethod
    def from_params(cls, p):
        return cls(np.array(p["weights"], dtype=np.float64), float(p["bias"]),
                   Scaler.from_dict(p["scaler"]))


def train_svm(config, x, y):
    """Mini-batch stochastic subgradient descent on the regularised hinge loss.

    Objective: ``reg/2 |w|^2 + mean(max(0, 1 - t (w.x + b)))`` with
    ``t = +-1``.  Step ``t`` uses rate ``learning_rate / (1 + learning_rate *
    reg * t)``; the bias is not regularised.
    """
    rng = np.random.default_rng(config.seed)
    scaler = Scaler.fit(x)
    xs = scaler.apply(x)
    t = np.where(y == 1, 1.0, -1.0)
    n, d = xs.shape
    lam = config.regularization
    w = np.zeros(d)
    b = 0.0
    step = 0
    bs = min(config.batch_size, n)
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            step += 1
            eta = config.learning_rate / (1.0 + config.learning_rate * lam * step)
            xb, tb = xs[idx], t[idx]
            active = tb * (xb @ w + b) < 1.0
            gw = lam * w - (tb[active, None] * xb[active]).sum(axis=0) / idx.size
            gb = -tb[active].sum() / idx.size
            w = w - eta * gw
            b = b - eta * gb
    return LinearSVMModel(w, float(b), scaler)
