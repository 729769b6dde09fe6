"""One-hidden-layer sigmoid network trained by backpropagation."""

from dataclasses import dataclass

import numpy as np

from .base import Scaler, sigmoid


def init_params(n_in, hidden, rng):
    """Uniform(-0.5, 0.5) draws, in the order w1, b1, w2, b2."""
    w1 = rng.uniform(-0.5, 0.5, (n_in, hidden))
    b1 = rng.uniform(-0.5, 0.5, hidden)
    w2 = rng.uniform(-0.5, 0.5, hidden)
    b2 = float(rng.uniform(-0.5, 0.5))
    return w1, b1, w2, b2


def forward(w1, b1, w2, b2, x):
    h = sigmoid(x @ w1 + b1)
    z = h @ w2 + b2
    return h, z


def loss_grad(w1, b1, w2, b2, x, y, reg):
    """Mean cross-entropy plus ``reg/2 (|w1|^2 + |w2|^2)`` and its gradient.

    Returns ``(loss, (g_w1, g_b1, g_w2, g_b2))``.
    """
    n = y.shape[0]
    h, z = forward(w1, b1, w2, b2, x)
    loss = np.mean(np.logaddexp(0.0, z) - y * z)
    loss += 0.5 * reg * (np.sum(w1 * w1) + w2 @ w2)
    dz = (sigmoid(z) - y) / n
    g_w2 = h.T @ dz + reg * w2
    g_b2 = dz.sum()
    dh = np.outer(dz, w2) * h * (1.0 - h)
    g_w1 = x.T @ dh + reg * w1
    g_b1 = dh.sum(axis=0)
    return float(loss), (g_w1, g_b1, g_w2, float(g_b2))


@dataclass(frozen=True, eq=False)
class NeuralNetModel:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float
    scaler: Scaler

    tag = "BPNN"

    def scores(self, x):
        _, z = forward(self.w1, self.b1, self.w2, self.b2, self.scaler.apply(x))
        return sigmoid(z)

    def params(self):
        return {"w1": self.w1.tolist(), "b1": self.b1.tolist(), "w2": self.w2.tolist(),
                "b2": self.b2, "scaler": self.scaler.to_dict()}

    @classmethod
    def from_params(cls, p):
        w1 = np.array(p["w1"], dtype=np.float64)
        return cls(w1.reshape(-1, len(p["b1"])), np.array(p["b1"], dtype=np.float64),
                   np.array(p["w2"], dtype=np.float64), float(p["b2"]),
                   Scaler.from_dict(p["scaler"]))


def train_neural_net(config, x, y):
    rng = np.random.default_rng(config.seed)
    scaler = Scaler.fit(x)
    xs = scaler.apply(x)
    yf = y.astype(np.float64)
    w1, b1, w2, b2 = init_params(xs.shape[1], config.hidden, rng)
    n = xs.shape[0]
    bs = min(config.batch_size, n)
    lr = config.learning_rate
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, bs):
            idx = order[start:start + bs]
            _, (g_w1, g_b1, g_w2, g_b2) = loss_grad(
                w1, b1, w2, b2, xs[idx], yf[idx], config.regularization)
            w1 = w1 - lr * g_w1
            b1 = b1 - lr * g_b1
            w2 = w2 - lr * g_w2
            b2 = b2 - lr * g_b2
    return NeuralNetModel(w1, b1, w2, float(b2), scaler)
