from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DivergenceError, NumericalError
from .layers import Softmax, log_softmax


class Network:
    """An ordered stack of layers ending in a softmax.

    ``layout`` is the plane layout for the convolutional support estimators
    (None for the MLP). Inputs are ``(N, H, W)`` planes or ``(N, d)`` vectors.
    """

    def __init__(self, name, layers, layout=None, seed=None, notes=()):
        if not layers or not isinstance(layers[-1], Softmax):
            raise ValueError("network must end with a softmax layer")
        self.name = name
        self.layers = list(layers)
        self.layout = layout
        self.seed = seed
        self.notes = tuple(notes)

    @property
    def param_count(self):
        return sum(layer.n_params for layer in self.layers)

    def parameters(self):
        for layer in self.layers:
            yield from layer.params

    def gradients(self):
        for layer in self.layers:
            yield from layer.grads

    def zero_grad(self):
        for g in self.gradients():
            g[...] = 0.0

    def manifest(self):
        return {
            "name": self.name,
            "seed": self.seed,
            "param_count": self.param_count,
            "layers": [layer.spec() for layer in self.layers],
            "notes": list(self.notes),
        }

    def _prepare(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.layout is not None and x.ndim == 3:
            x = x[..., None]
        return x

    def logits(self, x):
        out = self._prepare(x)
        for i, layer in enumerate(self.layers[:-1]):
            out = layer.forward(out)
            if not np.all(np.isfinite(out)):
                raise NumericalError(f"{self.name}: non-finite activation in layer {i} ({layer.kind})")
        return out

    def forward(self, x):
        """Class probabilities, one row per input."""
        return self.layers[-1].forward(self.logits(x))

    def predict(self, x, batch_size=256):
        x = np.asarray(x)
        out = [np.argmax(self.forward(x[i:i + batch_size]), axis=1) for i in range(0, len(x), batch_size)]
        return np.concatenate(out) if out else np.empty(0, dtype=np.int64)

    def loss_and_backward(self, x, labels):
        """Mean categorical cross-entropy; leaves gradients in each layer.

        Returns ``(loss, grad_wrt_input)``.
        """
        labels = np.asarray(labels)
        self.zero_grad()
        z = self.logits(x)
        logp = log_softmax(z)
        N = z.shape[0]
        loss = -float(logp[np.arange(N), labels].mean())
        dz = np.exp(logp)
        dz[np.arange(N), labels] -= 1.0
        dz /= N
        d = dz
        for layer in reversed(self.layers[:-1]):
            d = layer.backward(d)
        return loss, d


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epochs: int = 15
    batch_size: int = 32
    seed: int = 0
    eps: float = 1e-8

    def __post_init__(self):
        if not self.lr >= 0:
            raise ValueError("learning rate must be non-negative")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")


class Adam:
    """Adam with bias-corrected first and second moment estimates."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class TrainingDiverged(DivergenceError):
    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


def train(net, inputs, labels, cfg=TrainConfig()):
    """Minibatch Adam on the cross-entropy loss.

    Runs ``epochs * ceil(N / batch_size)`` steps; each epoch reshuffles with a
    generator seeded from ``cfg.seed``. Returns ``(net, history)`` with the mean
    training loss per epoch.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    labels = np.asarray(labels)
    if inputs.shape[0] != labels.shape[0]:
        raise ValueError("inputs and labels are not aligned")
    rng = np.random.default_rng(cfg.seed)
    opt = Adam(net.parameters(), cfg.lr, cfg.beta1, cfg.beta2, cfg.eps)
    history = []
    N = inputs.shape[0]
    for epoch in range(cfg.epochs):
        order = rng.permutation(N)
        total = 0.0
        for start in range(0, N, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            loss, _ = net.loss_and_backward(inputs[idx], labels[idx])
            if not np.isfinite(loss):
                raise TrainingDiverged(f"{net.name}: loss became non-finite in epoch {epoch}", history)
            opt.step(list(net.gradients()))
            total += loss * idx.size
        history.append(total / N)
    return net, history
