from __future__ import annotations

import numpy as np

from ..dictionary import flatten_plane


def support_estimate(prob_map, tau, layout=None):
    """Atom indices whose probability exceeds ``tau``.

    With a layout the map is a plane and cells are mapped back to dictionary
    columns; otherwise it is already indexed by atom.
    """
    if not 0 < tau < 1:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    p = np.asarray(prob_map, dtype=np.float64)
    if layout is not None:
        p = flatten_plane(p, layout)
    return np.flatnonzero(p.ravel() > tau)


def gradient_check(net, x, labels, epsilon=1e-6, n_samples=200, seed=0, include_input=False):
    """Largest relative gap between backprop and central differences.

    Up to ``n_samples`` entries of every parameter tensor (and of the input
    when ``include_input``) are perturbed by ``+-epsilon``. The relative error
    uses ``max(|analytic|, |numeric|, 1e-8)`` as denominator.
    """
    if not 1e-7 <= epsilon <= 1e-4:
        raise ValueError("epsilon must lie in [1e-7, 1e-4]")
    rng = np.random.default_rng(seed)
    x = np.array(x, dtype=np.float64)
    _, dx = net.loss_and_backward(x, labels)
    analytic = [g.copy() for g in net.gradients()]
    targets = list(zip(net.parameters(), analytic))
    if include_input:
        targets.append((x, dx.reshape(net._prepare(x).shape).reshape(x.shape)))
    worst = 0.0
    for arr, grad in targets:
        flat = arr.reshape(-1)
        picks = np.arange(flat.size) if flat.size <= n_samples else rng.choice(flat.size, n_samples, replace=False)
        for i in picks:
            old = flat[i]
            flat[i] = old + epsilon
            lp, _ = net.loss_and_backward(x, labels)
            flat[i] = old - epsilon
            lm, _ = net.loss_and_backward(x, labels)
            flat[i] = old
            num = (lp - lm) / (2 * epsilon)
            a = grad.reshape(-1)[i]
            worst = max(worst, abs(a - num) / max(abs(a), abs(num), 1e-8))
    net.loss_and_backward(x, labels)
    return worst
