"""The fixed network configurations.

Trainable parameter counts at the reference sizes: CSEN1 11 089, CSEN2
16 297, ReconNet-SE 22 914 and the PCA-initialized MLP 672 706 (d = 1024,
hidden widths 512/256/64, two classes).
"""

from __future__ import annotations

import numpy as np

from .layers import ClassAvgPool, Conv2D, Dense, MaxPool2D, ReLU, Softmax, TransposedConv2D
from .network import Network


def _head(layout):
    return [ClassAvgPool(layout.cell_classes(), layout.n_classes), Softmax()]


def build_csen1(layout, seed=0):
    rng = np.random.default_rng(seed)
    layers = [
        Conv2D(1, 48, (3, 3), rng), ReLU(),
        Conv2D(48, 24, (3, 3), rng), ReLU(),
        Conv2D(24, 1, (3, 3), rng),
    ] + _head(layout)
    return Network("csen1", layers, layout, seed)


def build_csen2(layout, seed=0, pad=True):
    """CSEN1 plus a 2x2 max-pool after the first block and a stride-2
    transposed convolution (ReLU after it) restoring the plane size.

    With ``pad`` an odd plane is zero-padded to even size before pooling and
    the upsampled map is cropped back; without it odd planes are rejected.
    """
    H, W = layout.height, layout.width
    if (H % 2 or W % 2) and not pad:
        raise ValueError(f"plane {H}x{W} is not divisible by 2; use a padded layout")
    rng = np.random.default_rng(seed)
    layers = [
        Conv2D(1, 48, (3, 3), rng), ReLU(),
        MaxPool2D(pad_to_even=pad),
        Conv2D(48, 24, (3, 3), rng), ReLU(),
        TransposedConv2D(24, 24, (3, 3), stride=2, crop=(H, W), rng=rng), ReLU(),
        Conv2D(24, 1, (3, 3), rng),
    ] + _head(layout)
    notes = ["relu applied after the transposed convolution"]
    if H % 2 or W % 2:
        notes.append(f"plane {H}x{W} zero-padded to {H + H % 2}x{W + W % 2} for pooling, cropped after upsampling")
    return Network("csen2", layers, layout, seed, notes)


def build_reconnet_se(layout, seed=0):
    rng = np.random.default_rng(seed)
    layers = []
    for _ in range(2):
        layers += [
            Conv2D(1, 64, (11, 11), rng), ReLU(),
            Conv2D(64, 32, (1, 1), rng), ReLU(),
            Conv2D(32, 1, (7, 7), rng), ReLU(),
        ]
    layers.pop()  # no activation after the final convolution
    return Network("reconnet", layers + _head(layout), layout, seed)


def default_hidden(m):
    return (m, max(1, m // 2), max(1, m // 8))


def build_mlp(projector, hidden=None, n_classes=2, seed=0):
    """Dense stack ``d -> hidden[0] -> hidden[1] -> hidden[2] -> n_classes``.

    The first layer's weights start as the PCA matrix (``W = A^T``, zero
    bias), so on mean-centered input its pre-activation is the projection.
    """
    hidden = tuple(default_hidden(projector.m) if hidden is None else hidden)
    if hidden[0] != projector.m:
        raise ValueError(f"first hidden width {hidden[0]} must equal the PCA dimension {projector.m}")
    rng = np.random.default_rng(seed)
    layers = [Dense(projector.d, hidden[0], weight=projector.A.T), ReLU()]
    widths = list(hidden) + [n_classes]
    for a, b in zip(widths[:-1], widths[1:]):
        layers += [Dense(a, b, rng), ReLU()]
    layers.pop()
    layers.append(Softmax())
    return Network("mlp", layers, None, seed, ["first dense layer initialized from the PCA matrix"])
