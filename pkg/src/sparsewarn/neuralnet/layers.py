"""Layers with explicit forward/backward passes on NHWC float64 arrays.

Every layer caches what its backward pass needs during ``forward`` and
accumulates parameter gradients into ``grads`` (same order as ``params``).
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

IM2COL_MAX_WIDTH = 256
IM2COL_MAX_ELEMENTS = 8_000_000


def glorot_uniform(rng, shape, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    kind = "layer"

    def __init__(self):
        self.params = []
        self.grads = []

    @property
    def n_params(self):
        return int(sum(p.size for p in self.params))

    def spec(self):
        return {"kind": self.kind}

    def forward(self, x):
        raise NotImplementedError

    def backward(self, dout):
        raise NotImplementedError


class Conv2D(Layer):
    """Stride-1 convolution with zero padding that preserves height and width."""

    kind = "conv2d"

    def __init__(self, in_channels, out_channels, kernel=(3, 3), rng=None):
        super().__init__()
        kh, kw = kernel
        self.kernel = (kh, kw)
        self.in_channels = in_channels
        self.out_channels = out_channels
        rng = rng if rng is not None else np.random.default_rng(0)
        W = glorot_uniform(rng, (kh, kw, in_channels, out_channels),
                           kh * kw * in_channels, kh * kw * out_channels)
        self.params = [W, np.zeros(out_channels)]
        self.grads = [np.zeros_like(W), np.zeros(out_channels)]

    def spec(self):
        return {"kind": self.kind, "kernel": list(self.kernel), "in_channels": self.in_channels,
                "out_channels": self.out_channels, "stride": 1, "padding": "same"}

    def _pads(self):
        kh, kw = self.kernel
        return (kh - 1) // 2, kh - 1 - (kh - 1) // 2, (kw - 1) // 2, kw - 1 - (kw - 1) // 2

    def _use_columns(self, n_rows):
        # im2col pays off when few input columns feed many outputs; wide
        # channel stacks stay on the per-offset loop to bound memory.
        width = self.kernel[0] * self.kernel[1] * self.in_channels
        return width <= IM2COL_MAX_WIDTH and n_rows * width <= IM2COL_MAX_ELEMENTS

    def forward(self, x):
        W, b = self.params
        kh, kw = self.kernel
        top, bottom, left, right = self._pads()
        N, H, Wd, C = x.shape
        xp = np.pad(x, ((0, 0), (top, bottom), (left, right), (0, 0)))
        if self._use_columns(N * H * Wd):
            # (N, H, W, C, kh, kw) windows -> rows of length C*kh*kw
            cols = sliding_window_view(xp, (kh, kw), axis=(1, 2)).reshape(N * H * Wd, -1)
            Wm = W.transpose(2, 0, 1, 3).reshape(-1, self.out_channels)
            out = (cols @ Wm).reshape(N, H, Wd, self.out_channels)
            self.cache = xp, x.shape, cols
        else:
            out = np.zeros((N, H, Wd, self.out_channels))
            for a in range(kh):
                for c in range(kw):
                    out += xp[:, a:a + H, c:c + Wd, :] @ W[a, c]
            self.cache = xp, x.shape, None
        out += b
        return out

    def backward(self, dout):
        W, _ = self.params
        dW, db = self.grads
        xp, shape, cols = self.cache
        N, H, Wd, C = shape
        kh, kw = self.kernel
        top, _, left, _ = self._pads()
        dxp = np.zeros_like(xp)
        d2 = dout.reshape(-1, self.out_channels)
        if cols is not None:
            dW += (cols.T @ d2).reshape(C, kh, kw, self.out_channels).transpose(1, 2, 0, 3)
            Wm = W.transpose(2, 0, 1, 3).reshape(-1, self.out_channels)
            dcols = (d2 @ Wm.T).reshape(N, H, Wd, C, kh, kw)
            for a in range(kh):
                for c in range(kw):
                    dxp[:, a:a + H, c:c + Wd, :] += dcols[..., a, c]
        else:
            for a in range(kh):
                for c in range(kw):
                    patch = xp[:, a:a + H, c:c + Wd, :]
                    dW[a, c] += patch.reshape(-1, C).T @ d2
                    dxp[:, a:a + H, c:c + Wd, :] += dout @ W[a, c].T
        db += d2.sum(axis=0)
        return dxp[:, top:top + H, left:left + Wd, :]


class TransposedConv2D(Layer):
    """Stride-``s`` transposed convolution: input pixel ``(i, j)`` spreads its
    kernel over output pixels ``(s i + a, s j + c)``. The output is cropped
    to ``crop`` (defaults to ``s * input size``)."""

    kind = "transposed_conv2d"

    def __init__(self, in_channels, out_channels, kernel=(3, 3), stride=2, crop=None, rng=None):
        super().__init__()
        kh, kw = kernel
        self.kernel = (kh, kw)
        self.stride = stride
        self.crop = crop
        self.in_channels = in_channels
        self.out_channels = out_channels
        rng = rng if rng is not None else np.random.default_rng(0)
        W = glorot_uniform(rng, (kh, kw, in_channels, out_channels),
                           kh * kw * in_channels, kh * kw * out_channels)
        self.params = [W, np.zeros(out_channels)]
        self.grads = [np.zeros_like(W), np.zeros(out_channels)]

    def spec(self):
        return {"kind": self.kind, "kernel": list(self.kernel), "in_channels": self.in_channels,
                "out_channels": self.out_channels, "stride": self.stride,
                "crop": list(self.crop) if self.crop else None}

    def _out_size(self, h, w):
        return self.crop if self.crop is not None else (self.stride * h, self.stride * w)

    def forward(self, x):
        W, b = self.params
        kh, kw = self.kernel
        s = self.stride
        N, h, w, _ = x.shape
        full = np.zeros((N, s * (h - 1) + kh, s * (w - 1) + kw, self.out_channels))
        for a in range(kh):
            for c in range(kw):
                full[:, a:a + s * (h - 1) + 1:s, c:c + s * (w - 1) + 1:s, :] += x @ W[a, c]
        Ho, Wo = self._out_size(h, w)
        self.cache = x, full.shape
        return full[:, :Ho, :Wo, :] + b

    def backward(self, dout):
        W, _ = self.params
        dW, db = self.grads
        x, full_shape = self.cache
        kh, kw = self.kernel
        s = self.stride
        N, h, w, C = x.shape
        dfull = np.zeros(full_shape)
        Ho, Wo = dout.shape[1:3]
        dfull[:, :Ho, :Wo, :] = dout
        dx = np.zeros_like(x)
        x2 = x.reshape(-1, C)
        for a in range(kh):
            for c in range(kw):
                g = dfull[:, a:a + s * (h - 1) + 1:s, c:c + s * (w - 1) + 1:s, :]
                dW[a, c] += x2.T @ g.reshape(-1, self.out_channels)
                dx += g @ W[a, c].T
        db += dout.reshape(-1, self.out_channels).sum(axis=0)
        return dx


class MaxPool2D(Layer):
    """2x2 max pooling with stride 2.

    Odd spatial sizes are zero-padded at the bottom/right first when
    ``pad_to_even`` is set. The backward pass routes each window's gradient
    to its first maximal element in row-major scan order.
    """

    kind = "maxpool"

    def __init__(self, pad_to_even=True):
        super().__init__()
        self.pad_to_even = pad_to_even

    def spec(self):
        return {"kind": self.kind, "kernel": [2, 2], "stride": 2, "pad_to_even": self.pad_to_even}

    def forward(self, x):
        N, H, W, C = x.shape
        if H % 2 or W % 2:
            if not self.pad_to_even:
                raise ValueError(f"maxpool input {H}x{W} is not divisible by 2")
            x = np.pad(x, ((0, 0), (0, H % 2), (0, W % 2), (0, 0)))
        Hp, Wp = x.shape[1:3]
        win = x.reshape(N, Hp // 2, 2, Wp // 2, 2, C).transpose(0, 1, 3, 5, 2, 4)
        win = win.reshape(N, Hp // 2, Wp // 2, C, 4)
        arg = np.argmax(win, axis=-1)
        self.cache = arg, (N, H, W, C), (Hp, Wp)
        return np.take_along_axis(win, arg[..., None], axis=-1)[..., 0]

    def backward(self, dout):
        arg, (N, H, W, C), (Hp, Wp) = self.cache
        win = np.zeros(dout.shape + (4,))
        np.put_along_axis(win, arg[..., None], dout[..., None], axis=-1)
        win = win.reshape(N, Hp // 2, Wp // 2, C, 2, 2).transpose(0, 1, 4, 2, 5, 3)
        return win.reshape(N, Hp, Wp, C)[:, :H, :W, :]


class Dense(Layer):
    kind = "dense"

    def __init__(self, n_in, n_out, rng=None, weight=None):
        super().__init__()
        rng = rng if rng is not None else np.random.default_rng(0)
        W = glorot_uniform(rng, (n_in, n_out), n_in, n_out) if weight is None else np.array(weight, dtype=np.float64)
        if W.shape != (n_in, n_out):
            raise ValueError(f"dense weight must be {(n_in, n_out)}, got {W.shape}")
        self.n_in, self.n_out = n_in, n_out
        self.params = [W, np.zeros(n_out)]
        self.grads = [np.zeros_like(W), np.zeros(n_out)]

    def spec(self):
        return {"kind": self.kind, "in_features": self.n_in, "out_features": self.n_out}

    def forward(self, x):
        self.cache = x
        return x @ self.params[0] + self.params[1]

    def backward(self, dout):
        x = self.cache
        self.grads[0] += x.T @ dout
        self.grads[1] += dout.sum(axis=0)
        return dout @ self.params[0].T


class ReLU(Layer):
    kind = "relu"

    def forward(self, x):
        self.cache = x > 0
        return np.where(self.cache, x, 0.0)

    def backward(self, dout):
        return np.where(self.cache, dout, 0.0)


class ClassAvgPool(Layer):
    """Average a single-channel map over each class block: ``(N, H, W, 1) -> (N, C)``.

    The logit of class ``c`` depends only on the cells of block ``c``.
    """

    kind = "class_avgpool"

    def __init__(self, cell_classes, n_classes):
        super().__init__()
        cell_classes = np.asarray(cell_classes)
        self.shape = cell_classes.shape
        self.n_classes = n_classes
        M = np.zeros((cell_classes.size, n_classes))
        M[np.arange(cell_classes.size), cell_classes.ravel()] = 1.0
        self.M = M / M.sum(axis=0, keepdims=True)

    def spec(self):
        return {"kind": self.kind, "plane": list(self.shape), "n_classes": self.n_classes}

    def forward(self, x):
        N = x.shape[0]
        if x.shape[1:] != self.shape + (1,):
            raise ValueError(f"class_avgpool expects {self.shape + (1,)}, got {x.shape[1:]}")
        return x.reshape(N, -1) @ self.M

    def backward(self, dout):
        return (dout @ self.M.T).reshape((dout.shape[0],) + self.shape + (1,))


class Softmax(Layer):
    kind = "softmax"

    def forward(self, x):
        z = x - x.max(axis=1, keepdims=True)
        e = np.exp(z)
        self.cache = p = e / e.sum(axis=1, keepdims=True)
        return p

    def backward(self, dout):
        p = self.cache
        return p * (dout - (dout * p).sum(axis=1, keepdims=True))


def log_softmax(logits):
    """Row-wise log-softmax; ``log1p`` keeps precision when one class dominates."""
    z = logits - logits.max(axis=1, keepdims=True)
    top = np.argmax(z, axis=1)
    e = np.exp(z)
    e[np.arange(z.shape[0]), top] = 0.0
    return z - np.log1p(e.sum(axis=1, keepdims=True))
