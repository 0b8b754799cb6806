"""Class-grouped dictionaries, the ridge denoiser and the 2-D plane layout.

Atoms are training vectors stored as unit-norm columns of ``D``, grouped in
ascending class order so each class owns a contiguous column range. The plane
layout arranges those columns on a grid where every class occupies one
rectangular block, which is what the support-estimator networks pool over.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import FactorizationError

DENOISER_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class Dictionary:
    D: np.ndarray
    class_ranges: tuple  # ((start, stop), ...) per class

    @property
    def m(self):
        return self.D.shape[0]

    @property
    def n(self):
        return self.D.shape[1]

    @property
    def n_classes(self):
        return len(self.class_ranges)

    @property
    def atom_labels(self):
        labels = np.empty(self.n, dtype=np.int64)
        for c, (a, b) in enumerate(self.class_ranges):
            labels[a:b] = c
        return labels

    def class_block(self, c):
        a, b = self.class_ranges[c]
        return self.D[:, a:b]


def build_dictionary(X, labels, n_classes=None, per_class=None, seed=None):
    """Stack training vectors as unit-norm atoms grouped by class.

    ``per_class=None`` uses every sample. Otherwise the first ``per_class``
    members of each class are taken, after shuffling each class with ``seed``
    when one is given. Returns ``(dictionary, used_index)`` where
    ``used_index`` maps columns back to rows of ``X``.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if n_classes is None:
        n_classes = int(labels.max()) + 1
    rng = np.random.default_rng(seed) if seed is not None else None
    columns, ranges = [], []
    start = 0
    for c in range(n_classes):
        members = np.flatnonzero(labels == c)
        if rng is not None:
            members = rng.permutation(members)
        if per_class is not None:
            if per_class > members.size:
                raise ValueError(
                    f"class {c} has {members.size} samples, cannot take {per_class} atoms"
                )
            members = members[:per_class]
        columns.append(members)
        ranges.append((start, start + members.size))
        start += members.size
    used = np.concatenate(columns)
    D = X[used].T.copy()
    norms = np.linalg.norm(D, axis=0)
    if np.any(norms == 0):
        raise ValueError("cannot normalize a zero atom")
    D /= norms
    return Dictionary(D=D, class_ranges=tuple(ranges)), used


@dataclass(frozen=True)
class Denoiser:
    B: np.ndarray
    lam: float
    residual: float


def build_denoiser(dictionary, lam, check=True):
    """``B = (D^T D + lam I)^-1 D^T`` via a Cholesky factorization.

    When ``n > m`` the equivalent ``D^T (D D^T + lam I)^-1`` is factored instead,
    which needs an ``m x m`` system rather than ``n x n``.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    D = dictionary.D if isinstance(dictionary, Dictionary) else np.asarray(dictionary)
    m, n = D.shape
    try:
        if n > m:
            G = D @ D.T
            G[np.diag_indices(m)] += lam
            B = linalg.cho_solve(linalg.cho_factor(G, check_finite=True), D).T
        else:
            G = D.T @ D
            G[np.diag_indices(n)] += lam
            B = linalg.cho_solve(linalg.cho_factor(G, check_finite=True), D.T)
    except (linalg.LinAlgError, ValueError) as exc:
        raise FactorizationError(f"denoiser factorization failed at lambda={lam}: {exc}") from None
    if not np.all(np.isfinite(B)):
        raise FactorizationError(f"denoiser has non-finite entries at lambda={lam}")
    # (D^T D + lam I) B - D^T evaluated without forming the n x n Gram matrix
    residual = float(np.abs(D.T @ (D @ B) + lam * B - D.T).max())
    if check and residual >= DENOISER_RESIDUAL_TOL:
        raise FactorizationError(
            f"denoiser normal-equation residual {residual:.3g} exceeds "
            f"{DENOISER_RESIDUAL_TOL:g} at lambda={lam}"
        )
    return Denoiser(B=B, lam=float(lam), residual=residual)


def proxy(source, y, kind="ridge"):
    """Coarse code estimate: ``D^T y`` (``transpose``) or ``B y`` (``ridge``).

    ``y`` may be a vector or a matrix with one query per row.
    """
    y = np.asarray(y, dtype=np.float64)
    if kind == "transpose":
        D = source.D if isinstance(source, Dictionary) else np.asarray(source)
        M = D.T
    elif kind == "ridge":
        if not isinstance(source, Denoiser):
            raise TypeError("ridge proxy needs a Denoiser")
        M = source.B
    else:
        raise ValueError(f"unknown proxy kind {kind!r}")
    if y.shape[-1] != M.shape[1]:
        raise ValueError(f"expected measurement dimension {M.shape[1]}, got {y.shape[-1]}")
    return y @ M.T


@dataclass(frozen=True)
class PlaneLayout:
    """Bijection between dictionary columns and cells of a ``height x width`` grid.

    Class ``c`` occupies the block of columns
    ``[c * block_width, (c + 1) * block_width)``; inside a block atoms fill
    column-major.
    """

    height: int
    width: int
    block_height: int
    block_width: int
    n_classes: int

    @property
    def n(self):
        return self.height * self.width

    @property
    def atom_to_cell(self):
        """``(rows, cols)`` arrays giving the cell of each atom index."""
        per_class = self.block_height * self.block_width
        j = np.arange(self.n)
        c, k = np.divmod(j, per_class)
        rows = k % self.block_height
        cols = c * self.block_width + k // self.block_height
        return rows, cols

    def cell_classes(self):
        """``height x width`` array with the owning class of each cell."""
        return np.repeat(np.arange(self.n_classes), self.block_width)[None, :].repeat(
            self.height, axis=0
        )

    def block_extent(self, c):
        return (0, self.height), (c * self.block_width, (c + 1) * self.block_width)


def make_layout(dictionary_or_sizes, block_shape=None):
    """Plane layout for a dictionary with equal class sizes.

    Without an explicit ``block_shape`` each class block is
    ``(n_c / w) x w`` with ``w`` the largest divisor of ``n_c`` not exceeding
    ``sqrt(n_c)``; 625 atoms per class give 25 x 25 blocks.
    """
    if isinstance(dictionary_or_sizes, Dictionary):
        sizes = [b - a for a, b in dictionary_or_sizes.class_ranges]
    else:
        sizes = list(dictionary_or_sizes)
    if len(set(sizes)) != 1:
        raise ValueError(f"plane layout needs equal class sizes, got {sizes}")
    n_c = sizes[0]
    if block_shape is None:
        w = max(k for k in range(1, int(np.sqrt(n_c)) + 1) if n_c % k == 0)
        block_shape = (n_c // w, w)
    bh, bw = block_shape
    if bh * bw != n_c:
        raise ValueError(f"block {bh}x{bw} does not hold {n_c} atoms")
    C = len(sizes)
    return PlaneLayout(height=bh, width=bw * C, block_height=bh, block_width=bw, n_classes=C)


def reshape_to_plane(x, layout):
    """Scatter codes onto the plane. Accepts ``(n,)`` or ``(batch, n)``."""
    x = np.asarray(x)
    if x.shape[-1] != layout.n:
        raise ValueError(f"layout holds {layout.n} cells, got vector of length {x.shape[-1]}")
    rows, cols = layout.atom_to_cell
    out = np.empty(x.shape[:-1] + (layout.height, layout.width), dtype=x.dtype)
    out[..., rows, cols] = x
    return out


def flatten_plane(plane, layout):
    plane = np.asarray(plane)
    if plane.shape[-2:] != (layout.height, layout.width):
        raise ValueError(f"expected plane {layout.height}x{layout.width}, got {plane.shape[-2:]}")
    rows, cols = layout.atom_to_cell
    return plane[..., rows, cols]
