import numpy as np
import pytest

from sparsewarn.dictionary import Dictionary, build_denoiser, build_dictionary
from sparsewarn.rbc import (
    class_residuals, crc_classify, crc_predict, default_lambda_grid, src_classify, src_predict,
    tune_crc_lambda, validation_split,
)
from sparsewarn.solvers import SolverParams, get_solver, homotopy


def _bases(rng, dim=8, rank=3):
    return [np.linalg.qr(rng.standard_normal((dim, rank)))[0] for _ in range(2)]


def _draw(bases, labels, rng, noise=0.05):
    """Unit-normalized points near the subspace of their class."""
    X = np.stack([bases[c] @ rng.standard_normal(bases[c].shape[1]) for c in labels])
    X += noise * rng.standard_normal(X.shape)
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def _subspace_blobs(n, rng, noise=0.05, dim=8, rank=3):
    y = np.repeat([0, 1], n // 2)
    return _draw(_bases(rng, dim, rank), y, rng, noise), y


def _orthogonal_dictionary():
    return Dictionary(np.eye(4), ((0, 2), (2, 4)))


def test_src_exact_atom():
    d = _orthogonal_dictionary()
    y = np.array([0.0, 0.0, 1.0, 0.0])
    dec = src_classify(d, y, lambda D, q: homotopy(D, q, 1e-9))
    assert dec.predicted == 1
    assert dec.residuals[1] < 1e-9
    assert dec.residuals[0] == pytest.approx(1.0)


def test_tie_goes_to_lower_class():
    d = _orthogonal_dictionary()
    y = np.array([1.0, 0.0, 1.0, 0.0]) / np.sqrt(2)
    dec = src_classify(d, y, get_solver("fista", SolverParams(lam=1e-3)))
    assert dec.residuals[0] == dec.residuals[1]
    assert dec.predicted == 0
    den = build_denoiser(d, 0.1)
    assert crc_classify(d, den, y).predicted == 0
    zero = crc_classify(d, den, np.zeros(4))
    assert zero.predicted == 0 and np.all(zero.residuals == 0)


def _oracle_predictions(X, y, Q):
    """Nearest class subspace by exhaustive per-class least squares."""
    preds = []
    for q in Q:
        e = []
        for c in (0, 1):
            A = X[y == c].T
            coef = np.linalg.lstsq(A, q, rcond=None)[0]
            e.append(np.linalg.norm(q - A @ coef))
        preds.append(int(np.argmin(e)))
    return np.array(preds)


def test_src_and_crc_against_residual_oracle():
    rng = np.random.default_rng(0)
    bases = _bases(rng, dim=12)
    y = np.repeat([0, 1], 20)  # 20 atoms per class
    X = _draw(bases, y, rng)
    qy = rng.integers(0, 2, 100)
    Q = _draw(bases, qy, rng)
    d, _ = build_dictionary(X, y)
    src = src_predict(d, get_solver("fista", SolverParams(lam=0.01)), Q)
    oracle = _oracle_predictions(X, y, Q)
    assert np.mean(src == oracle) >= 0.95
    crc = crc_predict(d, build_denoiser(d, 0.01), Q)[0]
    assert abs(np.mean(crc == qy) - np.mean(src == qy)) <= 0.05


def test_crc_scale_invariance_and_batching():
    rng = np.random.default_rng(3)
    X, y = _subspace_blobs(40, rng, noise=0.3)
    d, _ = build_dictionary(X, y)
    den = build_denoiser(d, 0.5)
    Q = rng.standard_normal((30, 8))
    base, E = crc_predict(d, den, Q)
    for s in (1e-3, 7.0):
        assert np.array_equal(crc_predict(d, den, s * Q)[0], base)
    for q, p, e in zip(Q, base, E):
        dec = crc_classify(d, den, q)
        assert dec.predicted == p
        np.testing.assert_allclose(dec.residuals, e, atol=1e-12)
        np.testing.assert_allclose(dec.code, den.B @ q, atol=1e-12)


def test_class_residuals_use_only_own_block():
    d = Dictionary(np.array([[1.0, 0.0], [0.0, 1.0]]), ((0, 1), (1, 2)))
    e = class_residuals(d, np.array([3.0, 4.0]), np.array([3.0, 4.0]))
    np.testing.assert_allclose(e, [4.0, 3.0])


def test_tuning_rules():
    rng = np.random.default_rng(4)
    X, y = _subspace_blobs(40, rng, noise=0.01)
    lam, table = tune_crc_lambda(X[::2], y[::2], X[1::2], y[1::2])
    assert len(set(table.values())) == 1  # flat surface
    assert lam == 1e-13
    lam, table = tune_crc_lambda(X[::2], y[::2], X[1::2], y[1::2], grid=[0.3])
    assert lam == 0.3
    with pytest.raises(ValueError):
        tune_crc_lambda(X, y, np.empty((0, 8)), np.empty(0))


def test_tuning_planted_optimum_matches_exhaustive_oracle():
    # noisy subspaces where moderate shrinkage pays off
    rng = np.random.default_rng(0)
    B = [np.linalg.qr(rng.standard_normal((8, 3)))[0] for _ in range(2)]
    y = rng.integers(0, 2, 140)
    X = np.stack([B[c] @ rng.standard_normal(3) for c in y]) + 0.3 * rng.standard_normal((140, 8))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    lam, table = tune_crc_lambda(X[:40], y[:40], X[40:], y[40:])
    assert 0.5 <= lam <= 1.5
    d, _ = build_dictionary(X[:40], y[:40])
    brute = {}
    for cand in sorted(table):
        pred = crc_predict(d, build_denoiser(d, cand, check=False), X[40:])[0]
        brute[cand] = np.mean(pred == y[40:])
    assert brute == pytest.approx(table)
    best = max(brute.values())
    assert lam == min(k for k, v in brute.items() if v == best)


def test_default_grid_and_validation_split():
    g = default_lambda_grid()
    assert g[0] == 1e-13 and g[-1] == 1e3 and g.size == 17
    labels = np.repeat([0, 1], [50, 10])
    tr, val = validation_split(labels, 0.2, seed=1)
    assert np.bincount(labels[val]).tolist() == [10, 2]
    assert np.intersect1d(tr, val).size == 0 and tr.size + val.size == 60
