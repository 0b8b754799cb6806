import warnings

import numpy as np
import pytest

from sparsewarn.errors import FitError
from sparsewarn.preprocess import NormalizationWarning, Projector, fit_pca, normalize, project


def test_compression_ratio_half():
    X = np.random.default_rng(0).standard_normal((600, 1024))
    p = fit_pca(X, 512)
    assert p.A.shape == (512, 1024)
    assert p.compression_ratio == 0.5
    np.testing.assert_allclose(p.A @ p.A.T, np.eye(512), atol=1e-9)


def test_rank_one_line():
    t = np.linspace(-3, 3, 21)
    X = np.c_[t, 2 * t]
    p = fit_pca(X, 1)
    np.testing.assert_allclose(p.A[0], np.array([1.0, 2.0]) / np.sqrt(5), atol=1e-12)
    assert p.explained_variance_ratio[0] == pytest.approx(1.0)
    # mean is zero here, so (1, 2) projects to sqrt(5)
    np.testing.assert_allclose(project(p, [1.0, 2.0]), [np.sqrt(5)], atol=1e-12)


def test_full_rank_round_trip():
    X = np.random.default_rng(1).standard_normal((50, 8))
    p = fit_pca(X, 8)
    recon = p.mean + project(p, X) @ p.A
    assert np.abs(recon - X).max() < 1e-9


def test_directions_match_covariance_eigenvectors():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((200, 6)) * np.array([5, 4, 3, 2, 1, 0.5])
    p = fit_pca(X, 3)
    w, V = np.linalg.eigh(np.cov(X.T))
    V = V[:, ::-1][:, :3].T
    for a, v in zip(p.A, V):
        assert abs(abs(a @ v) - 1) < 1e-9
    np.testing.assert_allclose(p.explained_variance, w[::-1][:3], rtol=1e-9)
    assert np.all(np.diff(p.explained_variance) <= 0)
    # sign rule: largest-magnitude entry positive
    assert np.all(p.A[np.arange(3), np.argmax(np.abs(p.A), axis=1)] > 0)


def test_project_trivial_cases():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((30, 4))
    p = fit_pca(X, 2)
    np.testing.assert_allclose(project(p, p.mean), 0.0, atol=1e-15)
    ident = Projector(np.eye(4), np.zeros(4), np.ones(4), np.full(4, 0.25))
    s = rng.standard_normal(4)
    np.testing.assert_array_equal(project(ident, s), s)
    with pytest.raises(ValueError):
        project(p, np.zeros(3))


def test_projection_affine_linearity():
    rng = np.random.default_rng(4)
    p = fit_pca(rng.standard_normal((40, 6)), 3)
    s1, s2 = rng.standard_normal(6), rng.standard_normal(6)
    a, b = 0.3, -1.7
    lhs = project(p, a * s1 + b * s2 + (1 - a - b) * p.mean)
    np.testing.assert_allclose(lhs, a * project(p, s1) + b * project(p, s2), atol=1e-10)


def test_pca_errors():
    with pytest.raises(FitError):
        fit_pca(np.ones((5, 3)), 1)
    with pytest.raises(FitError):
        fit_pca(np.random.default_rng(0).standard_normal((4, 10)), 4)
    with pytest.raises(FitError):
        fit_pca(np.zeros((1, 2)), 1)


def test_zscore_example():
    out, st = normalize(np.array([[1.0], [3.0]]), "zscore")
    np.testing.assert_array_equal(out, [[-1.0], [1.0]])
    assert st.mean[0] == 2 and st.scale[0] == 1


def test_zscore_apply_stored_stats_and_idempotence():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((20, 3)) * [1, 2, 3] + [4, 5, 6]
    _, st = normalize(X, "zscore")
    row = rng.standard_normal((1, 3))
    out, _ = normalize(row, "zscore", st)
    np.testing.assert_allclose(out, (row - X.mean(0)) / X.std(0), rtol=1e-12)
    once, _ = normalize(X, "zscore", st)
    again, _ = normalize(once, "zscore", normalize(once, "zscore")[1])
    np.testing.assert_allclose(again, once, atol=1e-12)


def test_unitnorm():
    X = np.random.default_rng(6).standard_normal((10, 4))
    out, st = normalize(X, "unitnorm")
    np.testing.assert_allclose(np.linalg.norm(out, axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(out * np.linalg.norm(X - X.mean(0), axis=1, keepdims=True), X - X.mean(0))


def test_degenerate_inputs_warn():
    X = np.c_[np.arange(4.0), np.ones(4)]
    with pytest.warns(NormalizationWarning):
        out, st = normalize(X, "zscore")
    assert st.scale[1] == 1 and st.warnings
    np.testing.assert_array_equal(out[:, 1], 0.0)
    _, st = normalize(np.array([[1.0, 1.0], [3.0, 3.0]]), "unitnorm")
    with pytest.warns(NormalizationWarning):
        out, st2 = normalize(np.array([[2.0, 2.0]]), "unitnorm", st)
    np.testing.assert_array_equal(out, 0.0)
    assert st2.warnings
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        normalize(np.random.default_rng(0).standard_normal((5, 2)), "zscore")
    with pytest.raises(ValueError):
        normalize(X, "minmax")
