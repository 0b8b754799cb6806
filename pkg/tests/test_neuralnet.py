import numpy as np
import pytest

from sparsewarn.dictionary import make_layout, reshape_to_plane
from sparsewarn.errors import NumericalError
from sparsewarn.neuralnet import (
    ClassAvgPool, Conv2D, Dense, MaxPool2D, Network, ReLU, Softmax, TrainConfig,
    TrainingDiverged, TransposedConv2D, build_csen1, build_csen2, build_mlp, build_reconnet_se,
    gradient_check, support_estimate, train,
)
from sparsewarn.neuralnet.layers import log_softmax
from sparsewarn.preprocess import Projector, fit_pca

LAYOUT = make_layout([625, 625])


def test_layer_wise_parameter_formulas():
    assert build_csen1(LAYOUT).param_count == (1 * 48 * 9 + 48) + (48 * 24 * 9 + 24) + (24 * 9 + 1)
    assert build_csen2(LAYOUT).param_count == 480 + 10392 + 5208 + 217
    assert build_reconnet_se(LAYOUT).param_count == 2 * (7808 + 2080 + 1569)
    p = Projector(np.eye(512, 1024), np.zeros(1024), np.ones(512), np.ones(512))
    net = build_mlp(p, (512, 256, 64))
    assert net.param_count == 1024 * 512 + 512 + 512 * 256 + 256 + 256 * 64 + 64 + 64 * 2 + 2
    # param count does not depend on the plane
    assert build_csen1(make_layout([12, 12])).param_count == 11089


def test_csen2_odd_plane_needs_padding():
    with pytest.raises(ValueError):
        build_csen2(LAYOUT, pad=False)
    assert build_csen2(make_layout([12, 12]), pad=False).param_count == 16297
    net = build_csen2(LAYOUT)
    x = np.random.default_rng(0).standard_normal((2, 25, 50))
    assert net.forward(x).shape == (2, 2)
    assert any("zero-padded" in n for n in net.notes)


@pytest.mark.parametrize("builder", [build_csen1, build_csen2, build_reconnet_se])
def test_output_is_class_probabilities(builder):
    layout = make_layout([16, 16, 16])
    net = builder(layout, seed=3)
    x = np.random.default_rng(1).standard_normal((4, layout.height, layout.width)) * 50
    p = net.forward(x)
    assert p.shape == (4, 3)
    assert np.all(p >= 0)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)


def test_reconnet_zero_input_is_bias_driven():
    layout = make_layout([16, 16])
    net = build_reconnet_se(layout)
    rng = np.random.default_rng(0)
    for layer in net.layers:
        if layer.params:
            layer.params[1][...] = rng.uniform(0.1, 0.5, layer.params[1].shape)
    z = np.zeros((1, layout.height, layout.width))
    out = net._prepare(z)
    for layer in net.layers[:-2]:
        out = layer.forward(out)
    pooled = [out[0, :, :, 0][layout.cell_classes() == c].mean() for c in range(2)]
    np.testing.assert_allclose(net.logits(z)[0], pooled, atol=1e-12)


def test_mlp_first_layer_is_projection():
    X = np.random.default_rng(2).standard_normal((40, 12))
    p = fit_pca(X, 6)
    net = build_mlp(p)
    s = X[:5] - p.mean
    np.testing.assert_allclose(net.layers[0].forward(s), (X[:5] - p.mean) @ p.A.T, atol=1e-12)
    with pytest.raises(ValueError):
        build_mlp(p, (5, 3, 2))


def test_zero_final_layer_gives_uniform_probabilities():
    net = build_csen1(make_layout([4, 4]))
    for arr in net.layers[4].params:
        arr[...] = 0.0
    p = net.forward(np.random.default_rng(0).standard_normal((3, 2, 4)))
    np.testing.assert_allclose(p, 0.5, atol=1e-15)


def test_hand_computed_convolution():
    conv = Conv2D(1, 1, (3, 3))
    conv.params[0][...] = 1.0
    out = conv.forward(np.ones((1, 3, 3, 1)))[0, :, :, 0]
    np.testing.assert_array_equal(out, [[4, 6, 4], [6, 9, 6], [4, 6, 4]])


def test_conv_column_path_matches_loop(monkeypatch):
    from sparsewarn.neuralnet import layers

    rng = np.random.default_rng(4)
    conv = Conv2D(3, 5, (3, 3), rng)
    x = rng.standard_normal((2, 6, 7, 3))
    dout = rng.standard_normal((2, 6, 7, 5))
    fast = conv.forward(x)
    dx_fast = conv.backward(dout)
    g_fast = [g.copy() for g in conv.grads]
    monkeypatch.setattr(layers, "IM2COL_MAX_WIDTH", 0)
    conv.grads[0][...] = 0
    conv.grads[1][...] = 0
    np.testing.assert_allclose(conv.forward(x), fast, atol=1e-12)
    np.testing.assert_allclose(conv.backward(dout), dx_fast, atol=1e-12)
    for a, b in zip(conv.grads, g_fast):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_transposed_conv_restores_size():
    t = TransposedConv2D(2, 3, (3, 3), stride=2, crop=(5, 8))
    out = t.forward(np.ones((1, 3, 4, 2)))
    assert out.shape == (1, 5, 8, 3)


def test_maxpool_first_maximum_gets_gradient():
    pool = MaxPool2D()
    x = np.array([[1.0, 3.0], [3.0, 0.0]]).reshape(1, 2, 2, 1)
    assert pool.forward(x)[0, 0, 0, 0] == 3.0
    g = pool.backward(np.ones((1, 1, 1, 1)))[0, :, :, 0]
    np.testing.assert_array_equal(g, [[0, 1], [0, 0]])
    odd = pool.forward(np.ones((1, 3, 3, 1)))
    assert odd.shape == (1, 2, 2, 1)
    with pytest.raises(ValueError):
        MaxPool2D(pad_to_even=False).forward(np.ones((1, 3, 2, 1)))


def test_class_avgpool_matches_loop_and_blocks_gradient():
    layout = make_layout([6, 6, 6])
    pool = ClassAvgPool(layout.cell_classes(), 3)
    x = np.random.default_rng(5).standard_normal((2, layout.height, layout.width, 1))
    out = pool.forward(x)
    cells = layout.cell_classes()
    for n in range(2):
        for c in range(3):
            vals = [x[n, r, k, 0] for r in range(layout.height) for k in range(layout.width)
                    if cells[r, k] == c]
            assert out[n, c] == pytest.approx(sum(vals) / len(vals))
    for c in range(3):
        d = np.zeros((1, 3))
        d[0, c] = 1.0
        g = pool.backward(d)[0, :, :, 0]
        assert np.all(g[cells != c] == 0) and np.all(g[cells == c] > 0)


def test_softmax_stability():
    s = Softmax()
    p = s.forward(np.array([[1000.0, 0.0, -1000.0], [1e-3, 2e-3, 3e-3]]))
    assert np.all(np.isfinite(p))
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
    lp = log_softmax(np.array([[50.0, 0.0]]))
    assert lp[0, 0] == pytest.approx(-np.exp(-50.0), rel=1e-10)


def test_non_finite_activation_names_layer():
    net = Network("toy", [Dense(2, 2), Softmax()])
    net.layers[0].params[0][...] = np.inf
    with pytest.raises(NumericalError, match="layer 0"):
        net.forward(np.ones((1, 2)))


def test_gradient_check_conventions():
    net = Network("z", [Dense(3, 2), Softmax()])
    for p in net.parameters():
        p[...] = 0.0
    x = np.zeros((2, 3))
    assert gradient_check(net, x, [0, 1], 1e-6) < 1e-8
    dense = Network("d", [Dense(4, 6, np.random.default_rng(0)), ReLU(),
                          Dense(6, 2, np.random.default_rng(1)), Softmax()])
    xr = np.random.default_rng(2).standard_normal((5, 4))
    assert gradient_check(dense, xr, [0, 1, 1, 0, 1], 1e-6) < 1e-6
    with pytest.raises(ValueError):
        gradient_check(dense, xr, [0] * 5, epsilon=1e-2)


def test_support_estimate():
    layout = make_layout([4, 4])
    assert support_estimate(np.zeros((2, 4)), 0.3, layout).size == 0
    v = np.zeros(8)
    v[[1, 6]] = 1.0
    assert support_estimate(reshape_to_plane(v, layout), 0.5, layout).tolist() == [1, 6]
    rng = np.random.default_rng(9)
    p = rng.uniform(size=(2, 4))
    flat = p[layout.atom_to_cell]
    brute = [j for j in range(8) if flat[j] > 0.4]
    assert support_estimate(p, 0.4, layout).tolist() == brute
    for tau in (0.0, 1.0):
        with pytest.raises(ValueError):
            support_estimate(p, tau, layout)


def _separable_planes(layout, n, rng):
    labels = rng.integers(0, 2, n)
    cells = layout.cell_classes()
    planes = rng.standard_normal((n, layout.height, layout.width))
    planes += 3.0 * (cells[None] == labels[:, None, None])
    return planes, labels


def test_csen1_learns_separable_planes():
    layout = make_layout([16, 16])
    rng = np.random.default_rng(10)
    X, y = _separable_planes(layout, 320, rng)
    net, history = train(build_csen1(layout, seed=1), X, y,
                         TrainConfig(lr=1e-4, epochs=15, batch_size=32, seed=1))
    assert len(history) == 15 and history[-1] < history[0]
    assert np.mean(net.predict(X) == y) >= 0.98


def test_training_deterministic_and_zero_lr():
    layout = make_layout([4, 4])
    rng = np.random.default_rng(11)
    X, y = _separable_planes(layout, 40, rng)
    cfg = TrainConfig(lr=1e-3, epochs=2, batch_size=8, seed=5)
    a, _ = train(build_csen1(layout, seed=2), X, y, cfg)
    b, _ = train(build_csen1(layout, seed=2), X, y, cfg)
    for p, q in zip(a.parameters(), b.parameters()):
        assert p.tobytes() == q.tobytes()
    net = build_csen1(layout, seed=2)
    before = [p.copy() for p in net.parameters()]
    train(net, X, y, TrainConfig(lr=0.0, epochs=2, batch_size=8))
    for p, q in zip(before, net.parameters()):
        assert p.tobytes() == q.tobytes()


def test_train_config_validation_and_mlp_defaults():
    cfg = TrainConfig(lr=1e-5, epochs=10, batch_size=32)
    assert (cfg.beta1, cfg.beta2) == (0.9, 0.999)
    with pytest.raises(ValueError):
        TrainConfig(beta1=1.0)
    with pytest.raises(ValueError):
        TrainConfig(lr=-1.0)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_reports_history():
    net = Network("d", [Dense(2, 2), Softmax()])
    X = np.ones((4, 2))
    net.layers[0].params[0][...] = 1e308
    with pytest.raises((TrainingDiverged, NumericalError)):
        train(net, X * 1e10, np.array([0, 1, 0, 1]), TrainConfig(epochs=1))
