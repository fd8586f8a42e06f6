import numpy as np
import pytest

from platoonsim.core.errors import StructuralError
from platoonsim.core.neuralnet import (
    IDENTITY, RELU, TANH, DenseLayer, Mlp, adam_init, adam_step, backward, forward, init_mlp, soft_update,
)


def _identity_layer(weight, bias):
    return Mlp([DenseLayer(np.array(weight, dtype=float), np.array(bias, dtype=float), IDENTITY)])


def _weighted_sum(net, x, upstream):
    out, _ = forward(net, x)
    return float(np.sum(out * upstream))


def _finite_difference(net, x, upstream, step=1e-5):
    grads = []
    arrays = [a.copy() for a in net.arrays()]
    for i, param in enumerate(arrays):
        grad = np.zeros_like(param)
        for idx in np.ndindex(param.shape):
            plus = [a.copy() for a in arrays]
            minus = [a.copy() for a in arrays]
            plus[i][idx] += step
            minus[i][idx] -= step
            grad[idx] = (_weighted_sum(net.with_arrays(plus), x, upstream)
                         - _weighted_sum(net.with_arrays(minus), x, upstream)) / (2 * step)
        grads.append(grad)
    return grads


def _relative_error(analytic, numeric):
    a = np.concatenate([g.ravel() for g in analytic])
    n = np.concatenate([g.ravel() for g in numeric])
    return np.linalg.norm(a - n) / max(np.linalg.norm(a) + np.linalg.norm(n), 1e-12)


def test_forward_single_identity_layer():
    out, _ = forward(_identity_layer([[2.0]], [1.0]), np.array([3.0]))
    assert out == pytest.approx([7.0])


def test_forward_zero_network():
    net = Mlp([
        DenseLayer(np.zeros((3, 4)), np.zeros(3), RELU),
        DenseLayer(np.zeros((2, 3)), np.zeros(2), TANH),
    ])
    out, cache = forward(net, np.array([1.0, -2.0, 3.0, 4.0]))
    assert np.all(out == 0.0)
    assert np.all(cache.outputs[0] == 0.0)


def test_forward_batch_matches_single_rows():
    net = init_mlp([4, 5, 2], [RELU, TANH], np.random.default_rng(0), final_scale=1.0)
    x = np.random.default_rng(1).normal(size=(6, 4))
    batch, _ = forward(net, x)
    assert batch.shape == (6, 2)
    for row, expected in zip(x, batch):
        single, _ = forward(net, row)
        np.testing.assert_allclose(single, expected)


def test_tanh_output_is_bounded():
    net = init_mlp([3, 8, 1], [RELU, TANH], np.random.default_rng(2), final_scale=100.0)
    out, _ = forward(net, np.random.default_rng(3).normal(scale=50.0, size=(100, 3)))
    assert np.all(np.abs(out) <= 1.0)


def test_forward_rejects_wrong_input_width():
    net = init_mlp([4, 2], [IDENTITY], np.random.default_rng(0))
    with pytest.raises(StructuralError):
        forward(net, np.zeros(3))


def test_layers_must_chain():
    with pytest.raises(StructuralError):
        Mlp([DenseLayer(np.zeros((3, 2)), np.zeros(3)), DenseLayer(np.zeros((1, 4)), np.zeros(1))])


def test_backward_zero_upstream():
    net = init_mlp([3, 4, 2], [RELU, IDENTITY], np.random.default_rng(0))
    _, cache = forward(net, np.ones(3))
    grads, dx = backward(net, cache, np.zeros(2))
    assert all(np.all(g == 0.0) for g in grads)
    assert np.all(dx == 0.0)


def test_backward_single_identity_layer():
    net = _identity_layer([[0.5, -1.0, 2.0], [1.5, 0.0, -0.5]], [0.1, 0.2])
    u = np.array([1.0, 2.0, 3.0])
    g = np.array([0.3, -0.7])
    _, cache = forward(net, u)
    (grad_w, grad_b), dx = backward(net, cache, g)
    np.testing.assert_allclose(grad_w, np.outer(g, u))
    np.testing.assert_allclose(grad_b, g)
    np.testing.assert_allclose(dx, net.layers[0].weight.T @ g)


def test_backward_rejects_foreign_cache():
    net = init_mlp([3, 4, 2], [RELU, IDENTITY], np.random.default_rng(0))
    other = init_mlp([5, 2], [IDENTITY], np.random.default_rng(0))
    _, cache = forward(other, np.ones(5))
    with pytest.raises(StructuralError):
        backward(net, cache, np.ones(2))
    _, cache = forward(net, np.ones(3))
    with pytest.raises(StructuralError):
        backward(net, cache, np.ones(3))


def test_gradients_match_finite_differences():
    """100 random smooth networks and inputs."""
    rng = np.random.default_rng(42)
    for _ in range(100):
        dims = [int(d) for d in rng.integers(1, 5, size=rng.integers(2, 5))]
        activations = [TANH] * (len(dims) - 2) + [rng.choice([TANH, IDENTITY])]
        net = init_mlp(dims, activations, rng, final_scale=1.0)
        x = rng.normal(size=(int(rng.integers(1, 4)), dims[0]))
        upstream = rng.normal(size=(len(x), dims[-1]))
        _, cache = forward(net, x)
        analytic, _ = backward(net, cache, upstream)
        assert _relative_error(analytic, _finite_difference(net, x, upstream)) < 1e-4


def test_relu_network_gradients_match_finite_differences():
    rng = np.random.default_rng(7)
    net = init_mlp([6, 16, 16, 1], [RELU, RELU, TANH], rng, final_scale=1.0)
    x = rng.normal(size=(4, 6))
    upstream = np.ones((4, 1)) / 4
    _, cache = forward(net, x)
    analytic, _ = backward(net, cache, upstream)
    assert _relative_error(analytic, _finite_difference(net, x, upstream)) < 1e-4


def test_input_gradient_matches_finite_differences():
    rng = np.random.default_rng(5)
    net = init_mlp([3, 6, 1], [TANH, IDENTITY], rng, final_scale=1.0)
    x = rng.normal(size=3)
    _, cache = forward(net, x)
    _, dx = backward(net, cache, np.ones(1))
    numeric = np.array([
        (forward(net, x + e)[0][0] - forward(net, x - e)[0][0]) / 2e-5 for e in np.eye(3) * 1e-5
    ])
    np.testing.assert_allclose(dx, numeric, rtol=1e-6, atol=1e-9)


def test_adam_zero_gradient_keeps_parameters():
    net = init_mlp([2, 3, 1], [RELU, IDENTITY], np.random.default_rng(0))
    state = adam_init(net)
    updated, state = adam_step(net, [np.zeros_like(p) for p in net.arrays()], state, 1e-3)
    assert state.step == 1
    for before, after in zip(net.arrays(), updated.arrays()):
        np.testing.assert_array_equal(before, after)


def test_adam_first_step_moves_each_parameter_by_lr():
    net = _identity_layer([[1.0, -1.0]], [0.5])
    grads = [np.array([[0.3, -2.0]]), np.array([5.0])]
    updated, _ = adam_step(net, grads, adam_init(net), 0.01)
    np.testing.assert_allclose(updated.layers[0].weight, [[0.99, -0.99]], rtol=1e-6)
    np.testing.assert_allclose(updated.layers[0].bias, [0.49], rtol=1e-6)


def test_adam_rejects_mismatched_gradients():
    net = _identity_layer([[1.0, -1.0]], [0.5])
    with pytest.raises(StructuralError):
        adam_step(net, [np.zeros((2, 2)), np.zeros(1)], adam_init(net), 0.01)


def test_soft_update_tracks_source():
    target = _identity_layer([[0.0]], [0.0])
    source = _identity_layer([[1.0]], [2.0])
    tracked = soft_update(target, source, 0.001)
    assert tracked.layers[0].weight[0, 0] == pytest.approx(0.001, abs=1e-12)
    assert tracked.layers[0].bias[0] == pytest.approx(0.002, abs=1e-12)


def test_soft_update_with_tau_one_copies():
    rng = np.random.default_rng(9)
    target = init_mlp([6, 8, 1], [RELU, TANH], rng)
    source = init_mlp([6, 8, 1], [RELU, TANH], rng)
    for t, s in zip(soft_update(target, source, 1.0).arrays(), source.arrays()):
        np.testing.assert_array_equal(t, s)


def test_adam_with_zero_learning_rate_keeps_parameters():
    rng = np.random.default_rng(4)
    net = init_mlp([3, 5, 1], [RELU, TANH], rng)
    grads = [rng.normal(size=p.shape) for p in net.arrays()]
    updated, state = adam_step(net, grads, adam_init(net), 0.0)
    updated, _ = adam_step(updated, grads, state, 0.0)
    for before, after in zip(net.arrays(), updated.arrays()):
        np.testing.assert_array_equal(before, after)


def test_adam_repeated_gradient_moves_less_than_lr():
    net = _identity_layer([[1.0]], [0.0])
    grads = [np.array([[0.3]]), np.array([0.3])]
    lr = 0.01
    first, state = adam_step(net, grads, adam_init(net), lr)
    second, _ = adam_step(first, grads, state, lr)
    step = first.layers[0].weight[0, 0] - second.layers[0].weight[0, 0]
    assert 0.0 < step / lr < 1.0
