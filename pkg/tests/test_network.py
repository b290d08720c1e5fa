import numpy as np
import pytest

from rsfpinn.autodiff import Jet, Var, grad_params
from rsfpinn.autodiff import jet as J
from rsfpinn.autodiff import _kernels_py, kernels
from rsfpinn.network import (
    MLP,
    TrialFunction,
    forward,
    forward_array,
    forward_scalar,
    init_xavier,
    load_checkpoint,
    param_count,
    save_checkpoint,
    xavier_bound,
)

from helpers import central_diff, reference_mlp, rel_err


def test_xavier_bound_64():
    assert xavier_bound(64, 64) == pytest.approx(0.21651, abs=1e-5)


def test_param_count_1d_net():
    assert param_count([2, 64, 64, 64, 1]) == 8577
    assert init_xavier([2, 64, 64, 64, 1], ["tanh"] * 3, 0).n_params == 8577


def test_xavier_weights_inside_bound_and_zero_biases():
    net = init_xavier([3, 16, 8, 1], ["tanh", "relu"], 7)
    for (w, b), (m, n) in zip(net.unflatten(), net.shapes()):
        assert np.all(np.abs(w) < xavier_bound(n, m))
        assert np.all(b == 0.0)


def test_init_is_reproducible():
    a = init_xavier([2, 8, 1], ["tanh"], 11)
    b = init_xavier([2, 8, 1], ["tanh"], 11)
    c = init_xavier([2, 8, 1], ["tanh"], 12)
    assert np.array_equal(a.params, b.params) and not np.array_equal(a.params, c.params)


@pytest.mark.parametrize("dims", [[0, 4, 1], [2, -1, 1]])
def test_invalid_dims_rejected(dims):
    with pytest.raises(ValueError):
        init_xavier(dims, ["tanh"], 0)


def test_unknown_activation_rejected():
    with pytest.raises(ValueError):
        init_xavier([1, 4, 1], ["gelu"], 0)


def test_zero_network_outputs_zero():
    net = MLP([2, 5, 1], ["tanh"], np.zeros(param_count([2, 5, 1])))
    assert np.all(forward(net, (np.array([0.3, 4.0]), np.array([1.0, -2.0]))) == 0.0)


def test_identity_chain_returns_output_bias():
    # W0 = [[1]], b0 = [0], tanh; output layer W = [[2]], b = [0.25]
    net = MLP([1, 1, 1], ["tanh"], np.array([1.0, 0.0, 2.0, 0.25]))
    assert forward(net, (np.array([0.0]),))[0] == 0.25


@pytest.mark.parametrize("acts", [["tanh", "tanh"], ["relu", "silu"], ["silu", "relu"]])
def test_forward_matches_reference(acts):
    dims = [3, 12, 9, 2]
    net = init_xavier(dims, acts, 4)
    net.params = net.params + np.random.default_rng(1).normal(scale=0.1, size=net.n_params)
    x = np.random.default_rng(2).normal(size=(20, 3))
    expect = reference_mlp(dims, acts, net.params, x)
    np.testing.assert_allclose(forward_array(net, x), expect, rtol=0, atol=1e-14)
    got = forward(net, tuple(x.T))
    np.testing.assert_allclose(got, expect, rtol=0, atol=1e-14)


def test_input_count_mismatch():
    net = init_xavier([2, 4, 1], ["tanh"], 0)
    with pytest.raises(ValueError):
        forward(net, (np.zeros(3),))
    with pytest.raises(ValueError):
        forward_array(net, np.zeros((3, 3)))


def test_packed_jets_match_scalar_path():
    net = init_xavier([2, 6, 5, 1], ["tanh", "silu"], 9)
    x = np.array([0.1, 0.4, -0.3])
    t = np.array([0.2, 0.9, 0.5])
    a = forward(net, (Jet.seed(x, 0, 2), Jet.seed(t, 1, 2)))
    b = forward_scalar(net, (Jet.seed(x, 0, 2), Jet.seed(t, 1, 2)))
    np.testing.assert_allclose(a.val, b.val, atol=1e-14)
    for k in range(2):
        np.testing.assert_allclose(a.d[k], b.d[k], atol=1e-13)
        np.testing.assert_allclose(a.dd[k], b.dd[k], atol=1e-12)


def test_parameter_gradient_through_laplacian_matches_fd():
    net = init_xavier([2, 5, 4, 1], ["tanh", "tanh"], 2)
    x = np.array([0.1, -0.5, 0.7])
    z = np.array([0.3, 0.2, -0.4])

    def loss(theta):
        u = forward(net, (Jet.seed(x, 0, 2), Jet.seed(z, 1, 2)), theta)
        r = u.dd[0] + u.dd[1] - u.val
        return (r * r).mean()

    _, g = grad_params(loss, net.params)
    fd = central_diff(lambda th: float(loss(th)), net.params)
    assert rel_err(g, fd) <= 1e-6


def test_trial_function_hard_ic_exactness():
    net = init_xavier([2, 8, 8, 1], ["tanh", "tanh"], 3)
    u0 = lambda x: np.sin(3 * x)
    v0 = lambda x: np.cos(x) * 0.5
    tf = TrialFunction(net, "hard_ic", u0, v0)
    x = np.random.default_rng(0).uniform(0, 1, 1000)
    t0 = np.zeros_like(x)
    assert np.array_equal(tf(x, t0), u0(x))
    u = tf(x, Jet.seed(t0, 0, 1))
    assert np.max(np.abs(u.d[0] - v0(x))) <= 1e-15


def test_trial_function_t_squared():
    net = MLP([2, 1, 1], ["tanh"], np.array([0.0, 0.0, 0.0, 0.0, 1.0]))  # N ≡ 1
    zero = lambda x: np.zeros_like(x)
    tf = TrialFunction(net, "hard_ic", zero, zero)
    t = np.array([0.0, 0.5, 2.0])
    np.testing.assert_allclose(tf(np.ones(3), t), t * t)


def test_trial_function_state_variant():
    net = init_xavier([1, 4, 1], ["tanh"], 0)
    tf = TrialFunction(net, "hard_ic", psi0=-3.0)
    assert tf(np.array([0.0]))[0] == -3.0


def test_trial_function_requires_ic_handles():
    net = init_xavier([2, 4, 1], ["tanh"], 0)
    with pytest.raises(ValueError):
        TrialFunction(net, "hard_ic")
    with pytest.raises(ValueError):
        TrialFunction(net, "exact")


def test_activation_basics():
    assert J.silu(np.array(0.0)) == 0.0
    assert J.relu(np.array(-3.0)) == 0.0 and J.relu(np.array(2.0)) == 2.0
    x = 1.3
    h = 1e-6
    fd = (J.silu(np.array(x + h)) - J.silu(np.array(x - h))) / (2 * h)
    d = J.silu(Jet.seed(x, 0, 1)).d[0]
    assert abs(d - fd) / abs(fd) <= 1e-6


def test_checkpoint_round_trip(tmp_path):
    net = init_xavier([3, 7, 7, 1], ["relu", "silu"], 5)
    p = save_checkpoint(net, tmp_path / "alpha.npz")
    back = load_checkpoint(p)
    assert back.layer_dims == net.layer_dims and back.activations == net.activations
    assert back.params.tobytes() == net.params.tobytes()


def test_checkpoint_rejects_foreign_format(tmp_path):
    p = tmp_path / "x.npz"
    np.savez(p, format=np.array("other"), layer_dims=np.array([1, 1]), activations=np.array([], dtype=str),
             params=np.zeros(2))
    with pytest.raises(ValueError):
        load_checkpoint(p)


# kernels ------------------------------------------------------------------

@pytest.fixture
def packed():
    rng = np.random.default_rng(0)
    return rng.normal(size=(7, 40, 16)), rng.normal(size=(7, 40, 16))


def test_compiled_tanh_kernel_matches_numpy(packed):
    pre, grad = packed
    post_py = _kernels_py.tanh_jet_forward(pre)
    post = kernels.tanh_jet_forward(pre)
    np.testing.assert_allclose(post, post_py, rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(kernels.tanh_jet_backward(pre, post, grad),
                               _kernels_py.tanh_jet_backward(pre, post_py, grad), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("name", ["tanh", "silu", "relu"])
def test_activation_jet_backward_matches_fd(name, packed):
    pre, grad = packed
    fwd = getattr(_kernels_py, f"{name}_jet_forward")
    bwd = getattr(_kernels_py, f"{name}_jet_backward")
    pre = pre[:, :3, :2].copy()
    grad = grad[:, :3, :2].copy()
    post = fwd(pre)
    g = bwd(pre, post, grad).ravel()
    fd = central_diff(lambda p: float(np.sum(fwd(p.reshape(pre.shape)) * grad)), pre.ravel(), h=1e-6)
    assert rel_err(g, fd) <= 1e-6
