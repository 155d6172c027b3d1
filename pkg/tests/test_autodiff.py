import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pinnmg.autodiff import (
    LossFunction,
    UnsupportedDerivativeError,
    fd_check,
    forward_jets,
    forward_laplacian,
    loss_gradient,
    residual_loss,
    tree_sum,
)
from pinnmg.net import NetworkConfig, forward, unpack, xavier_init
from pinnmg.problems import Problem, get_problem
from pinnmg.sampling import TrainingSet, make_training_set

ZERO = Problem("zero", lambda x, y: 0.0 * x)


def small_set(n_int=14, n_bnd=6, seed=0):
    rng = np.random.default_rng(seed)
    interior = rng.uniform(0.05, 0.95, (n_int, 2))
    t = rng.random(n_bnd)
    side = rng.integers(0, 4, n_bnd)
    bnd = np.column_stack([np.where(side == 0, 0.0, np.where(side == 1, 1.0, t)),
                           np.where(side == 2, 0.0, np.where(side == 3, 1.0, t))])
    return TrainingSet(interior, bnd, np.zeros(n_bnd))


def test_single_unit_closed_form():
    # u = tanh(3x + 2y) + 0.5, lap u = -2 s (1 - s^2) (3^2 + 2^2)
    cfg = NetworkConfig((2, 1, 1), "tanh")
    theta = np.array([3.0, 2.0, 0.0, 1.0, 0.5])
    x, y = 0.2, 0.1
    t = 3 * x + 2 * y
    s = np.tanh(t)
    u, lap = forward_laplacian(theta, cfg, (x, y))
    assert u == pytest.approx(s + 0.5, rel=1e-15)
    assert lap == pytest.approx(-2 * s * (1 - s * s) * 13, rel=1e-13)


def test_linear_output_layer_laplacian_zero():
    # sine units in their linear regime: u = 3x + 2y up to O(1e-18)
    cfg = NetworkConfig((2, 2, 1), "sine")
    W1 = np.array([[1e-9 * 3, 0.0], [0.0, 1e-9 * 2]])
    theta = np.concatenate([W1.ravel(), [0, 0], [1e9, 1e9], [0.0]])
    u, lap = forward_laplacian(theta, cfg, (0.3, 0.7))
    assert u == pytest.approx(3 * 0.3 + 2 * 0.7, rel=1e-12)
    assert abs(lap) < 1e-6


def test_zero_network():
    cfg = NetworkConfig.mlp([7, 7])
    assert forward_laplacian(np.zeros(cfg.n_params), cfg, (0.4, 0.6)) == (0.0, 0.0)


def fd_laplacian(theta, cfg, pts, h=1e-4):
    f = lambda p: forward(theta, cfg, p)
    ex, ey = np.array([h, 0.0]), np.array([0.0, h])
    return (f(pts + ex) + f(pts - ex) + f(pts + ey) + f(pts - ey) - 4 * f(pts)) / h**2


@pytest.mark.parametrize("act", ["tanh", "sigmoid", "swish", "sine", "laaf-tanh"])
def test_laplacian_vs_five_point(act):
    cfg = NetworkConfig.mlp([12, 12], act, 5 if act.startswith("laaf") else None)
    theta = xavier_init(cfg, 2)
    pts = np.random.default_rng(1).random((30, 2))
    u, lap = forward_laplacian(theta, cfg, pts)
    np.testing.assert_allclose(u, forward(theta, cfg, pts), rtol=1e-14, atol=1e-16)
    fd = fd_laplacian(theta, cfg, pts)
    assert np.max(np.abs(fd - lap) / np.maximum(np.abs(lap), 1.0)) < 1e-5


def test_first_derivatives_vs_fd():
    cfg = NetworkConfig.mlp([9, 9], "swish")
    theta = xavier_init(cfg, 4)
    pts = np.random.default_rng(0).random((10, 2))
    jet = forward_jets(theta, cfg, pts)
    h = 1e-6
    fx = (forward(theta, cfg, pts + [h, 0]) - forward(theta, cfg, pts - [h, 0])) / (2 * h)
    fy = (forward(theta, cfg, pts + [0, h]) - forward(theta, cfg, pts - [0, h])) / (2 * h)
    np.testing.assert_allclose(jet.dx, fx, atol=1e-8)
    np.testing.assert_allclose(jet.dy, fy, atol=1e-8)


def test_relu_rejected():
    cfg = NetworkConfig.mlp([4], "relu")
    with pytest.raises(UnsupportedDerivativeError):
        forward_laplacian(np.zeros(cfg.n_params), cfg, (0.5, 0.5))
    with pytest.raises(UnsupportedDerivativeError):
        loss_gradient(np.zeros(cfg.n_params), cfg, small_set(), ZERO)


def block_diagonal(cfg_a, ta, cfg_b, tb):
    """Parameters of a net whose output is net_a + net_b (same depth, same activation)."""
    la, _ = unpack(ta, cfg_a)
    lb, _ = unpack(tb, cfg_b)
    parts = []
    for l, ((Wa, ba), (Wb, bb)) in enumerate(zip(la, lb)):
        if l == 0:
            W = np.vstack([Wa, Wb])
        elif l == len(la) - 1:
            W = np.hstack([Wa, Wb])
        else:
            W = np.block([[Wa, np.zeros((Wa.shape[0], Wb.shape[1]))],
                          [np.zeros((Wb.shape[0], Wa.shape[1])), Wb]])
        b = ba + bb if l == len(la) - 1 else np.concatenate([ba, bb])
        parts += [W.ravel(), b]
    sizes = [2] + [a + b for a, b in zip(cfg_a.layer_sizes[1:-1], cfg_b.layer_sizes[1:-1])] + [1]
    return NetworkConfig(tuple(sizes), cfg_a.activation), np.concatenate(parts)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), depth=st.integers(1, 3))
def test_laplacian_linearity_block_diagonal(seed, depth):
    ca = NetworkConfig.mlp([5] * depth, "tanh")
    cb = NetworkConfig.mlp([3] * depth, "tanh")
    ta, tb = xavier_init(ca, seed), xavier_init(cb, seed + 1)
    ta[-1], tb[-1] = 0.3, -0.1
    cs, ts = block_diagonal(ca, ta, cb, tb)
    pts = np.random.default_rng(seed).random((8, 2))
    ua, la = forward_laplacian(ta, ca, pts)
    ub, lb = forward_laplacian(tb, cb, pts)
    us, ls = forward_laplacian(ts, cs, pts)
    np.testing.assert_allclose(us, ua + ub, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(ls, la + lb, rtol=1e-12, atol=1e-12)


def test_loss_zero_problem_zero_network():
    cfg = NetworkConfig.mlp([6])
    parts, g = loss_gradient(np.zeros(cfg.n_params), cfg, small_set(), ZERO)
    assert parts.total == 0.0
    np.testing.assert_array_equal(g, 0.0)


def test_constant_network_loss():
    cfg = NetworkConfig.mlp([6])
    theta = np.zeros(cfg.n_params)
    theta[-1] = 0.25
    parts = residual_loss(theta, cfg, small_set(), ZERO)
    assert parts.interior == 0.0
    assert parts.boundary == pytest.approx(0.0625, rel=1e-15)
    assert parts.total == parts.interior + parts.boundary_weight * parts.boundary


def test_boundary_weight():
    cfg = NetworkConfig.mlp([6])
    theta = xavier_init(cfg, 0)
    theta[-1] = 0.5
    p = get_problem("foursines")
    a = residual_loss(theta, cfg, small_set(), p)
    b = residual_loss(theta, cfg, small_set(), p, boundary_weight=3.0)
    assert b.total == pytest.approx(a.interior + 3 * a.boundary, rel=1e-14)


def test_empty_interior_rejected():
    cfg = NetworkConfig.mlp([3])
    ts = TrainingSet(np.zeros((0, 2)), np.array([[0.0, 0.5]]), np.zeros(1))
    with pytest.raises(ValueError):
        residual_loss(np.zeros(cfg.n_params), cfg, ts, ZERO)


GRADIENT_CASES = [
    (act, depth, seed)
    for seed, (act, depth) in enumerate(
        [(a, d) for a in ("tanh", "sigmoid", "swish", "sine", "laaf-tanh", "laaf-sigmoid", "laaf-swish")
         for d in (1, 3, 6)])
]


@pytest.mark.parametrize("act,depth,seed", GRADIENT_CASES[:8])
def test_gradient_matches_fd(act, depth, seed):
    width = 8 if depth <= 3 else 6
    cfg = NetworkConfig.mlp([width] * depth, act, 5 if act.startswith("laaf") else None)
    theta = xavier_init(cfg, seed)
    theta[-1] = 0.1
    assert fd_check(theta, cfg, small_set(seed=seed), get_problem("foursines")) < 1e-5


def test_fd_check_two_point_stencil():
    cfg = NetworkConfig((2, 8, 8, 1), "tanh")
    theta = xavier_init(cfg, 1)
    p = get_problem("foursines")
    ts = small_set(seed=1)
    fine = fd_check(theta, cfg, ts, p, h=1e-6, order=2)
    coarse = fd_check(theta, cfg, ts, p, h=1e-1, order=2)
    assert coarse > fine
    assert fine < 1e-4


def test_fd_check_zero_gradient_point():
    cfg = NetworkConfig.mlp([5])
    assert fd_check(np.zeros(cfg.n_params), cfg, small_set(), ZERO) == 0.0


def test_duplication_invariance():
    cfg = NetworkConfig.mlp([8, 8])
    theta = xavier_init(cfg, 3)
    theta[-1] = 0.2
    p = get_problem("foursines")
    ts = small_set()
    pa, ga = loss_gradient(theta, cfg, ts, p)
    pb, gb = loss_gradient(theta, cfg, ts.duplicated(), p)
    assert pb.total == pytest.approx(pa.total, rel=1e-14)
    np.testing.assert_allclose(gb, ga, rtol=1e-12, atol=1e-15)


def test_loss_permutation_invariant():
    cfg = NetworkConfig.mlp([10, 10])
    theta = xavier_init(cfg, 9)
    theta[-1] = 0.1
    p = get_problem("foursines")
    ts = make_training_set(p, "pseudo-random", 200, 40, seed=2)
    rng = np.random.default_rng(0)
    pi, pb = rng.permutation(ts.n_interior), rng.permutation(ts.n_boundary)
    shuffled = TrainingSet(ts.interior[pi], ts.boundary[pb], ts.boundary_values[pb])
    assert residual_loss(theta, cfg, shuffled, p).total == residual_loss(theta, cfg, ts, p).total


def test_tree_sum_order_independent():
    v = np.random.default_rng(0).standard_normal(10_001) * 1e3
    assert tree_sum(v) == tree_sum(v[::-1]) == tree_sum(np.random.default_rng(1).permutation(v))


def test_float32_loss_close_to_float64():
    cfg = NetworkConfig.mlp([20, 20])
    theta = xavier_init(cfg, 0)
    p = get_problem("foursines")
    ts = small_set(60, 20)
    a = LossFunction(cfg, ts, p).value_and_grad(theta)
    b = LossFunction(cfg.with_precision(32), ts, p).value_and_grad(theta.astype(np.float32))
    assert b[1].dtype == np.float32
    assert b[0].total == pytest.approx(a[0].total, rel=1e-4)
    np.testing.assert_allclose(b[1], a[1], rtol=1e-2, atol=1e-4 * np.abs(a[1]).max())


def test_initial_loss_near_source_energy():
    # a freshly initialized net has a tiny Laplacian, so the initial loss sits
    # near mean(f^2) = (1/16) * sum_k (2k)^2 / 4 = 15/8 for the four-sine source
    p = get_problem("foursines")
    ts = make_training_set(p, "sobol", (128, 128), 4000)
    cfg = NetworkConfig.mlp([50] * 4)
    zero = residual_loss(np.zeros(cfg.n_params), cfg, ts, p)
    assert zero.interior == pytest.approx(15 / 8, rel=1e-2)
    for s in range(3):
        assert 1.0 <= residual_loss(xavier_init(cfg, s), cfg, ts, p).total <= 5.0
