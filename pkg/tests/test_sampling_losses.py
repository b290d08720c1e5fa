import numpy as np
import pytest

from rsfpinn import physics
from rsfpinn.autodiff import grad_params
from rsfpinn.losses import (
    LossReport,
    component_loss,
    fault_residual_inverse,
    loss_1d,
    loss_2d_forward,
    loss_2d_inverse_fault,
    objective,
    read_loss_csv,
    residual_2d,
    write_loss_csv,
)
from rsfpinn.network import MLP, TrialFunction, init_xavier, param_count
from rsfpinn.sampling import Domain, SubdomainSpec, default_counts, sample, subdomain_specs, TAGS_1D, TAGS_2D

CASE1 = physics.mms_1d()
CASE2 = physics.mms_2d()


def sech2(w):
    return 1.0 / np.cosh(w) ** 2


# sampling ------------------------------------------------------------------

def _specs(dim, enforcement="soft", n=200):
    dom = Domain(dim, *((1.0, 1.0) if dim == 1 else (25.0, 25.0)))
    counts = {k: n for k in default_counts(dim)}
    return {s.tag: s for s in subdomain_specs(dom, counts, enforcement)}


def test_fault_points_geometry():
    pts = sample(_specs(2)["fault"], np.random.default_rng(0))
    assert np.all(pts["x"] == 0.0)
    assert np.all((pts["z"] >= 0) & (pts["z"] <= 25)) and np.all((pts["t"] > 0) & (pts["t"] <= 1))


@pytest.mark.parametrize("dim", [1, 2])
def test_ic_points_at_time_zero(dim):
    for tag in ("ic_disp", "ic_vel"):
        assert np.all(sample(_specs(dim)[tag], np.random.default_rng(1))["t"] == 0.0)


def test_boundary_time_excludes_zero_interior_includes_range():
    rng = np.random.default_rng(2)
    t = sample(_specs(1)["x0"], rng)["t"]
    assert t.min() > 0.0 and t.max() <= 1.0
    om = sample(_specs(1)["omega"], rng)
    assert om["x"].min() >= 0 and om["x"].max() < 1


def test_sampling_deterministic():
    s = _specs(2)["omega"]
    a = sample(s, np.random.default_rng(5))
    b = sample(s, np.random.default_rng(5))
    assert all(np.array_equal(a[k], b[k]) for k in a)


def test_hard_enforcement_drops_ic_terms():
    assert set(_specs(2, "hard")) == set(TAGS_2D) - {"ic_disp", "ic_vel"}
    assert set(_specs(1, "hard")) == set(TAGS_1D) - {"ic_disp", "ic_vel", "ic_state"}
    assert set(_specs(1, "soft")) == set(TAGS_1D)


def test_default_counts():
    c2 = default_counts(2)
    assert c2["omega"] == 400 and sum(c2[k] for k in ("fault", "surface", "remote", "depth")) == 400
    assert c2["ic_disp"] + c2["ic_vel"] == 400
    c1 = default_counts(1)
    assert c1["omega"] == 100 and c1["x0"] + c1["x1"] == 50


def test_nonpositive_count_rejected():
    with pytest.raises(ValueError):
        SubdomainSpec("omega", {"x": (0.0, 1.0)}, 0)


# MMS annihilation ------------------------------------------------------------

@pytest.mark.parametrize("tag", TAGS_1D)
def test_exact_solution_annihilates_1d(tag):
    nets = {"u": CASE1.u_exact, "psi": CASE1.psi_exact}
    pts = sample(_specs(1)[tag], np.random.default_rng(3))
    assert loss_1d(tag, pts, nets, CASE1) <= 1e-12


@pytest.mark.parametrize("tag", TAGS_2D)
def test_exact_solution_annihilates_2d(tag):
    pts = sample(_specs(2)[tag], np.random.default_rng(4))
    assert loss_2d_forward(tag, pts, {"u": CASE2.u_exact}, CASE2) <= 1e-12


def test_exact_solution_annihilates_inverse_fault():
    pts = sample(_specs(2)["fault"], np.random.default_rng(6))
    assert loss_2d_inverse_fault(pts, {"u": CASE2.u_exact, "alpha": CASE2.alpha_exact}, CASE2) <= 1e-12


def test_unknown_tag_rejected():
    with pytest.raises(ValueError):
        loss_1d("fault", {"x": np.zeros(1), "t": np.zeros(1)}, {}, CASE1)
    with pytest.raises(ValueError):
        residual_2d("x0", {"x": np.zeros(1), "z": np.zeros(1), "t": np.zeros(1)}, {}, CASE2)


# residual oracles --------------------------------------------------------

def test_zero_network_hard_mode_interior_loss():
    net = MLP([2, 4, 1], ["tanh"], np.zeros(param_count([2, 4, 1])))
    u = TrialFunction(net, "hard_ic", CASE1.u0, CASE1.v0)
    rng = np.random.default_rng(7)
    x, t = rng.uniform(0, 1, 5), rng.uniform(0, 1, 5)
    c = physics.MaterialParams().c
    w = 0.5 * (x + 1)
    u0_xx = 0.25 * (-2 * np.tanh(w) * sech2(w))
    v0_xx = -0.5 * c * 0.25 * (4 * np.tanh(w) ** 2 * sech2(w) - 2 * sech2(w) ** 2)
    r = 0.0 - c ** 2 * (u0_xx + t * v0_xx)  # s ≡ 0 for this solution
    got = loss_1d("omega", {"x": x, "t": t}, {"u": u}, CASE1)
    assert got == pytest.approx(np.mean(r * r), rel=1e-12)


def test_single_point_loss_is_square_of_residual():
    pts = {"x": np.array([0.3]), "t": np.array([0.0])}
    u = lambda x, t: CASE1.u0(x) + 0.25
    assert loss_1d("ic_disp", pts, {"u": u}, CASE1) == pytest.approx(0.0625, rel=1e-14)


def _one_layer_derivs(W, b, w2, b2, X):
    """u and its per-coordinate first/second derivatives for w2·tanh(WX + b) + b2."""
    pre = X @ W.T + b
    th = np.tanh(pre)
    s = 1 - th ** 2
    u = th @ w2 + b2
    d1 = [(s * W[:, i]) @ w2 for i in range(3)]
    d2 = [(-2 * th * s * W[:, i] ** 2) @ w2 for i in range(3)]
    return u, d1, d2


def test_random_net_residuals_match_oracle_2d():
    rng = np.random.default_rng(8)
    W, b, w2, b2 = rng.normal(size=(5, 3)), rng.normal(size=5), rng.normal(size=5), 0.3
    net = MLP([3, 5, 1], ["tanh"], np.concatenate([W.ravel(), b, w2, [b2]]))
    m, p = CASE2.material, CASE2.friction
    pts = {"x": rng.uniform(0, 25, 3), "z": rng.uniform(0, 25, 3), "t": rng.uniform(0, 1, 3)}
    X = np.stack([pts["x"], pts["z"], pts["t"]], axis=1)
    u, d1, d2 = _one_layer_derivs(W, b, w2, b2, X)
    x, z, t = pts["x"], pts["z"], pts["t"]
    expect = {
        "omega": d2[2] - m.c ** 2 * (d2[0] + d2[1]) - CASE2.data["S"](x, z, t),
        "surface": -m.mu * d1[1] - CASE2.data["gs"](x, t),
        "remote": m.Z * d1[2] + m.mu * d1[0] - CASE2.data["gr"](z, t),
        "depth": m.Z * d1[2] + m.mu * d1[1] - CASE2.data["gd"](x, t),
        "fault": -m.mu * d1[0] - p.sigma_n * (p.f0 + CASE2.alpha_exact(z) * np.log(np.abs(2 * d1[2]) / p.V0))
                 - CASE2.data["gf"](z, t),
        "ic_disp": u - CASE2.u0(x, z),
        "ic_vel": d1[2] - CASE2.v0(x, z),
    }
    for tag, r in expect.items():
        got = loss_2d_forward(tag, pts, {"u": net}, CASE2)
        assert got == pytest.approx(float(np.mean(r * r)), rel=1e-12, abs=1e-14), tag


def test_zero_alpha_network_inverse_fault_residual():
    p = CASE2.friction
    alpha = MLP([1, 4, 1], ["relu"], np.zeros(param_count([1, 4, 1])))
    rng = np.random.default_rng(9)
    pts = {"x": np.zeros(6), "z": rng.uniform(0, 25, 6), "t": rng.uniform(0, 1, 6)}
    r = fault_residual_inverse(pts, {"u": CASE2.u_exact, "alpha": alpha}, CASE2)
    V = np.abs(2 * CASE2.u_t_exact(pts["x"], pts["z"], pts["t"]))
    f = physics.friction_coefficient_steady(V, CASE2.alpha_exact(pts["z"]), p)
    np.testing.assert_allclose(r, p.sigma_n * (f - p.f0), rtol=1e-12, atol=1e-15)


def test_inverse_fault_gradient_reaches_alpha_parameters():
    alpha = init_xavier([1, 8, 8, 8, 1], ["relu", "silu", "relu"], 1)
    pts = sample(_specs(2)["fault"], np.random.default_rng(10))
    _, g = grad_params(lambda th: loss_2d_inverse_fault(pts, {"u": CASE2.u_exact, "alpha": alpha}, CASE2,
                                                        {"alpha": th}), alpha.params)
    assert np.any(g != 0.0)


def test_component_loss_permutation_invariant():
    net = init_xavier([3, 6, 1], ["tanh"], 2)
    pts = sample(_specs(2)["omega"], np.random.default_rng(11))
    perm = np.random.default_rng(12).permutation(len(pts["x"]))
    a = loss_2d_forward("omega", pts, {"u": net}, CASE2)
    b = loss_2d_forward("omega", {k: v[perm] for k, v in pts.items()}, {"u": net}, CASE2)
    assert a == pytest.approx(b, rel=1e-13)


def test_boundary_terms_ignore_enforcement_flag():
    base = init_xavier([3, 6, 1], ["tanh"], 3)
    hard = TrialFunction(base, "hard_ic", CASE2.u0, CASE2.v0)
    as_plain = lambda *c: hard(*c)
    for tag in ("omega", "surface", "remote", "depth"):
        pts = sample(_specs(2)[tag], np.random.default_rng(13))
        assert component_loss(tag, pts, {"u": hard}, CASE2) == component_loss(tag, pts, {"u": as_plain}, CASE2)


def test_objective_sums_components():
    net = init_xavier([3, 6, 1], ["tanh"], 4)
    rng = np.random.default_rng(14)
    pts = {s.tag: sample(s, rng) for s in _specs(2, "soft", 20).values()}
    total, parts = objective(pts, {"u": net}, CASE2)
    assert total == pytest.approx(sum(parts.values()))
    assert set(parts) == set(TAGS_2D)


def test_loss_csv_round_trip(tmp_path):
    reps = [LossReport(1, {"omega": 0.5, "fault": 1e-3}), LossReport(2, {"omega": 0.25, "fault": 2e-4})]
    p = tmp_path / "log.csv"
    write_loss_csv(reps, p, extra=[{"status": "wolfe"}, {"status": "budget"}])
    back = read_loss_csv(p)
    assert [r.components for r in back] == [r.components for r in reps]
    assert back[1].total == reps[1].total
