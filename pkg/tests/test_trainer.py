import numpy as np
import pytest

from rsfpinn import trainer
from rsfpinn.config import NetSpec, ProblemConfig
from rsfpinn.evaluation import evaluate_run
from rsfpinn.sampling import sample, subdomain_specs


def tiny(dim, **kw):
    small = NetSpec(8, 2, ["tanh", "tanh"])
    aux = small if dim == 1 else NetSpec(8, 3, ["relu", "silu", "relu"])
    counts = {k: 16 for k in ProblemConfig.for_dimension(dim).counts}
    base = dict(iterations=2, u_net=small, aux_net=aux, counts=counts, max_evals=6, max_iter=6,
                eval_points=50, eval_temporal_points=8, quadrature=[4, 8])
    base.update(kw)
    return ProblemConfig.for_dimension(dim, **base)


def test_zero_iterations_keeps_initialisation():
    cfg = tiny(2, iterations=0)
    run = trainer.train(cfg, 3)
    fresh = trainer.init_2d(cfg, 3)
    assert np.array_equal(run.networks["u"].params, fresh.networks["u"].params)
    assert run.history == []


def test_split_training_isolation():
    cfg = tiny(1)
    run = trainer.init_1d(cfg, 0)
    rng = np.random.default_rng(0)
    specs = {s.tag: s for s in subdomain_specs(cfg.domain, cfg.counts, cfg.enforcement)}
    u0 = run.networks["u"].params.copy()
    psi0 = run.networks["psi"].params.copy()
    trainer._optimize(run, "psi", ["psi"], {"state": sample(specs["state"], rng)})
    assert np.array_equal(run.networks["u"].params, u0)
    assert not np.array_equal(run.networks["psi"].params, psi0)
    psi1 = run.networks["psi"].params.copy()
    pts = {t: sample(specs[t], rng) for t in ("omega", "x0", "x1")}
    trainer._optimize(run, "u", ["u"], pts)
    assert np.array_equal(run.networks["psi"].params, psi1)
    assert not np.array_equal(run.networks["u"].params, u0)


def test_split_objectives_exclude_foreign_terms():
    cfg = tiny(1)
    run = trainer.train_1d(cfg, 1)
    assert set(run.history[0].components) == {"omega", "x0", "x1", "state"}
    assert {"psi_status", "u_status"} <= set(run.diagnostics[0])


def test_same_seed_reproducible():
    cfg = tiny(2, mode="inverse")
    a = trainer.train(cfg, 5)
    b = trainer.train(cfg, 5)
    assert [r.components for r in a.history] == [r.components for r in b.history]
    assert a.networks["alpha"].params.tobytes() == b.networks["alpha"].params.tobytes()


def test_different_seeds_differ():
    cfg = tiny(2)
    a = trainer.train(cfg, 1)
    b = trainer.train(cfg, 2)
    assert a.history[-1].components != b.history[-1].components


def test_joint_gradient_reaches_both_blocks():
    cfg = tiny(2, mode="inverse")
    run = trainer.init_2d(cfg, 0)
    rng = np.random.default_rng(1)
    pts = {s.tag: sample(s, rng) for s in subdomain_specs(cfg.domain, cfg.counts, cfg.enforcement)}
    nu = run.networks["u"].n_params
    fg = trainer._make_fg(pts, run.nets, run.case, ["u", "alpha"],
                          [nu, run.networks["alpha"].n_params], inverse=True)
    _, g = fg(np.concatenate([run.networks["u"].params, run.networks["alpha"].params]))
    assert np.any(g[:nu] != 0) and np.any(g[nu:] != 0)


def test_forward_mode_has_no_alpha_network():
    run = trainer.init_2d(tiny(2), 0)
    assert set(run.nets) == {"u"}
    assert set(trainer.init_2d(tiny(2, mode="inverse"), 0).nets) == {"u", "alpha"}


def test_soft_mode_adds_ic_terms():
    run = trainer.train(tiny(2, enforcement="soft", iterations=1), 0)
    assert {"ic_disp", "ic_vel"} <= set(run.history[0].components)


def test_total_loss_decreases():
    cfg = tiny(2, iterations=6, max_evals=20, max_iter=20)
    run = trainer.train(cfg, 0)
    assert run.history[-1].total < run.history[0].total


def test_inner_traces_monotone():
    run = trainer.train(tiny(1), 0)
    for trace in run.loss_traces:
        assert all(b <= a for a, b in zip(trace, trace[1:]))


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        trainer.train_1d(tiny(2), 0)
    with pytest.raises(ValueError):
        trainer.train_2d(tiny(1), 0)


def test_seed_streams_independent():
    s = trainer.seed_streams(0)
    draws = {k: np.random.default_rng(v).random() for k, v in s.items()}
    assert len(set(draws.values())) == 4


def test_ensemble_singleton_equals_run_report():
    cfg = tiny(2)
    ens = trainer.train_ensemble(cfg, [4])
    single = evaluate_run(trainer.train(cfg, 4))
    assert ens.average.flat() | {"seed": ""} == single.flat() | {"seed": ""}


def test_ensemble_duplicate_seeds_match_single():
    cfg = tiny(2)
    ens = trainer.train_ensemble(cfg, [4, 4])
    single = evaluate_run(trainer.train(cfg, 4))
    assert ens.average.rel_l2_displacement == pytest.approx(single.rel_l2_displacement, rel=1e-15)


def test_ensemble_excludes_failures(monkeypatch):
    real = trainer.train

    def flaky(cfg, seed, callback=None):
        if seed == 1:
            raise trainer.TrainingAborted("non-finite loss", "omega")
        return real(cfg, seed, callback)

    monkeypatch.setattr(trainer, "train", flaky)
    ens = trainer.train_ensemble(tiny(2, iterations=1), [0, 1, 2])
    assert ens.n_failed == 1 and len(ens.reports) == 2
    assert [r.seed for r in ens.reports] == [0, 2]


def test_ensemble_all_failed_raises(monkeypatch):
    def boom(cfg, seed, callback=None):
        raise trainer.TrainingAborted("boom")

    monkeypatch.setattr(trainer, "train", boom)
    with pytest.raises(trainer.TrainingAborted):
        trainer.train_ensemble(tiny(2), [0])


def test_nonfinite_objective_aborts_with_component():
    cfg = tiny(2, iterations=1)
    run = trainer.init_2d(cfg, 0)
    run.networks["u"].params[:] = np.nan
    with pytest.raises(trainer.TrainingAborted) as err:
        trainer._optimize(run, "joint", ["u"], {"omega": {"x": np.ones(3), "z": np.ones(3), "t": np.ones(3)}})
    assert err.value.component == "omega"
