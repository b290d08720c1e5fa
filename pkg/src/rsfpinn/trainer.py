"""Training loops for the 1D split scheme and the 2D joint scheme.

1D: the state network and the displacement network each have their own
optimizer and objective; per iteration the state update runs first.
2D: one optimizer over the displacement parameters, concatenated with the
friction-network parameters in the inverse problem.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import physics
from .autodiff import grad_params
from .config import ProblemConfig
from .losses import LossReport, objective
from .network import MLP, TrialFunction, init_xavier
from .optimizer import LbfgsState, NonFiniteLoss, minimize
from .sampling import sample, subdomain_specs

log = logging.getLogger(__name__)

STATE_TAGS = ("state", "ic_state")


class TrainingAborted(RuntimeError):
    def __init__(self, message, component=None, run=None):
        super().__init__(message)
        self.component = component
        self.run = run


@dataclass
class TrainRun:
    config: ProblemConfig
    seed: int
    case: physics.ManufacturedCase
    nets: dict
    optimizers: dict
    history: list[LossReport] = field(default_factory=list)
    diagnostics: list[dict] = field(default_factory=list)
    loss_traces: list[list[float]] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def networks(self) -> dict[str, MLP]:
        return {k: (v.base if isinstance(v, TrialFunction) else v) for k, v in self.nets.items()}


def seed_streams(seed: int) -> dict[str, np.random.SeedSequence]:
    """Independent streams: network inits, collocation sampling, evaluation."""
    u, aux, samp, ev = np.random.SeedSequence(seed).spawn(4)
    return {"u": u, "aux": aux, "sampling": samp, "eval": ev}


def _int_seed(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1)[0])


def _optimizer(cfg: ProblemConfig) -> LbfgsState:
    return LbfgsState(history_size=cfg.history_size, c1=cfg.c1, c2=cfg.c2,
                      tol_grad=cfg.tol_grad, tol_change=cfg.tol_change)


def build_case(cfg: ProblemConfig) -> physics.ManufacturedCase:
    if cfg.dimension == 1:
        return physics.mms_1d(cfg.material, cfg.friction, L=cfg.Lx)
    return physics.mms_2d(cfg.material, cfg.friction, Lx=cfg.Lx, Lz=cfg.Lz)


def _make_fg(points, nets, case, keys, sizes, inverse=False):
    """Loss-and-gradient callback over the concatenated parameters of ``keys``."""
    bounds = np.cumsum([0, *sizes])

    def loss(theta):
        thetas = {k: theta[bounds[i]:bounds[i + 1]] for i, k in enumerate(keys)}
        total, _ = objective(points, nets, case, thetas, inverse=inverse)
        return total

    def fg(theta):
        return grad_params(loss, theta)

    return fg


def _check_finite(parts: dict, run: TrainRun, what: str):
    bad = [k for k, v in parts.items() if not np.isfinite(v)]
    if bad:
        raise TrainingAborted(f"non-finite {what} loss in component(s) {', '.join(bad)}", bad[0], run)


def _optimize(run, name, keys, points, inverse=False):
    """Run one inner L-BFGS pass on the networks in ``keys`` and write back."""
    cfg = run.config
    bases = [run.networks[k] for k in keys]
    theta0 = np.concatenate([b.params for b in bases])
    fg = _make_fg(points, run.nets, run.case, keys, [b.n_params for b in bases], inverse)
    try:
        theta, f, diag = minimize(run.optimizers[name], theta0, fg, cfg.max_evals, cfg.max_iter)
    except NonFiniteLoss as exc:
        _, parts = objective(points, run.nets, run.case, inverse=inverse)
        _check_finite(parts, run, name)
        raise TrainingAborted(str(exc), None, run) from exc
    pos = 0
    for b in bases:
        b.params = theta[pos:pos + b.n_params].copy()
        pos += b.n_params
    run.loss_traces.append(diag.losses)
    return {f"{name}_iters": diag.iterations, f"{name}_evals": diag.n_evals,
            f"{name}_step": diag.final_step, f"{name}_status": diag.status}


def init_1d(cfg: ProblemConfig, seed: int) -> TrainRun:
    case = build_case(cfg)
    streams = seed_streams(seed)
    u_base = init_xavier(cfg.u_net.layer_dims(2), cfg.u_net.activations, _int_seed(streams["u"]))
    psi_base = init_xavier(cfg.aux_net.layer_dims(1), cfg.aux_net.activations, _int_seed(streams["aux"]))
    if cfg.enforcement == "hard":
        nets = {"u": TrialFunction(u_base, "hard_ic", case.u0, case.v0),
                "psi": TrialFunction(psi_base, "hard_ic", psi0=case.psi0)}
    else:
        nets = {"u": TrialFunction(u_base), "psi": TrialFunction(psi_base)}
    return TrainRun(cfg, seed, case, nets, {"psi": _optimizer(cfg), "u": _optimizer(cfg)})


def init_2d(cfg: ProblemConfig, seed: int) -> TrainRun:
    case = build_case(cfg)
    streams = seed_streams(seed)
    u_base = init_xavier(cfg.u_net.layer_dims(3), cfg.u_net.activations, _int_seed(streams["u"]))
    if cfg.enforcement == "hard":
        nets = {"u": TrialFunction(u_base, "hard_ic", case.u0, case.v0)}
    else:
        nets = {"u": TrialFunction(u_base)}
    if cfg.mode == "inverse":
        nets["alpha"] = init_xavier(cfg.aux_net.layer_dims(1), cfg.aux_net.activations,
                                    _int_seed(streams["aux"]))
    return TrainRun(cfg, seed, case, nets, {"joint": _optimizer(cfg)})


def train_1d(cfg: ProblemConfig, seed: int, callback=None) -> TrainRun:
    """Split two-optimizer training of the displacement and state networks."""
    if cfg.dimension != 1:
        raise ValueError("train_1d needs a 1D configuration")
    run = init_1d(cfg, seed)
    rng = np.random.default_rng(seed_streams(seed)["sampling"])
    specs = subdomain_specs(cfg.domain, cfg.counts, cfg.enforcement)
    u_specs = [s for s in specs if s.tag not in STATE_TAGS]
    psi_specs = [s for s in specs if s.tag in STATE_TAGS]
    t0 = time.perf_counter()
    for it in range(1, cfg.iterations + 1):
        u_pts = {s.tag: sample(s, rng) for s in u_specs}
        psi_pts = {s.tag: sample(s, rng) for s in psi_specs}
        diag = _optimize(run, "psi", ["psi"], psi_pts)
        diag.update(_optimize(run, "u", ["u"], u_pts))
        _, parts = objective({**u_pts, **psi_pts}, run.nets, run.case)
        _check_finite(parts, run, "post-update")
        run.history.append(LossReport(it, parts))
        run.diagnostics.append(diag)
        log.info("1D iter %d: total %.4e", it, run.history[-1].total)
        if callback:
            callback(run)
    run.elapsed = time.perf_counter() - t0
    return run


def train_2d(cfg: ProblemConfig, seed: int, callback=None) -> TrainRun:
    """Joint training of displacement (and, for inverse runs, friction) networks."""
    if cfg.dimension != 2:
        raise ValueError("train_2d needs a 2D configuration")
    run = init_2d(cfg, seed)
    inverse = cfg.mode == "inverse"
    keys = ["u", "alpha"] if inverse else ["u"]
    rng = np.random.default_rng(seed_streams(seed)["sampling"])
    specs = subdomain_specs(cfg.domain, cfg.counts, cfg.enforcement)
    t0 = time.perf_counter()
    for it in range(1, cfg.iterations + 1):
        pts = {s.tag: sample(s, rng) for s in specs}
        diag = _optimize(run, "joint", keys, pts, inverse)
        _, parts = objective(pts, run.nets, run.case, inverse=inverse)
        _check_finite(parts, run, "post-update")
        run.history.append(LossReport(it, parts))
        run.diagnostics.append(diag)
        log.info("2D %s/%s iter %d: total %.4e", cfg.mode, cfg.enforcement, it, run.history[-1].total)
        if callback:
            callback(run)
    run.elapsed = time.perf_counter() - t0
    return run


def train(cfg: ProblemConfig, seed: int, callback=None) -> TrainRun:
    return (train_1d if cfg.dimension == 1 else train_2d)(cfg, seed, callback)


@dataclass
class EnsembleResult:
    runs: list
    reports: list
    failures: list
    average: object

    @property
    def n_failed(self) -> int:
        return len(self.failures)


def train_ensemble(cfg: ProblemConfig, seeds=None, workers=None) -> EnsembleResult:
    """Train one model per seed, evaluate each and average the error reports.

    Failed runs are logged and excluded; the failure count is reported.
    """
    from .evaluation import average_reports, evaluate_run

    seeds = list(cfg.seeds if seeds is None else seeds)
    if not seeds:
        raise ValueError("at least one seed is required")
    workers = cfg.workers if workers is None else workers

    def one(seed):
        run = train(cfg, seed)
        return run, evaluate_run(run)

    results = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [(s, pool.submit(one, s)) for s in seeds]
            for s, fut in futures:
                try:
                    results.append((s, fut.result(), None))
                except Exception as exc:  # noqa: BLE001
                    results.append((s, None, exc))
    else:
        for s in seeds:
            try:
                results.append((s, one(s), None))
            except Exception as exc:  # noqa: BLE001
                results.append((s, None, exc))
    runs, reports, failures = [], [], []
    for s, res, exc in results:
        if exc is not None:
            log.warning("seed %d failed: %s", s, exc)
            failures.append((s, exc))
            continue
        runs.append(res[0])
        reports.append(res[1])
    if not reports:
        raise TrainingAborted(f"all {len(seeds)} ensemble members failed")
    return EnsembleResult(runs, reports, failures, average_reports(reports))
