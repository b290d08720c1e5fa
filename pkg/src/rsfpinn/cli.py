"""Command-line entry point: ``rsfpinn [--config FILE] [flags]``.

Flags override values read from the configuration file.  Each run writes,
per seed, a training log, network checkpoints, a displacement field grid
and (inverse mode) the inferred friction profile, plus one error report
with a row per seed and an average row.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ProblemConfig
from .evaluation import (
    alpha_profile_table,
    as_function,
    average_reports,
    evaluate_run,
    field_grid,
    write_field_csv,
    write_report_csv,
)
from .losses import write_loss_csv
from .network import save_checkpoint
from .trainer import TrainingAborted, train

log = logging.getLogger("rsfpinn")

TABLE2_SEEDS = 5
TABLE2_CONFIGS = [("forward", "soft"), ("forward", "hard"), ("inverse", "soft"), ("inverse", "hard")]
TABLE2_ROWS = ["rel_l2_u", "rel_l2_alpha", "mse_omega", "mse_fault", "mse_surface",
               "mse_depth", "mse_remote", "mse_ic_disp", "mse_ic_vel"]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rsfpinn", description="Train and verify PINNs for fault friction problems.")
    p.add_argument("--config", type=Path, help="key = value configuration file")
    p.add_argument("--dimension", type=int, choices=(1, 2))
    p.add_argument("--mode", choices=("forward", "inverse"))
    p.add_argument("--enforcement", choices=("soft", "hard"))
    p.add_argument("--iterations", type=int)
    p.add_argument("--seeds", help="comma-separated seed list, e.g. 0,1,2")
    p.add_argument("--out", help="output directory")
    p.add_argument("--table2", nargs="?", type=int, const=TABLE2_SEEDS, metavar="N_SEEDS",
                   help="run all four 2D configurations and write the comparison table")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args) -> ProblemConfig:
    flat = {}
    if args.config is not None:
        from .config import parse_flat
        flat = parse_flat(args.config.read_text(encoding="utf-8"))
    flags = {
        "problem.dimension": args.dimension,
        "problem.mode": args.mode,
        "problem.enforcement": args.enforcement,
        "train.iterations": args.iterations,
        "run.seeds": args.seeds,
        "run.out": args.out,
    }
    dim = flags["problem.dimension"] or int(flat.get("problem.dimension", 2))
    cfg = ProblemConfig.for_dimension(dim)
    merged = {**flat, **{k: str(v) for k, v in flags.items() if v is not None}}
    return cfg.with_overrides(merged)


def run_name(cfg: ProblemConfig) -> str:
    return f"{cfg.dimension}d_{cfg.mode}_{cfg.enforcement}"


def _diag_columns(run):
    return [{k: (repr(v) if isinstance(v, float) else v) for k, v in d.items()} for d in run.diagnostics]


def _write_log(run, path):
    write_loss_csv(run.history, path, extra=_diag_columns(run))


def write_artifacts(run, outdir: Path) -> dict[str, Path]:
    """Checkpoints, field grid and (inverse) alpha profile for one trained run."""
    s = run.seed
    paths = {}
    for name, net in run.networks.items():
        paths[f"ckpt_{name}"] = save_checkpoint(net, outdir / f"{name}_seed{s}.npz")
    cfg = run.config
    u = as_function(run.nets["u"])
    if cfg.dimension == 2:
        grid = field_grid(u, run.case.u_exact, 101, cfg.T, cfg.Lx, cfg.Lz, cfg.T)
        paths["field"] = outdir / f"field_seed{s}.csv"
        write_field_csv(grid, paths["field"])
    else:
        x = np.linspace(0.0, cfg.Lx, 101)
        paths["field"] = outdir / f"field_seed{s}.csv"
        with open(paths["field"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "t", "net", "exact", "abs_diff"])
            for t in np.linspace(0.0, cfg.T, 11):
                tt = np.full_like(x, t)
                n, e = u(x, tt), run.case.u_exact(x, tt)
                for row in zip(x, tt, n, e, np.abs(n - e)):
                    w.writerow([repr(float(v)) for v in row])
    if cfg.mode == "inverse":
        z, a, ae = alpha_profile_table(run, 200)
        paths["alpha"] = outdir / f"alpha_profile_seed{s}.csv"
        with open(paths["alpha"], "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["z", "alpha_net", "alpha_exact"])
            for row in zip(z, a, ae):
                w.writerow([repr(float(v)) for v in row])
    return paths


def run(cfg: ProblemConfig, outdir=None):
    """Train and evaluate every seed in ``cfg``; returns ``(reports, average, failures)``."""
    outdir = Path(cfg.out if outdir is None else outdir) / run_name(cfg)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg.save(outdir / "config.txt")
    reports, failures = [], []

    def one(seed):
        log_path = outdir / f"training_log_seed{seed}.csv"
        try:
            trained = train(cfg, seed, callback=lambda r: _write_log(r, log_path))
        except TrainingAborted as exc:
            if exc.run is not None:
                _write_log(exc.run, log_path)
            raise
        _write_log(trained, log_path)
        write_artifacts(trained, outdir)
        return evaluate_run(trained)

    def guarded(seed):
        try:
            return one(seed), None
        except (TrainingAborted, FloatingPointError) as exc:
            return None, exc

    if cfg.workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(zip(cfg.seeds, pool.map(guarded, cfg.seeds)))
    else:
        results = [(s, guarded(s)) for s in cfg.seeds]
    for seed, (rep, exc) in results:
        if exc is None:
            reports.append(rep)
        else:
            log.error("seed %d aborted: %s", seed, exc)
            failures.append((seed, exc))
    average = average_reports(reports) if reports else None
    if reports:
        write_report_csv(reports, outdir / "errors.csv", average)
    return reports, average, failures


def table2_rows(averages: dict) -> list[dict]:
    """Rows in the soft/hard/ratio layout from ``{(mode, enforcement): ErrorReport}``."""
    rows = []
    for metric in TABLE2_ROWS:
        row = {"metric": metric}
        for mode in ("forward", "inverse"):
            vals = {}
            for enf in ("soft", "hard"):
                rep = averages.get((mode, enf))
                v = rep.flat().get(metric) if rep is not None else None
                vals[enf] = v
                row[f"{mode}_{enf}"] = v
            ok = vals["soft"] is not None and vals["hard"] not in (None, 0.0)
            row[f"{mode}_ratio"] = vals["soft"] / vals["hard"] if ok else None
        rows.append(row)
    return rows


def reproduce_table2(n_seeds: int = TABLE2_SEEDS, base: ProblemConfig | None = None, outdir=None):
    """Run the four 2D configurations over ``n_seeds`` seeds and tabulate them."""
    if n_seeds < 1:
        raise ValueError("at least one seed is required")
    base = ProblemConfig.for_dimension(2) if base is None else base
    if base.dimension != 2:
        raise ValueError("the comparison table uses the 2D problem")
    outdir = Path(base.out if outdir is None else outdir)
    seeds = list(range(n_seeds))
    averages, failures = {}, 0
    for mode, enf in TABLE2_CONFIGS:
        cfg = base.replace(mode=mode, enforcement=enf, seeds=seeds)
        reports, avg, failed = run(cfg, outdir)
        failures += len(failed)
        if avg is not None:
            averages[(mode, enf)] = avg
    rows = table2_rows(averages)
    path = outdir / "table2.csv"
    cols = ["metric"] + [f"{m}_{k}" for m in ("forward", "inverse") for k in ("soft", "hard", "ratio")]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if r[k] is None else (repr(r[k]) if isinstance(r[k], float) else r[k]))
                        for k in cols})
    (outdir / "table2_meta.txt").write_text(
        f"seeds = {n_seeds}\nseed_list = {','.join(map(str, seeds))}\nfailed_runs = {failures}\n"
        f"iterations = {base.iterations}\n", encoding="utf-8")
    return path, rows, failures


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"rsfpinn: invalid configuration: {exc}", file=sys.stderr)
        return 2
    if args.table2 is not None:
        try:
            path, _, failures = reproduce_table2(args.table2, cfg.replace(dimension=2) if cfg.dimension == 2
                                                 else ProblemConfig.for_dimension(2, out=cfg.out))
        except ValueError as exc:
            print(f"rsfpinn: {exc}", file=sys.stderr)
            return 2
        print(path)
        return 1 if failures else 0
    reports, average, failures = run(cfg)
    outdir = Path(cfg.out) / run_name(cfg)
    for seed, exc in failures:
        print(f"rsfpinn: seed {seed} aborted: {exc}", file=sys.stderr)
    if average is not None:
        print(f"{outdir}: rel_l2_u = {average.rel_l2_displacement:.4e}"
              + (f", rel_l2_alpha = {average.rel_l2_alpha:.4e}" if average.rel_l2_alpha is not None else ""))
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
