"""Compare the compiled and numpy tanh-jet kernels.

Two levels are timed: the raw kernels on packed jet arrays of the sizes
seen in training, and one objective-plus-gradient evaluation of the 2D
forward problem with each backend (run in a subprocess so the backend is
chosen at import).

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from rsfpinn.autodiff import _kernels_py, kernels

OBJECTIVE_SNIPPET = """
import time
import numpy as np
from rsfpinn import trainer
from rsfpinn.autodiff import kernels
from rsfpinn.config import ProblemConfig
from rsfpinn.sampling import sample, subdomain_specs

cfg = ProblemConfig.for_dimension(2)
run = trainer.init_2d(cfg, 0)
rng = np.random.default_rng(0)
pts = {s.tag: sample(s, rng) for s in subdomain_specs(cfg.domain, cfg.counts, cfg.enforcement)}
fg = trainer._make_fg(pts, run.nets, run.case, ["u"], [run.networks["u"].n_params])
theta = run.networks["u"].params
fg(theta)
best = float("inf")
for _ in range(REPEAT):
    t0 = time.perf_counter()
    fg(theta)
    best = min(best, time.perf_counter() - t0)
print(kernels.BACKEND, best)
"""


def bench_kernel(fn, *args, repeat):
    timer = timeit.Timer(lambda: fn(*args))
    n, _ = timer.autorange()
    return min(timer.repeat(repeat, n)) / n


def objective_time(pure: bool, repeat: int):
    env = dict(os.environ, RSFPINN_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", OBJECTIVE_SNIPPET.replace("REPEAT", str(repeat))],
                         env=env, capture_output=True, text=True, check=True)
    backend, secs = out.stdout.split()
    return backend, float(secs)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()

    if kernels.BACKEND != "compiled":
        print("compiled kernel not built; only the numpy backend is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'shape':<18}{'numpy ms':>10}{'compiled ms':>13}{'speedup':>9}")
    for shape in [(7, 400, 128), (7, 1000, 128), (5, 400, 64)]:
        pre = rng.normal(size=shape)
        grad = rng.normal(size=shape)
        post = _kernels_py.tanh_jet_forward(pre)
        for name, py_fn, c_fn, fargs in [
            ("tanh_jet_forward", _kernels_py.tanh_jet_forward, kernels.tanh_jet_forward, (pre,)),
            ("tanh_jet_backward", _kernels_py.tanh_jet_backward, kernels.tanh_jet_backward, (pre, post, grad)),
        ]:
            t_py = bench_kernel(py_fn, *fargs, repeat=args.repeat)
            t_c = bench_kernel(c_fn, *fargs, repeat=args.repeat)
            print(f"{name:<22}{str(shape):<18}{1e3 * t_py:>10.3f}{1e3 * t_c:>13.3f}{t_py / t_c:>9.2f}")

    print()
    results = {pure: objective_time(pure, args.repeat) for pure in (True, False)}
    for pure, (backend, secs) in results.items():
        print(f"2D objective + gradient ({backend} backend): {1e3 * secs:.1f} ms")
    print(f"end-to-end speedup: {results[True][1] / results[False][1]:.2f}")


if __name__ == "__main__":
    main()
