"""Numba vs numpy timings for the tree kernels.

    python3 benchmarks/bench_kernels.py [--sizes 200 1400] [--repeat 5]

Each kernel is called once on the numba path to trigger compilation before
timing.  Results of both paths are checked for equality.  The last table
trains full models in subprocesses with ``GSMEMLAB_USE_NUMBA`` set to 1 and 0.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from gsmemlab import kernels as K
from gsmemlab._accel import HAS_NUMBA


def _inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    x = np.column_stack([rng.uniform(8e8, 9e8, n), rng.normal(1.5, 0.6, n)])
    y = (x[:, 1] + rng.normal(0, 0.3, n) > 1.7).astype(np.float64)
    order = np.argsort(x[:, 1], kind="stable")
    r = y - 0.5
    # a small complete tree of depth 3 for traversal
    feature = np.array([1, 0, 0, 1, 1, 1, 1, -1, -1, -1, -1, -1, -1, -1, -1], dtype=np.int64)
    threshold = np.array([1.5, 8.5e8, 8.5e8, 1.0, 2.0, 1.0, 2.0] + [0.0] * 8)
    left = np.array([1, 3, 5, 7, 9, 11, 13] + [-1] * 8, dtype=np.int64)
    right = left + np.where(left >= 0, 1, 0)
    value = np.linspace(0.0, 1.0, 15)
    return {
        "gini_split": ((x[order, 1], y[order]),),
        "lookahead_split": ((x, y, np.array([0, 1], dtype=np.int64)),),
        "sse_split": ((x[order, 1], r[order]),),
        "tree_apply": ((x, feature, threshold, left, right, value),),
    }


_PAIRS = {
    "gini_split": (K._nb_best_gini_split, K._np_best_gini_split),
    "lookahead_split": (K._nb_best_lookahead_split, K._np_best_lookahead_split),
    "sse_split": (K._nb_best_sse_split, K._np_best_sse_split),
    "tree_apply": (K._nb_tree_apply, K._np_tree_apply),
}

_TRAIN_SNIPPET = """
import time
from gsmemlab import classifiers as C, dataset as ds
data = ds.generate(ds.GeneratorConfig())
tr, _ = ds.split(data, 0.7, 42)
for tag, kw in (("DT", {}), ("RF", {"n_trees": 30}), ("BT", {"rounds": 50})):
    cfg = C.TrainConfig.for_algorithm(tag, **kw)
    C.train(cfg, tr)
    t0 = time.perf_counter()
    C.train(cfg, tr)
    print(tag, time.perf_counter() - t0)
"""


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(p, q) for p, q in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def bench_kernels(sizes, repeat):
    print(f"{'kernel':<16}{'n':>7}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}  equal")
    for n in sizes:
        for name, (args,) in _inputs(n).items():
            nb, npf = _PAIRS[name]
            nb(*args)  # compile
            t_nb = min(timeit.repeat(lambda: nb(*args), number=1, repeat=repeat))
            t_np = min(timeit.repeat(lambda: npf(*args), number=1, repeat=repeat))
            eq = _same(nb(*args), npf(*args))
            print(f"{name:<16}{n:>7}{t_nb * 1e3:>12.3f}{t_np * 1e3:>12.3f}"
                  f"{t_np / t_nb:>10.1f}  {eq}")


def bench_training():
    times = {}
    for flag in ("1", "0"):
        env = dict(os.environ, GSMEMLAB_USE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", _TRAIN_SNIPPET], env=env, check=True,
                             capture_output=True, text=True).stdout
        for line in out.split("\n"):
            if line:
                tag, sec = line.split()
                times.setdefault(tag, {})[flag] = float(sec)
    print(f"\n{'train (1400 rows)':<18}{'numba s':>10}{'numpy s':>10}{'speedup':>10}")
    for tag, t in times.items():
        print(f"{tag:<18}{t['1']:>10.3f}{t['0']:>10.3f}{t['0'] / t['1']:>10.1f}")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[200, 1400])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--skip-training", action="store_true")
    args = p.parse_args(argv)
    if not HAS_NUMBA:
        sys.exit("numba is not installed; nothing to compare")
    bench_kernels(args.sizes, args.repeat)
    if not args.skip_training:
        bench_training()


if __name__ == "__main__":
    main()
