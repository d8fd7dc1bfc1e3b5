"""Compare the compiled and pure-Python SMO backends.

Usage: python3 benchmarks/bench_smo.py [--data data/breastw.csv] [--repeat 3]

Trains a spread of grid corners on one standardized dataset with each
backend, checks that both return identical multipliers, and prints the
best-of-``repeat`` time per configuration.
"""

import argparse
import time

import numpy as np

from ncsvm.dataset import load_csv, preprocess, standardize
from ncsvm.kernel import KernelSpec, kernel_matrix
from ncsvm.svm import BACKENDS, SvmParams, train_gram

CONFIGS = [(2.0**-5, 2.0**-15), (1.0, 2.0**-3), (2.0**5, 2.0**-7), (2.0**15, 2.0**-1), (2.0**15, 2.0**3)]


def best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data", default="data/breastw.csv")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    data, _ = standardize(preprocess(load_csv(args.data)))
    names = sorted(BACKENDS)
    if "compiled" not in BACKENDS:
        print("compiled backend not built; timing the Python backend only")
    print(f"{args.data}: m={len(data)}, d={data.n_features}")
    print(f"{'C':>10} {'gamma':>10} {'iters':>8} " + " ".join(f"{n:>10}" for n in names)
          + ("   speedup" if len(names) == 2 else ""))
    totals = dict.fromkeys(names, 0.0)
    for C, g in CONFIGS:
        gram = kernel_matrix(KernelSpec.gaussian(g), data.X)
        params = SvmParams(C, KernelSpec.gaussian(g))
        times, models = {}, {}
        for name in names:
            times[name], models[name] = best_time(
                lambda: train_gram(gram, data.X, data.y, params, backend=name), args.repeat)
            totals[name] += times[name]
        if len(names) == 2:
            assert np.array_equal(models["python"].alphas, models["compiled"].alphas), \
                "backends disagree"
        row = f"{C:>10.4g} {g:>10.4g} {models[names[0]].n_iter:>8d} " + \
            " ".join(f"{times[n]:>9.4f}s" for n in names)
        if len(names) == 2:
            row += f" {times['python'] / times['compiled']:>8.1f}x"
        print(row)
    print("total      " + " " * 20 + " ".join(f"{totals[n]:>9.4f}s" for n in names))


if __name__ == "__main__":
    main()
