"""Compare the compiled and numpy split-search kernels.

    python3 benchmarks/bench_split.py [--rows 2000] [--features 20] [--repeat 20]

Reports the per-call time of ``best_split`` for each backend and the wall
time of a full ``fit_gbm`` run with each, and checks both grow the same model.
"""
import argparse
import time

import numpy as np

from procsec.learner import TrainConfig, _backend, fit_gbm


def time_calls(fn, args, repeat):
    fn(*args)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rows", type=int, default=2000)
    ap.add_argument("--features", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--rounds", type=int, default=50)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    X = np.ascontiguousarray(rng.normal(size=(args.rows, args.features)).round(2))
    y = (X[:, 0] + 0.5 * X[:, 1] + rng.normal(scale=0.5, size=args.rows) > 0).astype(float)
    resid = y - y.mean()
    presorted = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T.astype(np.intp))
    mask = np.ones(args.rows, dtype=np.uint8)
    call = (X, presorted, mask, resid, 5)

    if _backend.compiled_best_split is None:
        print("compiled kernel not built; only the numpy backend is available")
    kernels = {"python": _backend.python_best_split}
    if _backend.compiled_best_split is not None:
        kernels["cython"] = _backend.compiled_best_split

    print(f"best_split on {args.rows} rows x {args.features} features")
    per_call = {}
    for name, fn in kernels.items():
        per_call[name] = time_calls(fn, call, args.repeat)
        print(f"  {name:>6}: {per_call[name] * 1e3:8.3f} ms/call  -> {fn(*call)}")
    if len(per_call) == 2:
        print(f"  speedup: {per_call['python'] / per_call['cython']:.1f}x")

    cfg = TrainConfig(n_rounds=args.rounds)
    dumps = {}
    print(f"fit_gbm, {args.rounds} rounds")
    for name in kernels:
        _backend.use(name)
        t0 = time.perf_counter()
        model = fit_gbm(X, y, cfg)
        print(f"  {name:>6}: {time.perf_counter() - t0:8.3f} s")
        dumps[name] = model.dumps()
    if len(dumps) == 2:
        print(f"  identical models: {dumps['python'] == dumps['cython']}")


if __name__ == "__main__":
    main()
