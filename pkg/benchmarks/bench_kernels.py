"""Compare the compiled and pure-Python hot kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Reports median wall time per call for each backend, the speed-up, and
checks that both return the same bits.
"""
from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from mtmf.kernels import backends


def _time(fn, repeat: int) -> float:
    fn()  # warm-up
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def cases(rng: np.random.Generator):
    npts = 200
    D = rng.normal(size=(5, npts))
    yield "power_derivative n=6 l=3", "power_derivative", (D, 6, 3)
    yield "power_derivative n=10 l=4", "power_derivative", (D, 10, 4)
    K, N = 120, 2000
    avals = rng.normal(size=(K, N))
    g = rng.uniform(-2, 2, size=N)
    ns = np.arange(K, dtype=np.int64)
    yield "series_sum K=120 N=2000 exact", "series_sum", (avals, g, ns, 0.0, 0)
    yield "series_sum K=120 N=2000 early stop", "series_sum", (avals, g, ns, 1e-12, 3)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    impls = backends()
    if "cython" not in impls:
        print("compiled extension not built; only the Python backend is available")
    rng = np.random.default_rng(20240601)
    print(f"{'case':40s} " + " ".join(f"{k:>12s}" for k in impls) + "   speed-up  identical")
    for label, name, call_args in cases(rng):
        times, outs = {}, {}
        for key, mod in impls.items():
            fn = getattr(mod, name)
            times[key] = _time(lambda: fn(*call_args), args.repeat)
            outs[key] = fn(*call_args)
        ref = outs["python"]
        same = all(_same(ref, o) for o in outs.values())
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        cols = " ".join(f"{times[k] * 1e3:10.3f}ms" for k in impls)
        print(f"{label:40s} {cols}   {speed:7.1f}x  {same}")


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return a.tobytes() == np.asarray(b, dtype=a.dtype).tobytes()
    return a == b


if __name__ == "__main__":
    main()
