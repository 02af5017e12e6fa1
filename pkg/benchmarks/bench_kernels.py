"""Time the compiled kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--n 4000] [--repeats 5]
"""
import argparse
import timeit

import numpy as np

from streampart import _kernels
from streampart.core import default_capacity
from streampart.egypt import buffer_phase
from streampart.ppm import PlantedConfig, generate, stream


def cases(n, k, B, r_size):
    edges, _ = generate(PlantedConfig(n, k, 0.5, 0.05, graph_seed=1))
    s = stream(edges, 2)
    buf = buffer_phase(s, B, B // 4, r_size, seed=3)
    r_index = np.full(n, -1, dtype=np.int64)
    r_index[buf.R] = np.arange(r_size)
    adj_sr = buf.adj_sr()
    cap = default_capacity(n, k)
    return {
        "stream_counts": lambda m: m.stream_counts(s.indptr, s.indices, B, n, r_index, adj_sr),
        "lwd_pass": lambda m: m.lwd_pass(s.order, s.indptr, s.indices, n, k, cap),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4000)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--buffer", type=int, default=1000)
    ap.add_argument("--r-size", type=int, default=500)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels.compiled is None:
        print("compiled kernels not built; only the numpy timings are shown")
    print(f"{'kernel':<14} {'numpy s':>10} {'cython s':>10} {'speedup':>8}")
    for name, fn in cases(args.n, args.k, args.buffer, args.r_size).items():
        t_py = min(timeit.repeat(lambda: fn(_kernels.py), number=1, repeat=args.repeats))
        if _kernels.compiled is None:
            print(f"{name:<14} {t_py:>10.4f} {'-':>10} {'-':>8}")
            continue
        assert np.array_equal(np.asarray(fn(_kernels.py)), np.asarray(fn(_kernels.compiled)))
        t_c = min(timeit.repeat(lambda: fn(_kernels.compiled), number=1, repeat=args.repeats))
        print(f"{name:<14} {t_py:>10.4f} {t_c:>10.4f} {t_py / t_c:>7.1f}x")


if __name__ == "__main__":
    main()
