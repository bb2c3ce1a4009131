"""Time the compiled kernels against their pure-numpy counterparts.

    python benchmarks/bench_kernels.py [--n 100000] [--repeat 5]
"""
import argparse
import time

import numpy as np

from covertjam import _kernels as k
from covertjam.geometry import draw_fading_batch


def best_of(fn, repeat):
    fn()  # warm-up (and JIT compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=100_000, help="batch size")
    parser.add_argument("--m-t", type=int, default=10)
    parser.add_argument("--nd", type=int, default=4)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(0)
    h_ab, h_ae, h_jb, _ = draw_fading_batch(rng, args.m_t, args.n)
    s0, s1 = rng.exponential(size=(2, args.n))
    g = k.topk_gain_numpy(h_ab, args.nd)
    a, b, c = 125.0 * g, np.full(args.n, 625.0), 125.0 * np.abs(h_jb) ** 2
    hi = np.full(args.n, 0.1206)

    cases = {
        "topk_gain": (lambda: k.topk_gain_numpy(h_ab, args.nd), lambda: k.topk_gain_jit(h_ab, args.nd)),
        "eve_gain": (lambda: k.eve_gain_numpy(h_ab, h_ae, args.nd), lambda: k.eve_gain_jit(h_ab, h_ae, args.nd)),
        "count_errors": (lambda: k.count_errors_numpy(s0, s1, 1.0), lambda: k.count_errors_jit(s0, s1, 1.0)),
        "dc_batch": (lambda: k.dc_batch_numpy(a, b, c, hi, hi / 2, 100, 1e-9, 1e-8),
                     lambda: k.dc_batch_jit(a, b, c, hi, hi / 2, 100, 1e-9, 1e-8)),
    }
    label = "numba" if k.USE_NUMBA else "loops (numba disabled)"
    print(f"n={args.n}  m_t={args.m_t}  nd={args.nd}  compiled path: {label}")
    print(f"{'kernel':<14}{'numpy [ms]':>12}{label.split()[0] + ' [ms]':>14}{'speedup':>10}")
    for name, (np_fn, jit_fn) in cases.items():
        t_np = best_of(np_fn, args.repeat)
        t_jit = best_of(jit_fn, args.repeat)
        print(f"{name:<14}{1e3 * t_np:>12.2f}{1e3 * t_jit:>14.2f}{t_np / t_jit:>10.1f}")


if __name__ == "__main__":
    main()
