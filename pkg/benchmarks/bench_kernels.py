#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the numpy fallback.

Times the policy-MLP forward/backward at several batch sizes and the RSRP
field kernel at several grid sizes, prints per-call times and speedups, and
reports the measured forward crossover row count (where BLAS starts to win
over the compiled loops).

Usage: python benchmarks/bench_kernels.py [--repeat 7]
"""

import argparse
import time

import numpy as np

from teleplan.kernels import available_backends, get_backend


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _mlp_args(rng, rows, dim=10, hidden=128):
    x = rng.random((rows, dim))
    scale = 0.2
    args = [x]
    args += [rng.random((dim, hidden)) * scale, rng.random(hidden) * scale]
    for _ in range(3):
        args += [rng.random((hidden, hidden)) * scale, rng.random(hidden) * scale]
    args += [rng.random(hidden) * scale, 0.1]
    return args


def bench_mlp(repeat):
    rng = np.random.default_rng(0)
    backends = {name: get_backend(name) for name in available_backends()}
    print(f"{'rows':>7} | " + " | ".join(f"{n} fwd (ms)" for n in backends)
          + " | " + " | ".join(f"{n} bwd (ms)" for n in backends))
    crossover = None
    for rows in (8, 32, 100, 256, 512, 1024, 4096, 16384):
        args = _mlp_args(rng, rows)
        x = args[0]
        fwd_t, bwd_t = {}, {}
        for name, mod in backends.items():
            fwd_t[name] = _time(lambda m=mod: m.mlp_forward(*args), repeat)
            logits, h1, h2, h3, h4 = mod.mlp_forward(*args)
            dl = rng.random(rows)
            w2, w3, w4, w5 = args[3], args[5], args[7], args[9]
            bwd_t[name] = _time(
                lambda m=mod: m.mlp_backward(x, w2, w3, w4, w5, h1, h2, h3, h4, dl),
                repeat,
            )
        line = f"{rows:>7} | " + " | ".join(
            f"{fwd_t[n] * 1e3:10.3f}" for n in backends
        )
        line += " | " + " | ".join(f"{bwd_t[n] * 1e3:10.3f}" for n in backends)
        if len(backends) == 2:
            line += f"   fwd speedup(cython) {fwd_t['numpy'] / fwd_t['cython']:5.2f}x"
            if crossover is None and fwd_t["cython"] > fwd_t["numpy"]:
                crossover = rows
        print(line)
    if len(backends) == 2:
        print(f"forward crossover (numpy wins at >= rows): {crossover}")


def bench_rsrp(repeat):
    rng = np.random.default_rng(1)
    backends = {name: get_backend(name) for name in available_backends()}
    print(f"\n{'cells':>8} x sites | " + " | ".join(f"{n} (ms)" for n in backends))
    for n_cells, n_sites in ((1000, 5), (8000, 20), (40000, 20)):
        cx = rng.uniform(-1000, 1000, n_cells)
        cy = rng.uniform(-800, 800, n_cells)
        sx = rng.uniform(-900, 900, n_sites)
        sy = rng.uniform(-700, 700, n_sites)
        az = np.array([0.0, 120.0, 240.0])
        args = (cx, cy, sx, sy, az, 46.99, 15.0, 10.0, 30.0, 65.0, 10.0,
                30.0, 60.0, 10.0, 3.5, 0.0)
        times = {
            name: _time(lambda m=mod: m.rsrp_field(*args), repeat)
            for name, mod in backends.items()
        }
        line = f"{n_cells:>8} x {n_sites:<4}  | " + " | ".join(
            f"{times[n] * 1e3:8.3f}" for n in backends
        )
        if len(times) == 2:
            line += f"   speedup(cython) {times['numpy'] / times['cython']:5.2f}x"
        print(line)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=7,
                        help="timing repetitions (best of)")
    args = parser.parse_args()
    print("available backends:", ", ".join(available_backends()))
    bench_mlp(args.repeat)
    bench_rsrp(args.repeat)


if __name__ == "__main__":
    main()
