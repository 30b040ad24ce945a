"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from cliptrack.kernels import available_backends


def cases(rng):
    p = np.exp(rng.normal(0, 2, 16))
    w = np.full(16, 1 / 16)
    g = rng.random(16)
    losses = rng.random((1000, 16))
    h = rng.standard_normal((2000, 8, 8))
    mats = h + np.swapaxes(h, 1, 2)
    return {
        "waterfill K=16": lambda b: b.waterfill(p, 0.01),
        "omd_step K=16": lambda b: b.omd_step(w, g, 0.1, 0.01),
        "switching_dp T=1000 K=16 S=8": lambda b: b.switching_dp(losses, 8),
        "jacobi batch 2000 x 8x8": lambda b: b.jacobi_eigh_batch(mats),
    }


def best_time(fn, repeat):
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    backends = available_backends()
    names = sorted(backends)
    print(f"{'kernel':<32}" + "".join(f"{n:>14}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for label, fn in cases(np.random.default_rng(0)).items():
        times = {n: best_time(lambda: fn(backends[n]), args.repeat) for n in names}
        row = f"{label:<32}" + "".join(f"{times[n] * 1e6:>12.1f}us" for n in names)
        if len(names) == 2:
            row += f"{times['python'] / times['cython']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
