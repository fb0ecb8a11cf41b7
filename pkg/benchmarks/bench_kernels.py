"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--threads T]

Each kernel runs on the workload sizes used by the default image and HOM
settings.  Reports the best wall time per backend and the speed-up.
"""

import argparse
import timeit

import numpy as np

from twistedhom import _backend


def workloads(rng):
    x = rng.uniform(0, 400, 200_000)
    raster = rng.uniform(0, np.pi, (50, 50))
    xs = rng.uniform(-2.6e-4, 2.6e-4, 200_000)
    ys = rng.uniform(-2.6e-4, 2.6e-4, 200_000)
    sub = rng.normal(size=(50, 50, 64))
    n = 48 * 64
    w = rng.uniform(0, 1, n)
    amps = [rng.normal(size=n) + 1j * rng.normal(size=n) for _ in range(4)]
    return {
        "bessel_jn(m=3, 2e5 pts)": lambda k, t: k.bessel_jn(3, x, t),
        "bilinear(50x50, 2e5 pts)": lambda k, t: k.bilinear(raster, -2.5e-4, 2.5e-4, 1e-5, xs, ys, t),
        "pixel_sum(50x50x64)": lambda k, t: k.pixel_sum(sub, t),
        "pair_sums(3072 nodes)": lambda k, t: k.pair_sums(w, *amps, threads=t),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    names = _backend.available()
    if "compiled" not in names:
        print("compiled backend not built; timing the python backend only")
    kernels = {name: _backend._BACKENDS[name] for name in names}
    print(f"{'kernel':28s}" + "".join(f"{n:>12s}" for n in names) + ("     speed-up" if len(names) > 1 else ""))
    for label, fn in workloads(np.random.default_rng(0)).items():
        best = {}
        for name, mod in kernels.items():
            best[name] = min(timeit.repeat(lambda: fn(mod, args.threads), number=1, repeat=args.repeat))
        row = f"{label:28s}" + "".join(f"{best[n] * 1e3:10.2f}ms" for n in names)
        if len(names) > 1:
            row += f"{best['python'] / best['compiled']:12.1f}x"
        print(row)


if __name__ == "__main__":
    main()
