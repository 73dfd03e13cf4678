"""Compare the compiled and the pure-Python kernels on representative workloads.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from apwcert import _kernels


def workloads(rng):
    g = -(1.0 + 0.5 * rng.random(2000))
    x = np.linspace(0.05, 40.0, 200)
    cos_t = np.cos(np.linspace(0.01, 3.13, 400))
    sin_t = np.sqrt(1.0 - cos_t ** 2)
    return {
        "numerov_outward (n=2000)": lambda k: k.numerov_outward(g, 1e-3, 0.0, 1e-3),
        "sph_jn_array (lmax=40, 200 x)": lambda k: [k.sph_jn_array(40, xi) for xi in x],
        "sph_in_scaled_array (lmax=40, 200 x)": lambda k: [k.sph_in_scaled_array(40, xi) for xi in x],
        "legendre_table (lmax=30, 400 pts)": lambda k: k.legendre_table(30, cos_t, sin_t),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    backends = {"python": _kernels.python_backend}
    if _kernels.compiled_backend is not None:
        backends["cython"] = _kernels.compiled_backend
    else:
        print("compiled extension not built; timing the fallback only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':40s}" + "".join(f"{name:>14s}" for name in backends) + f"{'speedup':>10s}")
    for label, fn in workloads(rng).items():
        times = {}
        for name, mod in backends.items():
            number = 3
            best = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat)) / number
            times[name] = best
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:40s}" + "".join(f"{t * 1e3:12.3f}ms" for t in times.values()) + f"{speed:9.1f}x")


if __name__ == "__main__":
    main()
