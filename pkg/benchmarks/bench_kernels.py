"""Time the compiled kernels against the pure-Python fallback.

Usage::

    python benchmarks/bench_kernels.py [--size 200] [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from midsub import _kernels_py as pure

try:
    from midsub import _kernels as compiled
except ImportError:  # extension not built
    compiled = None


def _stochastic(n: int, rng: np.random.Generator) -> np.ndarray:
    M = rng.random((n, n)) * (rng.random((n, n)) < 0.05)
    M[np.arange(n), np.arange(n)] += 1.0
    return M / M.sum(axis=1, keepdims=True)


def _chain(n: int) -> np.ndarray:
    # cyclic shift plus self loops; a full column first appears at power n - 1
    P = np.eye(n, dtype=bool)
    P[np.arange(n), (np.arange(n) + 1) % n] = True
    return P


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--size", type=int, default=200)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    M = _stochastic(args.size, rng)
    x0 = rng.random(args.size)
    P = _chain(args.size // 4)

    backends = {"python": pure}
    if compiled is not None:
        backends["cython"] = compiled
    print(f"size {args.size}, best of {args.repeat}")
    for name, mod in backends.items():
        t_pow = min(timeit.repeat(lambda: mod.power_iteration(M, x0, 1e-12, 5000),
                                  number=1, repeat=args.repeat))
        t_col = min(timeit.repeat(lambda: mod.reachable_positive_column(P, args.size),
                                  number=1, repeat=args.repeat))
        print(f"{name:>7}: power_iteration {t_pow * 1e3:8.2f} ms, "
              f"reachable_positive_column {t_col * 1e3:8.2f} ms")
    if compiled is None:
        print("compiled extension not available")


if __name__ == "__main__":
    main()
