"""Compare the compiled and numpy backends of the modular RREF kernel.

    python3 benchmarks/bench_rref.py [--sizes 32 64 128] [--repeat 5]
"""

import argparse
import time

import numpy as np

from ncflat.exactlin import kernels

P = 65521


def bench(backend: str, a: np.ndarray, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        kernels.rref_mod(a, P, backend=backend)
        best = min(best, time.perf_counter() - t)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 128, 256])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    have_compiled = kernels._rref_mod_compiled is not None
    print(f"{'shape':>12} {'numpy (s)':>12} {'compiled (s)':>13} {'speedup':>8}")
    for n in args.sizes:
        # rank-deficient, wider than tall, like the connection systems
        a = rng.integers(0, P, size=(n, n // 2)) @ rng.integers(0, P, size=(n // 2, 2 * n)) % P
        t_np = bench("numpy", a, args.repeat)
        if have_compiled:
            r1, p1 = kernels.rref_mod(a, P, backend="numpy")
            r2, p2 = kernels.rref_mod(a, P, backend="compiled")
            assert p1 == p2 and np.array_equal(r1, r2), "backends disagree"
            t_c = bench("compiled", a, args.repeat)
            print(f"{n:>5} x {2 * n:<5} {t_np:>12.5f} {t_c:>13.5f} {t_np / t_c:>7.1f}x")
        else:
            print(f"{n:>5} x {2 * n:<5} {t_np:>12.5f} {'n/a':>13} {'':>8}")
    if not have_compiled:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation`")


if __name__ == "__main__":
    main()
