"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Reports the best wall time per kernel and size for each available backend,
and checks that both backends agree on every input.
"""

import argparse
import timeit

import numpy as np

from spadimo._kernels import backends


def _spd(rng, p):
    A = rng.standard_normal((p, p))
    return A @ A.T + np.eye(p)


def _qn_input(rng, n):
    y = np.sort(rng.standard_normal(n))
    h = n // 2 + 1
    return y, h * (h - 1) // 2


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)
    kernels = backends()
    cases = [("jacobi_eigh", p, (_spd(rng, p),)) for p in (10, 40, 100)]
    cases += [("qn_order_statistic", n, _qn_input(rng, n)) for n in (100, 1000, 10_000)]

    names = sorted(kernels)
    print(f"{'kernel':<20}{'size':>7}" + "".join(f"{n + ' ms':>14}" for n in names)
          + ("   speedup" if len(names) == 2 else ""))
    for kernel, size, inputs in cases:
        times, results = {}, {}
        for name in names:
            fn = getattr(kernels[name], kernel)
            results[name] = fn(*inputs)
            number = 1 if size >= 100 and name == "python" else 3
            best = min(timeit.repeat(lambda: fn(*inputs), number=number, repeat=args.repeat))
            times[name] = 1e3 * best / number
        line = f"{kernel:<20}{size:>7}" + "".join(f"{times[n]:>14.3f}" for n in names)
        if len(names) == 2:
            line += f"{times['python'] / times['compiled']:>9.1f}x"
        print(line)
        if len(names) == 2:
            a, b = results["compiled"], results["python"]
            if kernel == "jacobi_eigh":
                same = np.allclose(np.sort(a[0]), np.sort(b[0]), rtol=1e-10, atol=1e-12)
            else:
                same = a == b
            if not same:
                print(f"  backends disagree on {kernel} size {size}")


if __name__ == "__main__":
    main()
