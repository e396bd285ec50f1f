"""Compare the compiled kernels against the pure-Python fallback.

Times the two hot paths on identical inputs and checks that both backends
produce the same answers:

* exhaustive clique-number pmf over all 2^m edge outcomes
* batched greedy coverage sweeps over many sampled edge masks

Run from the repository root::

    python3 benchmarks/bench_backends.py --repeat 5
"""

import argparse
import sys
import time

import numpy as np

from chaingreedy.backends import HAVE_COMPILED, pykernels
from chaingreedy.coverage import CoverageOracle, _order_layout, generate_instance

if HAVE_COMPILED:
    from chaingreedy.backends import _kernels
else:
    _kernels = None


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_pmf(repeat):
    print("clique pmf by exhaustive enumeration")
    rng = np.random.default_rng(42)
    for m in (16, 20, 22):
        probs = rng.uniform(0.05, 0.95, m)
        py = _time(lambda: pykernels.clique_pmf_by_enumeration(probs), repeat)
        row = f"  m={m:2d} ({1 << m:>9,} masks)  python {py * 1e3:9.2f} ms"
        if _kernels is not None:
            cy = _time(lambda: _kernels.clique_pmf_by_enumeration(probs), repeat)
            a = pykernels.clique_pmf_by_enumeration(probs)
            b = _kernels.clique_pmf_by_enumeration(probs)
            dev = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
            row += f"  compiled {cy * 1e3:8.2f} ms  speedup {py / cy:6.1f}x  dev {dev:.1e}"
        print(row)


def bench_greedy(repeat, sweeps=2000):
    print(f"greedy coverage sweep ({sweeps} random masks per timing)")
    inst = generate_instance(seed=5)
    oracle = CoverageOracle(inst)
    layout = _order_layout(oracle, tuple(range(1, inst.n + 1)))
    rng = np.random.default_rng(9)
    masks = rng.integers(0, 2, size=(sweeps, inst.n - 1), dtype=np.uint8)

    def run(kernels):
        total = 0
        for bits in masks:
            _, value = kernels.coverage_chain_greedy(
                layout.masks, layout.starts, layout.kappas, bits
            )
            total += value
        return total

    py = _time(lambda: run(pykernels), repeat)
    row = f"  n={inst.n} points={inst.points.shape[0]}  python {py * 1e3:9.2f} ms"
    if _kernels is not None:
        cy = _time(lambda: run(_kernels), repeat)
        if run(pykernels) != run(_kernels):
            raise AssertionError("backends disagree on total coverage")
        row += f"  compiled {cy * 1e3:8.2f} ms  speedup {py / cy:6.1f}x  totals match"
    print(row)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--repeat", type=int, default=3, help="timing repetitions, best is kept"
    )
    args = parser.parse_args(argv)
    if _kernels is None:
        print("compiled backend not available; timing the Python fallback only")
    bench_pmf(args.repeat)
    bench_greedy(args.repeat)
    return 0


if __name__ == "__main__":
    sys.exit(main())
