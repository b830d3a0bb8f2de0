"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N]

Kernel rows time one local-operator application; workload rows time
whole simulations with every kernel call routed through one backend.
"""

import argparse
import math
import timeit

import numpy as np

from dualrail import _backend
from dualrail.machine import MachineConfig, run_classical, run_machine
from dualrail.postselect import sweep_gamma

# (label, cutoff, modes, targets, diagonal?)
KERNEL_CASES = [
    ("bs on 4-mode state, d=2", 2, 4, (2, 3), False),
    ("fredkin on 4-mode state, d=3", 3, 4, (0, 1, 2), False),
    ("kerr on 4-mode state, d=3", 3, 4, (1, 2), True),
    ("bs on 4-mode density, d=2", 2, 8, (2, 3), False),
    ("bs on 4-mode density, d=3", 3, 8, (2, 3), False),
    ("bs on 4-mode state, d=16", 16, 4, (2, 3), False),
    ("kerr on 4-mode state, d=16", 16, 4, (1, 2), True),
]

WORKLOADS = [
    ("lossless machine k=10", lambda: run_machine(MachineConfig(k="10"))),
    ("lossy machine k=10, gamma=0.5", lambda: run_machine(MachineConfig(k="10", gamma=0.5))),
    ("gamma sweep, 101 points", lambda: sweep_gamma("10", list(np.linspace(0, 5, 101)))),
    ("classical run, alpha=1, d=16", lambda: run_classical(1.0, cutoff=16)),
]


def best_of(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def kernel_rows(backends, repeat):
    rng = np.random.default_rng(0)
    for label, d, m, targets, diag in KERNEL_CASES:
        k = len(targets)
        psi = rng.normal(size=d**m) + 1j * rng.normal(size=d**m)
        op = np.exp(1j * rng.normal(size=d**k)) if diag else rng.normal(size=(d**k, d**k)) + 0j
        number = max(1, int(2e5 // d**m))
        row = {}
        for name, (dense, diagonal) in backends.items():
            fn = diagonal if diag else dense
            row[name] = best_of(lambda: fn(psi, d, m, op, targets), repeat, number)
        yield label, row


def workload_rows(backends, repeat):
    saved = _backend.apply_dense, _backend.apply_diag
    try:
        for label, fn in WORKLOADS:
            row = {}
            for name, (dense, diagonal) in backends.items():
                _backend.apply_dense, _backend.apply_diag = dense, diagonal
                fn()  # warm caches
                row[name] = best_of(fn, repeat, 1)
            yield label, row
    finally:
        _backend.apply_dense, _backend.apply_diag = saved


def fmt(seconds):
    if seconds < 1e-3:
        return f"{seconds * 1e6:9.1f} us"
    return f"{seconds * 1e3:9.2f} ms"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = _backend.backends()
    names = sorted(backends)
    print(f"active backend: {_backend.BACKEND}")
    header = f"{'case':<36}" + "".join(f"{n:>14}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    for title, rows in (("kernels", kernel_rows(backends, args.repeat)), ("workloads", workload_rows(backends, args.repeat))):
        print(f"\n{title}\n{header}")
        for label, row in rows:
            line = f"{label:<36}" + "".join(f"{fmt(row[n]):>14}" for n in names)
            if len(names) == 2:
                line += f"{row['python'] / row['compiled']:>9.2f}x"
            print(line)
    if "compiled" not in backends:
        print("\ncompiled extension not built; only the numpy backend was timed")


if __name__ == "__main__":
    main()
