"""Compare the numba and numpy statevector kernels.

Usage::

    python benchmarks/bench_kernels.py [--qubits 4] [--batch 1320] [--repeat 20]

Part one times each kernel directly on a batch shaped like one parameter-shift
gradient evaluation (33 parameter rows x 40 samples for the default circuit).
Part two runs one short training trial end to end in a subprocess per backend,
since the backend is chosen at import time via ``FEDVQC_KERNELS``.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from fedvqc.kernels import numba_kernels, numpy_kernels
from fedvqc.statevector import ry_matrices

TRIAL_SNIPPET = """
import time
from fedvqc.config import ExperimentConfig
from fedvqc.experiment import run_trial
from fedvqc.kernels import BACKEND
cfg = ExperimentConfig(max_iterations={rounds})
run_trial(cfg, 0)  # warm-up (jit compile / cache load)
t = time.perf_counter()
run_trial(cfg, 1)
print(BACKEND, time.perf_counter() - t)
"""


def kernel_timings(n, batch, repeat):
    rng = np.random.default_rng(0)
    state = rng.normal(size=(batch, 1 << n)) + 1j * rng.normal(size=(batch, 1 << n))
    mats = ry_matrices(rng.normal(size=batch))
    strides = [1 << (n - 1 - q) for q in range(n)]
    rows = []
    for name, mod in (("numpy", numpy_kernels), ("numba", numba_kernels)):
        # warm-up also triggers compilation
        mod.apply_1q(state.copy(), mats, 1)
        mod.apply_cnot(state.copy(), strides[0], strides[-1])
        mod.z_expectations(state, strides)
        work = state.copy()
        t1 = min(timeit.repeat(lambda: mod.apply_1q(work, mats, strides[1]), number=10, repeat=repeat)) / 10
        t2 = min(timeit.repeat(lambda: mod.apply_cnot(work, strides[0], strides[-1]), number=10, repeat=repeat)) / 10
        t3 = min(timeit.repeat(lambda: mod.z_expectations(work, strides), number=10, repeat=repeat)) / 10
        rows.append((name, t1, t2, t3))
    return rows


def trial_timing(backend, rounds):
    env = dict(os.environ, FEDVQC_KERNELS=backend)
    out = subprocess.run([sys.executable, "-c", TRIAL_SNIPPET.format(rounds=rounds)], env=env,
                         capture_output=True, text=True, check=True)
    name, seconds = out.stdout.split()
    return name, float(seconds)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--qubits", type=int, default=4)
    p.add_argument("--batch", type=int, default=33 * 40)
    p.add_argument("--repeat", type=int, default=20)
    p.add_argument("--rounds", type=int, default=30)
    args = p.parse_args(argv)

    print(f"kernels, {args.qubits} qubits, batch {args.batch} (best of {args.repeat}, microseconds per call)")
    print(f"{'backend':8s} {'apply_1q':>10s} {'apply_cnot':>11s} {'z_expect':>10s}")
    rows = kernel_timings(args.qubits, args.batch, args.repeat)
    for name, *ts in rows:
        print(f"{name:8s} " + " ".join(f"{t * 1e6:10.1f}" for t in ts))
    base = rows[0][1:]
    print("speedup  " + " ".join(f"{b / t:10.2f}x" for b, t in zip(base, rows[1][1:])))

    print(f"\none training trial, {args.rounds} rounds, default config")
    for backend in ("numpy", "numba"):
        name, secs = trial_timing(backend, args.rounds)
        print(f"{name:8s} {secs:8.3f} s")


if __name__ == "__main__":
    main()
