"""Compare the compiled and numpy propagation kernels.

Times the ordered product of M random 3x3 hermitian exponentials with each
backend, then one lab-frame gate simulation end to end. Run with

    python3 benchmarks/bench_kernels.py [--sizes 1000,10000,100000] [--repeat 5]
"""
from __future__ import annotations

import argparse
import math
import timeit

import numpy as np

from holoq import _backend
from holoq.labframe import LabFrameSpec, simulate_labframe_gate
from holoq.model import LaserParams


def _stack(m: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(m, 3, 3)) + 1j * rng.normal(size=(m, 3, 3))
    return 0.5 * (a + np.conj(np.swapaxes(a, 1, 2)))


def _best(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_product(sizes, repeat: int, backends) -> None:
    print(f"{'factors':>10} " + " ".join(f"{b:>12}" for b in backends) + "   max |dU|")
    for m in sizes:
        b = _stack(m)
        times, results = [], []
        for name in backends:
            kernel = _backend.get_kernel(name)
            times.append(_best(lambda: kernel(b, 0.01), repeat))
            results.append(kernel(b, 0.01)[0])
        diff = max(float(np.max(np.abs(r - results[0]))) for r in results)
        print(f"{m:>10} " + " ".join(f"{t * 1e3:>10.2f}ms" for t in times) + f"   {diff:.1e}")


def bench_labframe(ratio: float, repeat: int, backends) -> None:
    spec = LabFrameSpec.build(LaserParams(1, 0), math.pi / 2, ratio, "gaussian")
    print(f"\nlab-frame phase gate, 2 pi/(nu tau) = {ratio}")
    active = _backend.expm_product
    try:
        for name in backends:
            _backend.expm_product = _backend.get_kernel(name)
            t = _best(lambda: simulate_labframe_gate(spec), repeat)
            r = simulate_labframe_gate(spec)
            print(f"  {name:>7}: {t:.3f} s  (steps per pulse {r.steps[0]}, infidelity {r.infidelity:.3e})")
    finally:
        _backend.expm_product = active


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="1000,10000,100000")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--ratio", type=float, default=0.003)
    args = ap.parse_args()
    backends = ["python"]
    try:
        _backend.get_kernel("cython")
    except ImportError:
        print("compiled extension not built; timing the numpy kernel only")
    else:
        backends.insert(0, "cython")
    print(f"active backend: {_backend.BACKEND}\n")
    bench_product([int(s) for s in args.sizes.split(",")], args.repeat, backends)
    bench_labframe(args.ratio, max(1, args.repeat // 2), backends)


if __name__ == "__main__":
    main()
