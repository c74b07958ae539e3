"""Compare the compiled and pure-Python kernels on the two hot loops.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per (kernel, workload, backend) with the best wall time and
the speed-up of the compiled backend.  Outputs of both backends are checked
for equality before timing.
"""

import argparse
import time

import numpy as np

from wpf import models
from wpf.blackbox import wrap
from wpf.kernels import backends


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def closure_workloads():
    out = []
    for ref in ("zn-star:91", "elem-abelian:2^7", "dihedral:32"):
        alg = models.algebra_from_ref(ref)
        ar, tabs, size = alg.kernel_view()
        rng = np.random.default_rng(0)
        seeds = rng.integers(size, size=3).astype(np.int64)
        out.append((f"closure {ref}", (ar, tabs, size, seeds, -1, -1)))
    bb = wrap(models.units_group(77), seed=1)
    ar, tabs, size = bb.kernel_view()
    seeds = np.array(bb.elements()[1:3], dtype=np.int64)
    out.append(("closure blackbox zn-star:77", (ar, tabs, size, seeds, -1, -1)))
    return out


def permute_workloads():
    out = []
    for n in (12, 16, 20):
        rng = np.random.default_rng(n)
        amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        amps /= np.linalg.norm(amps)
        w = n // 2
        perm = rng.permutation(2**w).astype(np.int64)
        # one register of width w at the top of the index
        shifts = np.array([n - w], dtype=np.int64)
        widths = np.array([w], dtype=np.int64)
        out.append((f"permute {n} qubits", (amps, perm, shifts, widths)))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = backends()
    if "cython" not in impls:
        print("compiled backend not built; only the pure-Python kernels are available")
    jobs = [("closure", w) for w in closure_workloads()] + [("permute_registers", w) for w in permute_workloads()]
    for fname, (label, argv) in jobs:
        results = {name: getattr(mod, fname)(*argv) for name, mod in impls.items()}
        ref = results["python"]
        for name, res in results.items():
            same = all(np.array_equal(a, b) for a, b in zip(ref, res)) if fname == "closure" else np.array_equal(ref, res)
            if not same:
                raise SystemExit(f"{label}: backend {name} disagrees with the Python reference")
        times = {name: best_of(lambda m=mod: getattr(m, fname)(*argv), args.repeat) for name, mod in impls.items()}
        line = "  ".join(f"{name}={t * 1e3:9.3f} ms" for name, t in times.items())
        speed = f"  speed-up x{times['python'] / times['cython']:.1f}" if "cython" in times else ""
        print(f"{label:32s} {line}{speed}")


if __name__ == "__main__":
    main()
