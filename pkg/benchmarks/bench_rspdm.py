"""Time the compiled and NumPy pair kernels of the boson density matrix.

    python3 benchmarks/bench_rspdm.py --kappa 10 --n 5 10 20
"""
import argparse
import time

import numpy as np

from tgdelta import _rspdm_py, bose
from tgdelta.spectrum import TrapConfig, build_spectrum

try:
    from tgdelta import _rspdm_ext
except ImportError:
    _rspdm_ext = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kappa", type=float, default=10.0)
    ap.add_argument("--n", type=int, nargs="+", default=[5, 10, 20])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    kernels = {"numpy": _rspdm_py}
    if _rspdm_ext is not None:
        kernels["cython"] = _rspdm_ext
    else:
        print("compiled kernel not built; timing the NumPy kernel only")
    print(f"{'N':>4} {'M':>6} " + " ".join(f"{k:>10}" for k in kernels) + "   speedup  max|diff|")
    for n in args.n:
        sp = build_spectrum(TrapConfig(args.kappa, n))
        ov = bose.cumulative_overlaps(sp)
        psi_t = np.ascontiguousarray(sp.samples.T)
        timing, results = {}, {}
        for name, mod in kernels.items():
            timing[name], results[name] = best_of(
                lambda mod=mod: mod.rspdm_upper(psi_t, ov.tensor, bose.DET_FLOOR), args.repeat)
        line = f"{n:>4} {sp.grid.n_points:>6} " + " ".join(f"{timing[k]:>9.3f}s" for k in kernels)
        if "cython" in kernels:
            a, b = (np.asarray(results[k][0]) for k in ("numpy", "cython"))
            ok = ~(np.asarray(results["numpy"][1], bool) | np.asarray(results["cython"][1], bool))
            line += f"   {timing['numpy'] / timing['cython']:6.1f}x  {np.max(np.abs(a - b)[ok]):.1e}"
        print(line)


if __name__ == "__main__":
    main()
