"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_backends.py --lf 16,32,64 --lh 18

Prints one CSV row per (backend, L_f) with the fast-forward stage times and
the round-trip error, then the numpy/numba speed-up per stage.
"""

import argparse
import sys
import time

import numpy as np

from slsht import _backend
from slsht.bench import DEFAULT_REGION, time_once
from slsht.harmonics import legendre_column
from slsht.synth import random_coeffs
from slsht.window import eigenfunction_window


def _int_list(text):
    return [int(x) for x in text.split(",") if x]


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--lf", type=_int_list, default=[16, 32, 64])
    p.add_argument("--lh", type=int, default=18)
    p.add_argument("--repeats", type=int, default=3)
    args = p.parse_args(argv)
    if not _backend.HAVE_NUMBA:
        print("numba is not importable; only the numpy path can be timed", file=sys.stderr)
    backends = ["numba", "numpy"] if _backend.HAVE_NUMBA else ["numpy"]
    h = eigenfunction_window(DEFAULT_REGION, args.lh)
    rows = {}
    print("backend,L_f,tau1_s,tau2_s,tau3_s,legendre_s,max_error")
    for name in backends:
        with _backend.backend(name):
            time_once(random_coeffs(2), h)  # compile outside the timings
            legendre_column(0, 4, np.linspace(0, np.pi, 5))
            for L_f in args.lf:
                f = random_coeffs(L_f, seed=0)
                samples = np.array([time_once(f, h) for _ in range(args.repeats)])
                theta = np.linspace(0, np.pi, 4 * L_f + 1)
                t0 = time.perf_counter()
                for m in range(0, 2 * L_f + 1, 4):
                    legendre_column(m, 2 * L_f, theta)
                tl = time.perf_counter() - t0
                t = np.median(samples, axis=0)
                rows[name, L_f] = t
                print(f"{name},{L_f},{t[0]:.4g},{t[1]:.4g},{t[2]:.4g},{tl:.4g},{samples[:, 3].max():.2e}")
    if len(backends) == 2:
        print("speed-up numpy/numba (tau1, tau2):")
        for L_f in args.lf:
            a, b = rows["numpy", L_f], rows["numba", L_f]
            print(f"  L_f={L_f}: {a[0] / b[0]:.2f}x, {a[1] / b[1]:.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
