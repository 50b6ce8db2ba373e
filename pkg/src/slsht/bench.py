"""Stage timings of the fast forward transform and the inverse.

``tau1`` is the modulated-signal SHT of every ``(l, m)``, ``tau2`` the rest of
the fast forward transform (C tensor and 3-d DFT) and ``tau3`` the inverse.
The inverse is accumulated while the forward transform streams, so the full
distribution is never held in memory.
"""

import logging
import time

import numpy as np

from .synth import random_coeffs
from .transform import InverseAccumulator, iter_forward_fast
from .window import EllipticalRegion, eigenfunction_window

log = logging.getLogger(__name__)

DEFAULT_REGION = EllipticalRegion(np.pi / 6, np.pi / 6 + np.pi / 240)


def time_once(f, window):
    timings = {}
    acc = InverseAccumulator(f.band_limit, window.band_limit, window.dc)
    tau3 = 0.0
    clock = time.perf_counter
    for l, m, vol in iter_forward_fast(f, window, timings=timings):
        t0 = clock()
        acc.add(l, m, vol)
        tau3 += clock() - t0
    t0 = clock()
    rec = acc.result()
    tau3 += clock() - t0
    err = float(np.max(np.abs(rec.data - f.data)))
    return timings["tau1"], timings["tau2"], tau3, err


def warm_up(window):
    """Run a tiny transform so any JIT compilation is excluded from timings."""
    time_once(random_coeffs(2, seed=0), window)


def run_bench(L_f_list, L_h=18, repeats=3, seed=0, window=None):
    """Return rows ``(L_f, tau1, tau2, tau3, max_error)``; timings are medians over ``repeats``."""
    if window is None:
        window = eigenfunction_window(DEFAULT_REGION, L_h)
    warm_up(window)
    rows = []
    for L_f in L_f_list:
        f = random_coeffs(L_f, seed=seed)
        samples = [time_once(f, window) for _ in range(repeats)]
        t = np.median(np.array(samples), axis=0)
        err = max(s[3] for s in samples)
        rows.append((int(L_f), float(t[0]), float(t[1]), float(t[2]), err))
        log.info("L_f=%d tau1=%.3fs tau2=%.3fs tau3=%.3fs err=%.2e", L_f, *t[:3], err)
    return rows


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def slopes(rows):
    L = [r[0] for r in rows]
    return {name: loglog_slope(L, [r[i] for r in rows]) for i, name in ((1, "tau1"), (2, "tau2"), (3, "tau3"))}


def format_csv(rows):
    lines = ["L_f,tau1_s,tau2_s,tau3_s"]
    lines += [f"{r[0]},{r[1]:.6g},{r[2]:.6g},{r[3]:.6g}" for r in rows]
    return "\n".join(lines) + "\n"
