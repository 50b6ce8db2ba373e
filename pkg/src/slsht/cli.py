"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O error.
"""

import argparse
import logging
import sys

import numpy as np

from . import _backend
from .bench import format_csv, run_bench, slopes
from .errors import NumericalError, ValidationError
from .io import (
    DistributionReader,
    DistributionWriter,
    atomic_write,
    read_coeffs,
    write_coeffs,
    write_map_csv,
)
from .synth import example1, orientation_ratio, quarter_turn_index, random_coeffs, slice_coordinates
from .transform import ENGINES, InverseAccumulator, iter_forward
from .window import EllipticalRegion, eigenfunction_window

log = logging.getLogger("slsht")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _load_window(path):
    cf = read_coeffs(path)
    return cf.window() if cf.is_window else cf.coeffs


def _dc(h):
    return complex(getattr(h, "coeffs", h).data[0])


def cmd_window(args):
    region = EllipticalRegion(args.theta_c, args.a)
    w = eigenfunction_window(region, args.lh, args.oversample)
    write_coeffs(args.out, w)
    print(f"lambda={w.lam:.12f}")
    return EXIT_OK


def cmd_synth(args):
    if args.kind == "random":
        f = random_coeffs(args.lf, seed=args.seed)
    else:
        f = example1(args.lf, seed=args.seed)
    write_coeffs(args.out, f)
    return EXIT_OK


def cmd_forward(args):
    f = read_coeffs(args.f).coeffs
    h = _load_window(args.h)
    L_f, L_h = f.band_limit, getattr(h, "coeffs", h).band_limit
    with DistributionWriter(args.out, L_f, L_h) as w:
        for l, m, vol in iter_forward(f, h, args.engine):
            w.write(l, m, vol)
    print(f"wrote {len(w.keys)} components (l = 0..{L_f + L_h}) to {args.out}")
    return EXIT_OK


def cmd_inverse(args):
    dist = DistributionReader(args.dist)
    h = _load_window(args.h)
    L_h = getattr(h, "coeffs", h).band_limit
    if L_h != dist.L_h:
        raise ValidationError(f"window band-limit {L_h} does not match distribution L_h={dist.L_h}")
    acc = InverseAccumulator(dist.L_f, dist.L_h, _dc(h))
    for l, m, vol in dist.records(max_degree=dist.L_f):
        acc.add(l, m, vol)
    rec = acc.result()
    write_coeffs(args.out, rec)
    if args.compare:
        ref = read_coeffs(args.compare).coeffs
        if ref.band_limit != rec.band_limit:
            raise ValidationError("reference coefficients have a different band-limit")
        print(f"max_abs_error={np.max(np.abs(ref.data - rec.data)):.3e}")
    return EXIT_OK


def _max_diff_dirs(a, b):
    if (a.L_f, a.L_h) != (b.L_f, b.L_h):
        raise ValidationError("distributions have different band-limits")
    keys = set(a.keys()) | set(b.keys())
    worst = 0.0
    for l, m in sorted(keys):
        va = a.read(l, m) if (l, m) in a else 0.0
        vb = b.read(l, m) if (l, m) in b else 0.0
        worst = max(worst, float(np.max(np.abs(va - vb))))
    return worst


def cmd_verify(args):
    if args.dist:
        if len(args.dist) != 2:
            raise ValidationError("--dist takes exactly two directories")
        diff = _max_diff_dirs(DistributionReader(args.dist[0]), DistributionReader(args.dist[1]))
        print(f"max_abs_diff={diff:.3e}")
        ok = diff < args.tol
    else:
        if not (args.f and args.h):
            raise ValidationError("verify needs either --dist A B or --f and --h")
        f = read_coeffs(args.f).coeffs
        h = _load_window(args.h)
        engines = args.engines.split(",")
        for e in engines:
            if e not in ENGINES:
                raise ValidationError(f"unknown engine {e!r}")
        dists = {e: ENGINES[e](f, h) for e in engines}
        ok = True
        base = dists[engines[0]]
        for e in engines[1:]:
            diff = base.max_abs_diff(dists[e])
            print(f"max_abs_diff[{engines[0]} vs {e}]={diff:.3e}")
            ok &= diff < args.tol
        acc = InverseAccumulator(f.band_limit, base.L_h, _dc(h))
        for l, m, vol in base.records():
            acc.add(l, m, vol)
        err = float(np.max(np.abs(acc.result().data - f.data)))
        print(f"roundtrip_max_abs_error[{engines[0]}]={err:.3e}")
        ok &= err < args.tol
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_bench(args):
    if args.backend:
        _backend.set_backend(args.backend)
    rows = run_bench(args.lf, args.lh, args.repeats, seed=args.seed)
    text = format_csv(rows)
    if args.out:
        with atomic_write(args.out) as fh:
            fh.write(text)
    sys.stdout.write(text)
    if len(rows) >= 2:
        s = slopes(rows)
        print("slopes " + " ".join(f"{k}={v:.3f}" for k, v in s.items()))
    return EXIT_OK


def cmd_slice(args):
    dist = DistributionReader(args.dist)
    n = 2 * dist.L_h + 1
    if (args.l, args.m) not in dist:
        raise ValidationError(f"component (l={args.l}, m={args.m}) not in {args.dist}")
    if not (0 <= args.gamma_index < n):
        raise ValidationError(f"gamma index must be in [0, {n - 1}]")
    vol = dist.read(args.l, args.m)
    values = vol[:, :, args.gamma_index].T  # [beta, alpha] = [theta, phi]
    theta, phi = slice_coordinates(dist.L_h)
    write_map_csv(args.out, theta, phi, values)
    if args.orientation_check:
        g90 = quarter_turn_index(dist.L_h)
        ratio = orientation_ratio(values, vol[:, :, g90].T, dist.L_h)
        print(f"orientation_ratio[gamma_index={args.gamma_index} vs {g90}]={ratio:.4f}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="slsht", description="Directional spatially localised SHT")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("window", help="build a Slepian window for an elliptical region")
    s.add_argument("--theta-c", type=float, required=True)
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--lh", type=int, required=True)
    s.add_argument("--oversample", type=int, default=4)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_window)

    s = sub.add_parser("synth", help="generate a test signal")
    s.add_argument("--kind", choices=("random", "example1"), default="random")
    s.add_argument("--lf", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("forward", help="compute a distribution")
    s.add_argument("--f", required=True)
    s.add_argument("--h", required=True)
    s.add_argument("--engine", choices=sorted(ENGINES), default="fast")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_forward)

    s = sub.add_parser("inverse", help="recover coefficients from a distribution")
    s.add_argument("--dist", required=True)
    s.add_argument("--h", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--compare", help="reference coefficient file; prints the max abs error")
    s.set_defaults(func=cmd_inverse)

    s = sub.add_parser("verify", help="compare engines or distributions")
    s.add_argument("--dist", nargs="+")
    s.add_argument("--f")
    s.add_argument("--h")
    s.add_argument("--engines", default="fast,direct")
    s.add_argument("--tol", type=float, default=1e-9)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("bench", help="time the transform stages")
    s.add_argument("--lf", type=_int_list, default=[32, 48, 64, 96, 128])
    s.add_argument("--lh", type=int, default=18)
    s.add_argument("--repeats", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--backend", choices=("numba", "numpy"))
    s.add_argument("--out")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("slice", help="export one gamma slice of a component as CSV")
    s.add_argument("--dist", required=True)
    s.add_argument("--l", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--gamma-index", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--orientation-check", action="store_true",
                   help="print the example-region energy ratio against the quarter-turn slice")
    s.set_defaults(func=cmd_slice)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    _backend.configure_threads()
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
