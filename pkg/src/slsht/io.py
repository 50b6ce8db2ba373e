"""On-disk formats: coefficient text files, distribution directories and map CSVs.

Every writer goes through a temporary file in the destination directory and
``os.replace``, so readers never see a half-written file.
"""

import json
import os
import re
import shutil
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .harmonics import SphCoeffs, lm_arrays, n_coeffs
from .transform import SlshtDistribution
from .window import EllipticalRegion, Window

COEFF_MAGIC = "# shcoeff v1"
DIST_FORMAT = "slsht-distribution v1"
MANIFEST = "manifest.json"

_HEADER_RE = re.compile(
    r"^# shcoeff v1 L=(\d+)"
    r"(?: window theta_c=(\S+) a=(\S+) lambda=(\S+))?\s*$"
)


def _g(x):
    return "%.17g" % x


@contextmanager
def atomic_write(path, mode="w"):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix="." + path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# coefficient files


@dataclass
class CoeffFile:
    coeffs: SphCoeffs
    theta_c: float = None
    a: float = None
    lam: float = None

    @property
    def is_window(self):
        return self.lam is not None

    def window(self):
        if not self.is_window:
            raise ValidationError("coefficient file carries no window header")
        return Window(self.coeffs, self.lam, EllipticalRegion(self.theta_c, self.a))


def format_coeffs(coeffs, window=None):
    L = coeffs.band_limit
    head = f"{COEFF_MAGIC} L={L}"
    if window is not None:
        r = window.region
        head += f" window theta_c={_g(r.theta_c)} a={_g(r.a)} lambda={_g(window.lam)}"
    lines = [head]
    l, m = lm_arrays(L)
    for li, mi, v in zip(l, m, coeffs.data):
        lines.append(f"{li} {mi} {_g(v.real)} {_g(v.imag)}")
    return "\n".join(lines) + "\n"


def write_coeffs(path, coeffs, window=None):
    if isinstance(coeffs, Window):
        coeffs, window = coeffs.coeffs, coeffs
    text = format_coeffs(coeffs, window)
    with atomic_write(path) as fh:
        fh.write(text)


def parse_coeffs(text, name="<string>"):
    lines = text.splitlines()
    if not lines:
        raise ValidationError(f"{name}: empty coefficient file")
    mt = _HEADER_RE.match(lines[0])
    if not mt:
        raise ValidationError(f"{name}: bad header {lines[0]!r}")
    L = int(mt.group(1))
    data = np.zeros(n_coeffs(L), dtype=complex)
    seen = np.zeros(n_coeffs(L), dtype=bool)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValidationError(f"{name}:{lineno}: expected 'l m re im'")
        try:
            l, m = int(parts[0]), int(parts[1])
            re_, im_ = float(parts[2]), float(parts[3])
        except ValueError as exc:
            raise ValidationError(f"{name}:{lineno}: {exc}") from None
        if not (0 <= l <= L and abs(m) <= l):
            raise ValidationError(f"{name}:{lineno}: (l={l}, m={m}) outside band-limit {L}")
        i = l * l + l + m
        if seen[i]:
            raise ValidationError(f"{name}:{lineno}: duplicate entry (l={l}, m={m})")
        seen[i] = True
        data[i] = complex(re_, im_)
    if not seen.all():
        raise ValidationError(f"{name}: {int((~seen).sum())} coefficients missing")
    cf = CoeffFile(SphCoeffs(L, data))
    if mt.group(2) is not None:
        cf.theta_c, cf.a, cf.lam = (float(mt.group(k)) for k in (2, 3, 4))
    return cf


def read_coeffs(path):
    path = Path(path)
    return parse_coeffs(path.read_text(), str(path))


# ---------------------------------------------------------------------------
# distribution directories


def component_filename(l, m):
    return f"g_l{l:04d}_m{m:+05d}.bin"


def _manifest(L_f, L_h, degree_limit, keys):
    n = 2 * L_h + 1
    return {
        "format": DIST_FORMAT,
        "L_f": L_f,
        "L_h": L_h,
        "L_g": L_f + L_h,
        "degree_limit": degree_limit,
        "grid": {"n_alpha": n, "n_beta": L_h + 1, "n_gamma": n},
        "dtype": "complex128-le",
        "order": ["alpha", "beta", "gamma"],
        "components": [{"l": l, "m": m, "file": component_filename(l, m)} for l, m in keys],
    }


class DistributionWriter:
    """Stream components into a directory; the directory appears on ``close``.

    Files go to a staging directory next to ``path`` which is renamed into
    place at the end.  An existing distribution directory at ``path`` is
    replaced; any other non-empty directory is refused.
    """

    def __init__(self, path, L_f, L_h, degree_limit=None):
        self.path = Path(path)
        self.L_f, self.L_h = L_f, L_h
        self.degree_limit = L_f + L_h if degree_limit is None else degree_limit
        n = 2 * L_h + 1
        self.shape = (n, L_h + 1, n)
        if self.path.exists():
            if not self.path.is_dir():
                raise FileExistsError(f"{self.path} exists and is not a directory")
            if any(self.path.iterdir()) and not (self.path / MANIFEST).exists():
                raise FileExistsError(f"{self.path} is a non-empty directory without a manifest")
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.stage = Path(tempfile.mkdtemp(dir=self.path.parent, prefix="." + self.path.name + "."))
        self.keys = []

    def write(self, l, m, vol):
        vol = np.asarray(vol, dtype="<c16")
        if vol.shape != self.shape:
            raise ValidationError(f"component ({l},{m}) shape {vol.shape} != {self.shape}")
        if not (0 <= l <= self.degree_limit and abs(m) <= l):
            raise ValidationError(f"component ({l},{m}) outside degree limit {self.degree_limit}")
        (self.stage / component_filename(l, m)).write_bytes(np.ascontiguousarray(vol).tobytes())
        self.keys.append((l, m))

    def close(self):
        keys = sorted(set(self.keys))
        if len(keys) != len(self.keys):
            raise ValidationError("duplicate components written")
        text = json.dumps(_manifest(self.L_f, self.L_h, self.degree_limit, keys), indent=1)
        (self.stage / MANIFEST).write_text(text + "\n")
        old = None
        if self.path.exists():
            old = Path(tempfile.mkdtemp(dir=self.path.parent, prefix="." + self.path.name + ".old."))
            os.rmdir(old)
            os.replace(self.path, old)
        os.replace(self.stage, self.path)
        if old is not None:
            shutil.rmtree(old)

    def abort(self):
        shutil.rmtree(self.stage, ignore_errors=True)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.close()
        else:
            self.abort()
        return False


def write_distribution(path, records, L_f, L_h, degree_limit=None):
    """Write ``(l, m, volume)`` records (or a ``SlshtDistribution``)."""
    if isinstance(records, SlshtDistribution):
        degree_limit = records.degree_limit
        records = records.records()
    with DistributionWriter(path, L_f, L_h, degree_limit) as w:
        for l, m, vol in records:
            w.write(l, m, vol)


class DistributionReader:
    """Validated read access to a distribution directory."""

    def __init__(self, path):
        self.path = Path(path)
        mpath = self.path / MANIFEST
        if not mpath.is_file():
            raise FileNotFoundError(f"{mpath} not found")
        try:
            man = json.loads(mpath.read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{mpath}: invalid JSON ({exc})") from None
        self.manifest = man
        try:
            if man["format"] != DIST_FORMAT:
                raise ValidationError(f"{mpath}: unknown format {man['format']!r}")
            self.L_f, self.L_h, L_g = int(man["L_f"]), int(man["L_h"]), int(man["L_g"])
            self.degree_limit = int(man.get("degree_limit", L_g))
            grid = man["grid"]
            comps = man["components"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"{mpath}: missing field {exc}") from None
        if L_g != self.L_f + self.L_h:
            raise ValidationError(f"{mpath}: L_g={L_g} != L_f + L_h = {self.L_f + self.L_h}")
        n = 2 * self.L_h + 1
        if (grid["n_alpha"], grid["n_beta"], grid["n_gamma"]) != (n, self.L_h + 1, n):
            raise ValidationError(f"{mpath}: grid sizes do not match L_h={self.L_h}")
        self.shape = (n, self.L_h + 1, n)
        nbytes = 16 * n * n * (self.L_h + 1)
        self.files = {}
        for c in comps:
            l, m = int(c["l"]), int(c["m"])
            if not (0 <= l <= self.degree_limit and abs(m) <= l):
                raise ValidationError(f"{mpath}: component ({l},{m}) out of range")
            if (l, m) in self.files:
                raise ValidationError(f"{mpath}: duplicate component ({l},{m})")
            fp = self.path / c["file"]
            if not fp.is_file():
                raise ValidationError(f"{mpath}: component file {c['file']} missing")
            size = fp.stat().st_size
            if size != nbytes:
                raise ValidationError(
                    f"{fp}: {size} bytes, expected {nbytes} for L_h={self.L_h}"
                )
            self.files[l, m] = fp
        on_disk = {p.name for p in self.path.glob("g_*.bin")}
        if on_disk != {p.name for p in self.files.values()}:
            raise ValidationError(f"{mpath}: component list does not match directory contents")

    def keys(self):
        return sorted(self.files)

    def __contains__(self, lm):
        return tuple(lm) in self.files

    def read(self, l, m):
        if (l, m) not in self.files:
            raise KeyError(f"component ({l},{m}) not in {self.path}")
        return np.fromfile(self.files[l, m], dtype="<c16").astype(complex).reshape(self.shape)

    def records(self, max_degree=None):
        for l, m in self.keys():
            if max_degree is None or l <= max_degree:
                yield l, m, self.read(l, m)

    def load(self):
        return SlshtDistribution.from_stream(self.L_f, self.L_h, self.records(), self.degree_limit)


def read_distribution(path):
    return DistributionReader(path).load()


# ---------------------------------------------------------------------------
# map CSV


def format_map_csv(thetas, phis, values):
    """Rows ``theta,phi,re,im`` in theta-major order."""
    values = np.asarray(values).reshape(len(thetas), len(phis))
    out = ["theta,phi,re,im"]
    for i, t in enumerate(thetas):
        for j, p in enumerate(phis):
            v = values[i, j]
            out.append(f"{_g(t)},{_g(p)},{_g(v.real)},{_g(v.imag)}")
    return "\n".join(out) + "\n"


def write_map_csv(path, thetas, phis, values):
    text = format_map_csv(thetas, phis, values)
    with atomic_write(path) as fh:
        fh.write(text)


def read_map_csv(path):
    """Return ``(theta, phi, values)`` flat arrays."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or lines[0].strip() != "theta,phi,re,im":
        raise ValidationError(f"{path}: bad CSV header")
    try:
        arr = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:] if ln.strip()])
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    if arr.size == 0:
        return np.zeros(0), np.zeros(0), np.zeros(0, dtype=complex)
    if arr.shape[1] != 4:
        raise ValidationError(f"{path}: expected 4 columns")
    return arr[:, 0], arr[:, 1], arr[:, 2] + 1j * arr[:, 3]
