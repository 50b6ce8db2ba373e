import json
import subprocess
import sys

import numpy as np
import pytest

from slsht.cli import main
from slsht.harmonics import SphCoeffs
from slsht.io import DistributionReader, component_filename, read_coeffs, read_map_csv, write_coeffs


def run(capsys, *argv):
    rc = main([str(a) for a in argv])
    out = capsys.readouterr()
    return rc, out.out, out.err


@pytest.fixture
def y00(tmp_path):
    p = tmp_path / "y00.txt"
    c = SphCoeffs.zeros(0)
    c[0, 0] = 1.0
    write_coeffs(p, c)
    return p


def test_window_narrow_region(tmp_path, capsys):
    rc, out, _ = run(capsys, "window", "--theta-c", 0.5236, "--a", 0.5367, "--lh", 18, "--out", tmp_path / "h.txt")
    assert rc == 0
    lam = float(out.split("lambda=")[1])
    assert 0.88 <= lam <= 0.92
    cf = read_coeffs(tmp_path / "h.txt")
    assert cf.is_window and 0.88 <= cf.lam <= 0.92


def test_window_polar_cap_is_zonal(tmp_path, capsys):
    rc, _, _ = run(capsys, "window", "--theta-c", 0, "--a", 1.5708, "--lh", 8, "--out", tmp_path / "h.txt")
    assert rc == 0
    c = read_coeffs(tmp_path / "h.txt").coeffs
    for l in range(9):
        for m in range(-l, l + 1):
            if m:
                assert abs(c[l, m]) < 1e-8


def test_window_invalid_region(tmp_path, capsys):
    rc, _, err = run(capsys, "window", "--theta-c", 0.5, "--a", 0.4, "--lh", 4, "--out", tmp_path / "h.txt")
    assert rc == 2 and "theta_c" in err
    assert not (tmp_path / "h.txt").exists()


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["window", "--lh", "x"])
    assert exc.value.code == 2


def test_synth_deterministic(tmp_path, capsys):
    for name in ("a", "b"):
        assert run(capsys, "synth", "--kind", "random", "--lf", 18, "--seed", 1, "--out", tmp_path / name)[0] == 0
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()
    c = read_coeffs(tmp_path / "a").coeffs
    assert c.is_real()


def test_synth_example1(tmp_path, capsys):
    assert run(capsys, "synth", "--kind", "example1", "--lf", 32, "--out", tmp_path / "e")[0] == 0
    from slsht.harmonics import synthesize_array

    c = read_coeffs(tmp_path / "e").coeffs
    assert np.abs(synthesize_array(c.data, 32).imag).max() < 1e-9


def test_forward_trivial_and_slice(tmp_path, capsys, y00):
    d = tmp_path / "dist"
    assert run(capsys, "forward", "--f", y00, "--h", y00, "--out", d)[0] == 0
    vol = DistributionReader(d).read(0, 0)
    assert np.abs(vol - 1 / np.sqrt(4 * np.pi)).max() < 1e-12
    rc, _, _ = run(capsys, "slice", "--dist", d, "--l", 0, "--m", 0, "--out", tmp_path / "s.csv")
    assert rc == 0
    t, p, v = read_map_csv(tmp_path / "s.csv")
    assert v.size == 1 and abs(v[0] - 1 / np.sqrt(4 * np.pi)) < 1e-12


@pytest.fixture
def small_run(tmp_path, capsys):
    f, h, d = tmp_path / "f.txt", tmp_path / "h.txt", tmp_path / "d"
    assert run(capsys, "synth", "--lf", 8, "--seed", 3, "--out", f)[0] == 0
    assert run(capsys, "window", "--theta-c", 0.5236, "--a", 0.6, "--lh", 4, "--out", h)[0] == 0
    assert run(capsys, "forward", "--f", f, "--h", h, "--out", d)[0] == 0
    return f, h, d


def test_manifest_degree_range(small_run):
    _, _, d = small_run
    man = json.loads((d / "manifest.json").read_text())
    ls = {c["l"] for c in man["components"]}
    assert ls == set(range(0, 13)) and man["L_g"] == 12
    assert len(man["components"]) == 13**2


def test_slice_row_count_and_bad_inputs(small_run, tmp_path, capsys):
    _, _, d = small_run
    rc, _, _ = run(capsys, "slice", "--dist", d, "--l", 6, "--m", 2, "--gamma-index", 3, "--out", tmp_path / "s.csv")
    assert rc == 0
    assert len((tmp_path / "s.csv").read_text().splitlines()) == 1 + 5 * 9
    t, p, v = read_map_csv(tmp_path / "s.csv")
    vol = DistributionReader(d).read(6, 2)
    assert np.array_equal(v.reshape(5, 9), vol[:, :, 3].T)
    assert run(capsys, "slice", "--dist", d, "--l", 13, "--m", 0, "--out", tmp_path / "x.csv")[0] == 2
    assert run(capsys, "slice", "--dist", d, "--l", 1, "--m", 0, "--gamma-index", 9, "--out", tmp_path / "x.csv")[0] == 2


def test_verify_engines(small_run, capsys):
    f, h, _ = small_run
    rc, out, _ = run(capsys, "verify", "--f", f, "--h", h, "--engines", "fast,direct", "--tol", 1e-10)
    assert rc == 0 and "PASS" in out
    diff = float(out.split("max_abs_diff[fast vs direct]=")[1].split()[0])
    assert diff < 1e-10
    rc, out, _ = run(capsys, "verify", "--f", f, "--h", h, "--tol", 0)
    assert rc == 3 and "FAIL" in out


def test_verify_directories(small_run, tmp_path, capsys):
    f, h, d = small_run
    assert run(capsys, "forward", "--f", f, "--h", h, "--engine", "direct", "--out", tmp_path / "d2")[0] == 0
    rc, out, _ = run(capsys, "verify", "--dist", d, tmp_path / "d2", "--tol", 1e-10)
    assert rc == 0 and "PASS" in out


def test_inverse_round_trip_and_scaling(small_run, tmp_path, capsys):
    f, h, d = small_run
    rc, out, _ = run(capsys, "inverse", "--dist", d, "--h", h, "--out", tmp_path / "r.txt", "--compare", f)
    assert rc == 0 and float(out.split("max_abs_error=")[1]) < 1e-9
    # double every stored value in place
    for p in d.glob("g_*.bin"):
        raw = np.fromfile(p, dtype="<f8")
        p.write_bytes((2 * raw).astype("<f8").tobytes())
    assert run(capsys, "inverse", "--dist", d, "--h", h, "--out", tmp_path / "r2.txt")[0] == 0
    a, b = read_coeffs(tmp_path / "r.txt").coeffs.data, read_coeffs(tmp_path / "r2.txt").coeffs.data
    assert np.abs(b - 2 * a).max() < 1e-12


def test_inverse_tampered_manifest(small_run, tmp_path, capsys):
    _, h, d = small_run
    man = json.loads((d / "manifest.json").read_text())
    man["L_h"] = 5
    (d / "manifest.json").write_text(json.dumps(man))
    rc, _, err = run(capsys, "inverse", "--dist", d, "--h", h, "--out", tmp_path / "r.txt")
    assert rc == 2 and "error" in err


def test_inverse_missing_component(small_run, tmp_path, capsys):
    _, h, d = small_run
    (d / component_filename(3, 1)).unlink()
    assert run(capsys, "inverse", "--dist", d, "--h", h, "--out", tmp_path / "r.txt")[0] == 2


def test_inverse_zero_dc_window(small_run, tmp_path, capsys):
    _, h, d = small_run
    c = read_coeffs(h).coeffs
    c.data[0] = 0.0
    write_coeffs(tmp_path / "z.txt", c)
    rc, _, err = run(capsys, "inverse", "--dist", d, "--h", tmp_path / "z.txt", "--out", tmp_path / "r.txt")
    assert rc == 3 and "inversion impossible" in err


def test_io_errors_exit_4(tmp_path, capsys):
    assert run(capsys, "inverse", "--dist", tmp_path / "nope", "--h", tmp_path / "h", "--out", tmp_path / "o")[0] == 4
    assert run(capsys, "synth", "--lf", 2, "--out", tmp_path / "missing" / "f.txt")[0] == 4


def test_bench_smoke(tmp_path, capsys):
    rc, out, _ = run(capsys, "bench", "--lf", "4,6", "--lh", 3, "--repeats", 1, "--out", tmp_path / "b.csv")
    assert rc == 0 and "slopes tau1=" in out
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "L_f,tau1_s,tau2_s,tau3_s" and len(lines) == 3


def test_console_entry_point(tmp_path):
    out = tmp_path / "f.txt"
    r = subprocess.run([sys.executable, "-m", "slsht", "synth", "--lf", "2", "--out", str(out)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and out.exists()
