import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from slsht.harmonics import SphCoeffs, conj_reflect, n_coeffs  # noqa: E402
from slsht.window import EllipticalRegion, eigenfunction_window  # noqa: E402

NARROW_REGION = EllipticalRegion(np.pi / 6, np.pi / 6 + np.pi / 240)


def random_sph(L, rng, real=False):
    d = rng.standard_normal(n_coeffs(L)) + 1j * rng.standard_normal(n_coeffs(L))
    if real:
        d = 0.5 * (d + conj_reflect(d, L))
    return SphCoeffs(L, d, real_signal=real)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def window18():
    return eigenfunction_window(NARROW_REGION, 18)


@pytest.fixture(scope="session")
def window4():
    return eigenfunction_window(EllipticalRegion(np.pi / 6, np.pi / 6 + np.pi / 60), 4)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE = []


def record_acceptance(number, ok, detail):
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
