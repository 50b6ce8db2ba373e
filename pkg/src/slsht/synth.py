"""Test signals: seeded random coefficients and a reduced-scale directional example."""

import numpy as np

from .errors import ValidationError
from .grids import rotation_matrix, ring_weights, sphere_grid
from .harmonics import SphCoeffs, legendre_table, n_coeffs, synthesize_array
from .window import EllipticalRegion, region_contains

# reference scale of the directional example: band-pass degrees and order at L = 128
EXAMPLE_L = 128
EXAMPLE_DEGREES = (40, 45)
EXAMPLE_ORDER = 20
EXAMPLE_REGION = EllipticalRegion(np.pi / 6, np.pi / 6 + np.pi / 240)
# R1 is oriented along colatitude, R2 along longitude
EXAMPLE_ROTATIONS = ((np.pi / 2, np.pi / 2, 0.0), (3 * np.pi / 2, np.pi / 2, np.pi / 2))


def make_real(data, L):
    """Overwrite ``m < 0`` with ``(-1)^m conj(f_l^{|m|})`` and drop ``Im f_l^0``."""
    out = np.array(data, dtype=complex)
    for l in range(L + 1):
        c = l * l + l
        out[c] = out[c].real
        m = np.arange(1, l + 1)
        out[c - m] = np.where(m % 2, -1.0, 1.0) * np.conj(out[c + m])
    return out


def random_coeffs(L, seed=0, real=True, max_degree=None):
    """Real and imaginary parts uniform in ``[0, 1]``; symmetrised when ``real``."""
    rng = np.random.default_rng(seed)
    size = n_coeffs(L)
    data = rng.uniform(0.0, 1.0, size) + 1j * rng.uniform(0.0, 1.0, size)
    if max_degree is not None:
        data[n_coeffs(max_degree) :] = 0.0
    if real:
        data = make_real(data, L)
    return SphCoeffs(L, data, real_signal=real)


def rotated_region_contains(region, rotation, theta, phi):
    """Membership in ``region`` rotated by the Euler angles ``rotation``."""
    R = rotation_matrix(*rotation)
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    xyz = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    back = np.tensordot(R.T, xyz, axes=1)
    t = np.arccos(np.clip(back[2], -1.0, 1.0))
    p = np.arctan2(back[1], back[0])
    return region_contains(region, t, p)


def example_parameters(L_f):
    s = L_f / EXAMPLE_L
    lo, hi = (max(1, int(round(d * s))) for d in EXAMPLE_DEGREES)
    m0 = max(1, int(round(EXAMPLE_ORDER * s)))
    hi = min(hi, L_f)
    m0 = min(m0, lo)
    return lo, hi, m0


def example1(L_f, seed=0, oversample=4):
    """Low-band random background plus band-pass harmonics masked to two rotated ellipses.

    The masked band-pass signal is projected onto degrees ``<= L_f`` by
    quadrature on the grid ``oversample * L_f``; the mask is not
    band-limited, so this projection is a quadrature approximation.
    """
    lo, hi, m0 = example_parameters(L_f)
    f1 = random_coeffs(L_f, seed, real=True, max_degree=max(1, L_f // 4))
    # Y_l^{m0} + Y_l^{-m0}, times -i for odd m0 so that it stays a real function
    phase = -1j if m0 % 2 else 1.0
    band = np.zeros(n_coeffs(L_f), dtype=complex)
    for l in range(lo, hi + 1):
        band[l * l + l + m0] = phase
        band[l * l + l - m0] = phase
    Lq = oversample * L_f
    g = sphere_grid(Lq)
    vals = synthesize_array(band, L_f, Lq)
    th, ph = np.meshgrid(g.thetas, g.phis, indexing="ij")
    mask = np.zeros(th.shape, dtype=bool)
    for rot in EXAMPLE_ROTATIONS:
        mask |= rotated_region_contains(EXAMPLE_REGION, rot, th, ph)
    vals = np.where(mask, vals.real, 0.0)
    f2 = _quadrature_projection(vals, Lq, L_f)
    f2 = make_real(f2, L_f)
    data = 1e3 * (f1.data / np.linalg.norm(f1.data) + f2 / (4 * np.linalg.norm(f2)))
    return SphCoeffs(L_f, data, real_signal=True)


def _quadrature_projection(values, Lq, L):
    """``<values, Y_l^m>`` by the ring-weight rule of grid ``Lq`` (approximate for rough maps)."""
    n = 2 * Lq + 1
    G = np.fft.fft(values, axis=-1) / n
    # plain ring weights: the exact interpolating analysis assumes band-limited samples
    P = legendre_table(L, sphere_grid(Lq).thetas)
    v = 2 * np.pi * ring_weights(Lq)
    out = np.zeros(n_coeffs(L), dtype=complex)
    for m in range(-L, L + 1):
        am = abs(m)
        ls = np.arange(am, L + 1)
        col = P[am:, am, :]
        if m < 0 and am % 2:
            col = -col
        out[ls * ls + ls + m] = (col * v) @ G[:, m % n]
    return out


def slice_coordinates(L_h):
    """``(theta, phi)`` of a slice: ``theta = beta_n``, ``phi = alpha_n`` (window centre)."""
    n = 2 * L_h + 1
    return 2 * np.pi * np.arange(L_h + 1) / n, 2 * np.pi * np.arange(n) / n


def region_energies(slice_values, L_h):
    """Energy of a ``(n_beta, n_alpha)`` slice over window centres inside R1 and R2."""
    th, ph = slice_coordinates(L_h)
    T, P = np.meshgrid(th, ph, indexing="ij")
    power = np.abs(np.asarray(slice_values).reshape(T.shape)) ** 2
    return tuple(
        float(np.sum(power[rotated_region_contains(EXAMPLE_REGION, rot, T, P)]))
        for rot in EXAMPLE_ROTATIONS
    )


def orientation_ratio(slice_g0, slice_g90, L_h):
    """``(E1/E2 at gamma=0) / (E1/E2 at gamma~pi/2)`` for the two example regions.

    R1 matches the window at ``gamma = 0`` and R2 at ``gamma = pi/2``, so a
    directional transform gives a value well above 1.
    """
    e1a, e2a = region_energies(slice_g0, L_h)
    e1b, e2b = region_energies(slice_g90, L_h)
    if min(e1a, e2a, e1b, e2b) <= 0.0:
        raise ValidationError(f"rotation grid L_h={L_h} leaves an example region without energy")
    return (e1a / e2a) / (e1b / e2b)


def quarter_turn_index(L_h):
    """Index of the gamma sample closest to ``pi/2``."""
    n = 2 * L_h + 1
    return int(np.argmin(np.abs(2 * np.pi * np.arange(n) / n - np.pi / 2)))
