"""Slepian windows concentrated in elliptical regions about the north pole.

The region ``R(theta_c, a)`` is the set of points whose angular distances to
the two foci ``(theta_c, 0)`` and ``(theta_c, pi)`` sum to at most ``2a``, so
it is elongated along the x-axis.  The window is the band-limited function
with the largest fraction of its energy inside ``R``: the dominant
eigenvector of the concentration matrix

    K[(l,m), (l',m')] = int_R Y_{l'}^{m'} conj(Y_l^m) ds.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError, ZeroDCError
from .grids import ring_weights, sphere_grid
from .harmonics import SphCoeffs, conj_reflect, legendre_table, n_coeffs, synthesize_array

log = logging.getLogger(__name__)

MIN_MASK_SAMPLES = 10
# tolerance on the upper bound a <= pi/2 for decimal input
A_SLACK = 1e-4


@dataclass(frozen=True)
class EllipticalRegion:
    theta_c: float
    a: float

    def __post_init__(self):
        if not (0.0 <= self.theta_c):
            raise ValidationError(f"theta_c={self.theta_c} must be >= 0")
        if not (self.theta_c <= self.a):
            raise ValidationError(f"a={self.a} must be >= theta_c={self.theta_c}")
        if not (self.a <= np.pi / 2 + A_SLACK):
            raise ValidationError(f"a={self.a} must be <= pi/2")
        if self.a > np.pi / 2:
            # accept pi/2 typed as a rounded decimal such as 1.5708
            object.__setattr__(self, "a", np.pi / 2)

    def area(self, L=512):
        """Area by mask quadrature on a fine grid."""
        return float(np.sum(mask_quadrature(self, L)))


@dataclass(frozen=True)
class Window:
    coeffs: SphCoeffs
    lam: float
    region: EllipticalRegion

    @property
    def band_limit(self):
        return self.coeffs.band_limit

    @property
    def dc(self):
        return complex(self.coeffs.data[0])


def angular_distance(p1, p2):
    (t1, f1), (t2, f2) = p1, p2
    c = np.sin(t1) * np.sin(t2) * np.cos(np.subtract(f1, f2)) + np.cos(t1) * np.cos(t2)
    return np.arccos(np.clip(c, -1.0, 1.0))


def region_contains(region, theta, phi, tol=1e-12):
    d = angular_distance((theta, phi), (region.theta_c, 0.0)) + angular_distance(
        (theta, phi), (region.theta_c, np.pi)
    )
    return d <= 2 * region.a + tol


def region_mask(region, L):
    g = sphere_grid(L)
    return region_contains(region, g.thetas[:, None], g.phis[None, :])


def mask_quadrature(region, L):
    """Quadrature weights on the sphere grid ``L`` restricted to ``region``."""
    n = 2 * L + 1
    wts = ring_weights(L)[:, None] * (2 * np.pi / n)
    return np.where(region_mask(region, L), wts, 0.0)


def concentration_matrix(region, L_h, oversample=4):
    """Hermitian ``(L_h+1)^2`` concentration matrix by mask quadrature."""
    if oversample < 2:
        raise ValidationError("oversample must be at least 2 for an exact full-sphere kernel")
    Lq = oversample * L_h
    mask = region_mask(region, Lq)
    if mask.sum() < MIN_MASK_SAMPLES:
        raise ValidationError(
            f"region contains only {int(mask.sum())} samples of the quadrature grid; "
            f"need at least {MIN_MASK_SAMPLES}"
        )
    g = sphere_grid(Lq)
    n = 2 * Lq + 1
    v = ring_weights(Lq)
    # M[t, k] = (2 pi / n) sum_phi mask exp(i k phi), k stored mod n
    M = np.fft.ifft(mask.astype(float), axis=1) * (2 * np.pi)
    P = legendre_table(L_h, g.thetas)
    size = n_coeffs(L_h)
    K = np.zeros((size, size), dtype=complex)
    idx = {}
    for m in range(-L_h, L_h + 1):
        ls = np.arange(abs(m), L_h + 1)
        col = P[abs(m):, abs(m), :]
        if m < 0 and m % 2:
            col = -col
        idx[m] = (ls * ls + ls + m, col)
    for m, (rows, Pm) in idx.items():
        left = Pm * v
        for mp, (cols, Pmp) in idx.items():
            blk = (left * M[:, (mp - m) % n]) @ Pmp.T
            K[np.ix_(rows, cols)] = blk
    K = 0.5 * (K + K.conj().T)
    return K


def _start_vector(L):
    rng = np.random.default_rng(12345)
    v = rng.standard_normal(n_coeffs(L)) + 1j * rng.standard_normal(n_coeffs(L))
    v = 0.5 * (v + conj_reflect(v, L))
    return v / np.linalg.norm(v)


def power_iteration(K, v0, rtol=1e-12, max_iter=100_000, vtol=1e-10, square_every=500, patience=10):
    """Dominant eigenpair of a Hermitian PSD matrix.

    Converged when the Rayleigh quotient of ``K`` changes by less than
    ``rtol`` (relative) and the estimated distance to the eigenvector,
    ``step / (1 - ratio)`` with ``ratio`` the observed contraction of the
    steps, is below ``vtol`` for ``patience`` consecutive steps.  The estimate
    only sees the slowest mode once faster ones have died out, hence the
    patience; modes closer than ``~vtol`` in relative eigenvalue are not
    resolved.  Clustered spectra (caps, where the top
    orders differ by ~1e-10) would need billions of plain steps, so every
    ``square_every`` steps the iteration operator is replaced by its
    normalised square.
    """
    A = np.asarray(K)
    v = v0 / np.linalg.norm(v0)
    lam = float(np.real(np.vdot(v, K @ v)))
    prev = np.inf
    hits = 0
    for it in range(1, max_iter + 1):
        w = A @ v
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            raise ConvergenceError("power iteration collapsed to the zero vector")
        w /= nrm
        # eigenvectors are defined up to phase: align before measuring the step
        c = np.vdot(w, v)
        step = float(np.linalg.norm(v - w * (c / abs(c) if c != 0 else 1.0)))
        v = w
        new = float(np.real(np.vdot(v, K @ v)))
        ratio = min(step / prev, 1.0 - 1e-16) if prev > 0 else 0.0
        dist = step if step <= 64 * np.finfo(float).eps else step / (1.0 - ratio)
        hits = hits + 1 if (abs(new - lam) <= rtol * abs(new) and dist <= vtol) else 0
        if hits >= patience:
            log.debug("power iteration converged after %d steps", it)
            return new, v
        lam, prev = new, step
        if it % square_every == 0:
            A = A @ A
            A = 0.5 * (A + A.conj().T) / np.linalg.norm(A, 2)
            prev = np.inf
    raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")


def north_pole_value(data, L):
    l = np.arange(L + 1)
    return complex(np.sum(data[l * l + l] * np.sqrt((2 * l + 1) / (4 * np.pi))))


def eigenfunction_window(region, L_h, oversample=4, max_iter=100_000):
    """Dominant Slepian eigenfunction of ``region``, real in space and positive at the north pole."""
    K = concentration_matrix(region, L_h, oversample)
    lam, h = power_iteration(K, _start_vector(L_h), max_iter=max_iter)
    # fix the global phase: real and positive at the north pole
    npv = north_pole_value(h, L_h)
    ref = npv if abs(npv) > 1e-8 else h[0]
    if abs(ref) == 0.0:
        raise ZeroDCError("window has neither a north-pole value nor a DC component")
    h = h * (abs(ref) / ref)
    # the region is mirror symmetric, so the eigenfunction is real in space
    h = 0.5 * (h + conj_reflect(h, L_h))
    h /= np.linalg.norm(h)
    if abs(h[0]) < 1e-10:
        raise ZeroDCError(f"dominant eigenfunction has |h_0^0| = {abs(h[0]):.3e}; inversion impossible")
    imag = np.max(np.abs(synthesize_array(h, L_h).imag))
    if imag >= 1e-8:
        raise ConvergenceError(f"window is not real in space (imaginary residue {imag:.2e})")
    return Window(SphCoeffs(L_h, h, real_signal=True), lam, region)


def energy_ratio(h, region, oversample=4):
    """``int_R |h|^2 / int |h|^2`` by mask quadrature on the grid ``oversample * L``."""
    L = h.band_limit
    Lq = oversample * L
    vals = synthesize_array(h.data, L, Lq)
    wq = mask_quadrature(region, Lq)
    full = ring_weights(Lq)[:, None] * (2 * np.pi / (2 * Lq + 1))
    power = np.abs(vals) ** 2
    return float(np.sum(wq * power) / np.sum(full * power))
