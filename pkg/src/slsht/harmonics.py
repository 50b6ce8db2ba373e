"""Spherical harmonics and the exact transform on the equiangular sphere grid.

``Y_l^m(theta, phi) = N_l^m P_l^m(cos theta) exp(i m phi)`` with the
Condon-Shortley phase inside ``P_l^m``.  Coefficients are stored flat at
``l*l + l + m``.

Analysis is exact for band-limited samples: each ring is Fourier transformed
in longitude, the colatitude profile is interpolated (exactly, it is a
trigonometric polynomial) onto the rings of the doubled grid, and there the
fixed ring weights integrate the degree-``2L`` product with ``P_l^m``.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _backend
from ._backend import njit
from .grids import SphereGrid, ring_weights, sphere_grid
from .wigner import wigner_D

_SQRT_1_4PI = 1.0 / np.sqrt(4.0 * np.pi)


def n_coeffs(L):
    return (L + 1) ** 2


def lm_index(l, m):
    return l * l + l + m


@dataclass
class SphCoeffs:
    """Coefficients ``f_l^m`` for ``l <= band_limit``."""

    band_limit: int
    data: np.ndarray = field(repr=False)
    real_signal: bool = False

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape != (n_coeffs(self.band_limit),):
            raise ValueError(
                f"expected {n_coeffs(self.band_limit)} coefficients for L={self.band_limit}, "
                f"got shape {self.data.shape}"
            )

    @classmethod
    def zeros(cls, L, real_signal=False):
        return cls(L, np.zeros(n_coeffs(L), dtype=complex), real_signal)

    def __getitem__(self, lm):
        l, m = lm
        return self.data[lm_index(l, m)]

    def __setitem__(self, lm, value):
        l, m = lm
        self.data[lm_index(l, m)] = value

    def degree(self, l):
        return self.data[l * l : (l + 1) ** 2]

    def degree_power(self):
        """``sum_m |f_l^m|^2`` for each degree."""
        return np.array([np.sum(np.abs(self.degree(l)) ** 2) for l in range(self.band_limit + 1)])

    def norm(self):
        return float(np.linalg.norm(self.data))

    def resized(self, L):
        """Zero-pad or truncate to band-limit ``L``."""
        out = np.zeros(n_coeffs(L), dtype=complex)
        k = min(out.size, self.data.size)
        out[:k] = self.data[:k]
        return SphCoeffs(L, out, self.real_signal)

    def symmetry_error(self):
        """Max deviation from ``f_l^{-m} = (-1)^m conj(f_l^m)``."""
        return float(np.max(np.abs(self.data - conj_reflect(self.data, self.band_limit)), initial=0.0))

    def is_real(self, tol=1e-12):
        scale = max(1.0, float(np.max(np.abs(self.data), initial=0.0)))
        return self.symmetry_error() <= tol * scale


def conj_reflect(data, L):
    """Map ``f`` to coefficients of ``conj(f)``: ``g_l^m = (-1)^m conj(f_l^{-m})``."""
    l, m = lm_arrays(L)
    sign = np.where(m % 2, -1.0, 1.0)
    return sign * np.conj(data[..., lm_index(l, -m)])


@lru_cache(maxsize=None)
def lm_arrays(L):
    l = np.repeat(np.arange(L + 1), 2 * np.arange(L + 1) + 1)
    m = np.arange(n_coeffs(L)) - l * l - l
    l.setflags(write=False)
    m.setflags(write=False)
    return l, m


@dataclass
class SphereMap:
    """Samples on a ``SphereGrid``; ``values`` is ``(n_theta, n_phi)`` (row-major flat order)."""

    grid: SphereGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex).reshape(self.grid.shape)


# ---------------------------------------------------------------------------
# associated Legendre kernels


@njit(cache=True)
def _legendre_column_nb(m, L, x, s):
    n = x.size
    out = np.zeros((L - m + 1, n))
    for t in range(n):
        pmm = 0.28209479177387814  # 1/sqrt(4 pi)
        for k in range(1, m + 1):
            pmm *= -np.sqrt((2.0 * k + 1.0) / (2.0 * k)) * s[t]
        out[0, t] = pmm
        if m < L:
            out[1, t] = np.sqrt(2.0 * m + 3.0) * x[t] * pmm
        for l in range(m + 2, L + 1):
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            out[l - m, t] = a * (x[t] * out[l - m - 1, t] - b * out[l - m - 2, t])
    return out


def _legendre_column_np(m, L, x, s):
    out = np.zeros((L - m + 1, x.size))
    pmm = np.full(x.size, _SQRT_1_4PI)
    for k in range(1, m + 1):
        pmm = -np.sqrt((2.0 * k + 1.0) / (2.0 * k)) * s * pmm
    out[0] = pmm
    if m < L:
        out[1] = np.sqrt(2.0 * m + 3.0) * x * pmm
    for l in range(m + 2, L + 1):
        a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
        b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
        out[l - m] = a * (x * out[l - m - 1] - b * out[l - m - 2])
    return out


def legendre_column(m, L, theta):
    """Normalised ``N_l^m P_l^m(cos theta)`` for ``l = m..L`` (``m >= 0``), shape ``(L-m+1, n)``."""
    theta = np.ascontiguousarray(np.atleast_1d(theta), dtype=float)
    x = np.cos(theta)
    s = np.abs(np.sin(theta))
    if _backend.use_numba():
        return _legendre_column_nb(int(m), int(L), x, s)
    return _legendre_column_np(int(m), int(L), x, s)


def legendre_table(L, theta):
    """``P[l, m, t]`` for ``0 <= m <= l <= L``; entries with ``m > l`` are zero."""
    theta = np.atleast_1d(theta)
    out = np.zeros((L + 1, L + 1, theta.size))
    for m in range(L + 1):
        out[m:, m, :] = legendre_column(m, L, theta)
    return out


@lru_cache(maxsize=8)
def _grid_legendre(L, Lgrid):
    table = legendre_table(L, sphere_grid(Lgrid).thetas)
    table.setflags(write=False)
    return table


def eval_ylm(l, m, theta, phi):
    if l < 0 or abs(m) > l:
        raise ValueError(f"invalid degree/order (l={l}, m={m})")
    theta_arr = np.atleast_1d(np.asarray(theta, dtype=float))
    p = legendre_column(abs(m), l, theta_arr.ravel())[-1].reshape(theta_arr.shape)
    if m < 0 and m % 2:
        p = -p
    val = p * np.exp(1j * m * np.asarray(phi, dtype=float))
    return val if np.ndim(val) else complex(val)


# ---------------------------------------------------------------------------
# transforms on arrays


def synthesize_array(data, L, Lgrid=None):
    """Samples ``(..., L+1, 2L+1)`` of coefficients ``data`` (``(..., (L+1)^2)``)."""
    if Lgrid is None:
        Lgrid = L
    if Lgrid < L:
        raise ValueError(f"grid band-limit {Lgrid} is below coefficient band-limit {L}")
    data = np.asarray(data, dtype=complex)
    batch = data.shape[:-1]
    n = 2 * Lgrid + 1
    P = _grid_legendre(L, Lgrid)
    G = np.zeros(batch + (Lgrid + 1, n), dtype=complex)
    for m in range(-L, L + 1):
        am = abs(m)
        ls = np.arange(am, L + 1)
        col = P[am:, am, :]
        if m < 0 and am % 2:
            col = -col
        G[..., :, m % n] = data[..., ls * ls + ls + m] @ col
    return np.fft.ifft(G, axis=-1) * n


@lru_cache(maxsize=4)
def _analysis_operators(Lgrid, Lout):
    """Per-order matrices ``A_m[l, t]``: ``f_l^m = sum_t A_m[l, t] G_m(theta_t)``."""
    n = 2 * Lgrid + 1
    fine = 2 * Lgrid
    theta_ext = np.pi * (2 * np.arange(n) + 1) / n
    theta_fine = sphere_grid(fine).thetas
    v = ring_weights(fine)
    k = np.arange(-Lgrid, Lgrid + 1)
    # exact trigonometric interpolation from the extended coarse rings
    kern = (np.exp(1j * np.outer(theta_fine, k)) @ np.exp(-1j * np.outer(k, theta_ext))).real / n
    folded = {}
    for s in (1.0, -1.0):
        M = kern[:, : Lgrid + 1].copy()
        M[:, :Lgrid] += s * kern[:, :Lgrid:-1]
        folded[s] = M
    P = legendre_table(Lout, theta_fine)
    ops = []
    for m in range(Lout + 1):
        s = -1.0 if m % 2 else 1.0
        A = 2 * np.pi * (P[m:, m, :] * v) @ folded[s]
        A.setflags(write=False)
        ops.append(A)
    return tuple(ops)


def analyze_array(values, Lgrid, Lout=None):
    """Coefficients ``(..., (Lout+1)^2)`` from samples ``(..., Lgrid+1, 2Lgrid+1)``."""
    if Lout is None:
        Lout = Lgrid
    if Lout > Lgrid:
        raise ValueError("cannot analyse above the grid band-limit")
    values = np.asarray(values, dtype=complex)
    n = 2 * Lgrid + 1
    if values.shape[-2:] != (Lgrid + 1, n):
        raise ValueError(f"samples must end in shape {(Lgrid + 1, n)}")
    G = np.fft.fft(values, axis=-1) / n
    ops = _analysis_operators(Lgrid, Lout)
    out = np.zeros(values.shape[:-2] + (n_coeffs(Lout),), dtype=complex)
    for m in range(-Lout, Lout + 1):
        am = abs(m)
        ls = np.arange(am, Lout + 1)
        A = ops[am]
        coeff = G[..., :, m % n] @ A.T
        if m < 0 and am % 2:
            coeff = -coeff
        out[..., ls * ls + ls + m] = coeff
    return out


# ---------------------------------------------------------------------------
# public operations


def sh_synthesis(coeffs, grid=None):
    if grid is None:
        grid = sphere_grid(coeffs.band_limit)
    if grid.band_limit < coeffs.band_limit:
        raise ValueError(
            f"grid band-limit {grid.band_limit} < coefficient band-limit {coeffs.band_limit}"
        )
    return SphereMap(grid, synthesize_array(coeffs.data, coeffs.band_limit, grid.band_limit))


def sh_analysis(smap, L=None):
    """Exact coefficients of a band-limited map, up to ``L`` (default: the grid's)."""
    Lg = smap.grid.band_limit
    return SphCoeffs(Lg if L is None else L, analyze_array(smap.values, Lg, L))


def rotate_coeffs(coeffs, rho):
    """Coefficients of the rotated signal: ``sum_{m'} D^l_{m,m'}(rho) f_l^{m'}``."""
    out = np.empty_like(coeffs.data)
    for l in range(coeffs.band_limit + 1):
        out[l * l : (l + 1) ** 2] = wigner_D(l, rho) @ coeffs.degree(l)
    return SphCoeffs(coeffs.band_limit, out, coeffs.real_signal)
