"""Equiangular sampling of the sphere and of SO(3), with exact quadrature weights.

Band-limit ``L`` means degrees ``0..L`` inclusive.  The sphere grid has
``L + 1`` colatitude rings ``pi (2n + 1) / (2L + 1)`` (the last ring is the
south pole) and ``2L + 1`` longitudes.  The rotation grid uses ``2L + 1``
samples in alpha and gamma and ``L + 1`` samples ``2 pi n / (2L + 1)`` in beta.

Quadrature works by periodically extending a colatitude profile to the full
circle, where the ``2L + 1`` extended samples determine its Fourier series,
and integrating each Fourier mode against ``sin``.  The mode integrals are
``w(m) = int_0^pi exp(i m t) sin t dt``.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


def _readonly(a):
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SphereGrid:
    band_limit: int
    thetas: np.ndarray = field(repr=False)
    phis: np.ndarray = field(repr=False)

    @property
    def shape(self):
        return (self.thetas.size, self.phis.size)

    @property
    def size(self):
        return self.thetas.size * self.phis.size


@dataclass(frozen=True)
class So3Grid:
    band_limit: int
    alphas: np.ndarray = field(repr=False)
    betas: np.ndarray = field(repr=False)
    gammas: np.ndarray = field(repr=False)

    @property
    def shape(self):
        return (self.alphas.size, self.betas.size, self.gammas.size)

    @property
    def size(self):
        return self.alphas.size * self.betas.size * self.gammas.size


@dataclass(frozen=True)
class EulerAngles:
    """A rotation in the zyz convention: gamma about z, beta about y, alpha about z."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not (0.0 <= self.beta <= np.pi):
            raise ValueError(f"beta={self.beta} outside [0, pi]")

    def matrix(self):
        return rotation_matrix(self.alpha, self.beta, self.gamma)


def rotation_matrix(alpha, beta, gamma):
    """3x3 matrix ``Rz(alpha) @ Ry(beta) @ Rz(gamma)``."""

    def rz(t):
        c, s = np.cos(t), np.sin(t)
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])

    c, s = np.cos(beta), np.sin(beta)
    ry = np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    return rz(alpha) @ ry @ rz(gamma)


@dataclass(frozen=True)
class QuadratureWeights:
    band_limit: int
    beta_weights: np.ndarray = field(repr=False)
    w_table: dict = field(repr=False)


def _check_band_limit(L):
    if int(L) != L or L < 0:
        raise ValueError(f"band-limit must be a non-negative integer, got {L!r}")
    return int(L)


@lru_cache(maxsize=None)
def sphere_grid(L):
    L = _check_band_limit(L)
    n = 2 * L + 1
    thetas = np.pi * (2 * np.arange(L + 1) + 1) / n
    phis = 2 * np.pi * np.arange(n) / n
    return SphereGrid(L, _readonly(thetas), _readonly(phis))


@lru_cache(maxsize=None)
def so3_grid(L):
    L = _check_band_limit(L)
    n = 2 * L + 1
    ag = _readonly(2 * np.pi * np.arange(n) / n)
    betas = _readonly(2 * np.pi * np.arange(L + 1) / n)
    return So3Grid(L, ag, betas, ag)


def w(m):
    """``int_0^pi exp(i m t) sin t dt`` for integer ``m``."""
    m = int(m)
    if m == 1:
        return 0.5j * np.pi
    if m == -1:
        return -0.5j * np.pi
    if m % 2:
        return 0j
    return complex(2.0 / (1.0 - m * m))


def w_array(M):
    """``w(m)`` for ``m = -M..M`` as a complex array indexed by ``m + M``."""
    m = np.arange(-M, M + 1)
    out = np.zeros(m.size, dtype=complex)
    even = m % 2 == 0
    out[even] = 2.0 / (1.0 - m[even].astype(float) ** 2)
    if M >= 1:
        out[M + 1] = 0.5j * np.pi
        out[M - 1] = -0.5j * np.pi
    return out


@lru_cache(maxsize=None)
def beta_weights(L):
    """Weights ``q(beta_n)`` such that ``sum g q / (2L+1)^3`` integrates over SO(3).

    Exact for any function on the rotation grid whose Wigner expansion stops
    at degree ``L``.
    """
    L = _check_band_limit(L)
    betas = so3_grid(L).betas
    m = np.arange(-L, L + 1)
    wt = w_array(L)
    # q(beta) uses w(-m); w_array is indexed by m + L so reverse it.
    s = (wt[::-1][None, :] * np.cos(np.outer(betas, m))).sum(axis=1)
    q = 8.0 * np.pi**2 * s
    if np.max(np.abs(q.imag)) >= 1e-12:
        raise ArithmeticError("imaginary residue in beta weights; w table is wrong")
    q = q.real.copy()
    q[0] = 4.0 * np.pi**2 / (L // 2 + 0.5)
    table = {int(k): complex(v) for k, v in zip(m, wt)}
    return QuadratureWeights(L, _readonly(q), table)


def so3_integrate(values, L):
    """Integrate samples over SO(3); ``values`` has trailing axes (alpha, beta, gamma)."""
    q = beta_weights(L).beta_weights
    n = 2 * L + 1
    return np.einsum("...abc,b->...", values, q) / n**3


@lru_cache(maxsize=None)
def ring_weights(L):
    """Colatitude weights for the sphere grid of band-limit ``L``.

    ``sum_t v_t F(theta_t)`` equals ``int_0^pi F sin`` whenever ``F`` is the
    colatitude profile of a spherical function band-limited at ``L``
    (i.e. ``F`` extends to an even trigonometric polynomial of degree ``L``).
    """
    L = _check_band_limit(L)
    n = 2 * L + 1
    thetas = sphere_grid(L).thetas
    m = np.arange(-L, L + 1)
    wt = w_array(L)
    v = 2.0 * (wt[None, :] * np.cos(np.outer(thetas, m))).sum(axis=1) / n
    # the south-pole ring is its own mirror image
    v[-1] = (wt * np.cos(np.pi * m)).sum() / n
    if np.max(np.abs(v.imag)) >= 1e-12:
        raise ArithmeticError("imaginary residue in ring weights")
    return _readonly(v.real.copy())


def sphere_integrate(values, L):
    """Integrate samples on the sphere grid; trailing axes are (theta, phi)."""
    v = ring_weights(L)
    n = 2 * L + 1
    return np.einsum("...tp,t->...", values, v) * (2 * np.pi / n)
