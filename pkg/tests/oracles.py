"""Reference values computed independently of the package internals."""

from math import factorial

import mpmath
import numpy as np
from scipy.special import sph_harm_y


def ylm(l, m, theta, phi):
    """Orthonormal harmonic with the Condon-Shortley phase (scipy)."""
    return sph_harm_y(l, m, theta, phi)


def ylm_mp(l, m, theta, dps=40):
    """``N_l^m P_l^m(cos theta)`` by mpmath at ``dps`` digits."""
    with mpmath.workdps(dps):
        return float(mpmath.re(mpmath.spherharm(l, m, mpmath.mpf(theta), 0)))


def wigner_d_explicit(l, m, mp, beta):
    """Wigner's sum formula for ``d^l_{m,m'}(beta)`` with ``d^1_{1,0} = -sin(beta)/sqrt(2)``."""
    pref = (factorial(l + m) * factorial(l - m) * factorial(l + mp) * factorial(l - mp)) ** 0.5
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    total = 0.0
    for k in range(max(0, mp - m), min(l + mp, l - m) + 1):
        den = factorial(l + mp - k) * factorial(k) * factorial(m - mp + k) * factorial(l - m - k)
        total += (-1) ** (m - mp + k) * c ** (2 * l + mp - m - 2 * k) * s ** (m - mp + 2 * k) / den
    return pref * total


def wigner_d_explicit_mp(l, m, mp, beta, dps=60):
    """Same sum evaluated in mpmath; the float version cancels badly above l ~ 20."""
    F = mpmath.factorial
    with mpmath.workdps(dps):
        b = mpmath.mpf(beta)
        c, s = mpmath.cos(b / 2), mpmath.sin(b / 2)
        pref = mpmath.sqrt(F(l + m) * F(l - m) * F(l + mp) * F(l - mp))
        total = mpmath.mpf(0)
        for k in range(max(0, mp - m), min(l + mp, l - m) + 1):
            den = F(l + mp - k) * F(k) * F(m - mp + k) * F(l - m - k)
            total += (-1) ** (m - mp + k) * c ** (2 * l + mp - m - 2 * k) * s ** (m - mp + 2 * k) / den
        return float(pref * total)


def wigner_d_matrix(l, beta, precise=False):
    fn = wigner_d_explicit_mp if precise else wigner_d_explicit
    ms = range(-l, l + 1)
    return np.array([[fn(l, m, mp, beta) for mp in ms] for m in ms])


def wigner_D_explicit(l, m, mp, alpha, beta, gamma):
    return np.exp(-1j * m * alpha) * wigner_d_explicit(l, m, mp, beta) * np.exp(-1j * mp * gamma)


class DenseQuadrature:
    """Gauss-Legendre in ``cos(theta)`` times a uniform trapezoid in ``phi``.

    Exact for products of harmonics with total degree ``< 2 * n_theta`` and
    total order below ``n_phi``.
    """

    def __init__(self, n_theta, n_phi):
        x, w = np.polynomial.legendre.leggauss(n_theta)
        self.theta = np.arccos(x)
        self.phi = 2 * np.pi * np.arange(n_phi) / n_phi
        self.w = w[:, None] * (2 * np.pi / n_phi)
        self.T, self.P = np.meshgrid(self.theta, self.phi, indexing="ij")
        self._cache = {}

    def y(self, l, m):
        key = (l, m)
        if key not in self._cache:
            self._cache[key] = ylm(l, m, self.T, self.P)
        return self._cache[key]

    def integrate(self, values):
        return np.sum(self.w * values)

    def triple(self, l1, m1, p, q, l, m):
        return self.integrate(self.y(l1, m1) * self.y(p, q) * np.conj(self.y(l, m)))


def so3_integral_of_product(l, m, mp, p, q, qp):
    """Closed form of ``int D^l_{m,m'} conj(D^p_{q,q'}) d rho``."""
    return 8 * np.pi**2 / (2 * l + 1) if (l, m, mp) == (p, q, qp) else 0.0

