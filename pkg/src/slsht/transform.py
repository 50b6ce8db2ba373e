"""The directional spatially localised spherical harmonic transform.

    g(rho; l, m) = int f(x) (D_rho h)(x) conj(Y_l^m(x)) ds(x)

is non-zero only for ``l <= L_g = L_f + L_h`` and, as a function of ``rho``,
is band-limited at ``L_h``, so each component is stored as samples on the
rotation grid of band-limit ``L_h``.

Three forward engines are provided:

* ``forward_direct``: rotate the window to every grid rotation, multiply in
  space and analyse (exact because the product is sampled at ``L_g``).
* ``forward_reference``: the harmonic formulation with Gaunt coefficients.
  Slow; meant as an oracle.
* ``forward_fast``: for each ``(l, m)`` the harmonic coefficients of
  ``conj(f) Y_l^m`` up to ``L_h``, then the rotation is factored through
  ``d(pi/2)`` so every grid rotation comes out of a single 3-d DFT.

Components are produced one at a time by the ``iter_*`` generators so that
large distributions can be streamed to disk.
"""

import logging
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _backend
from ._backend import njit
from .errors import ValidationError, ZeroDCError
from .grids import beta_weights, ring_weights, so3_grid, sphere_grid
from .harmonics import SphCoeffs, analyze_array, conj_reflect, legendre_column, legendre_table, n_coeffs, synthesize_array
from .wigner import MAX_3J_DEGREE, delta_tables, triple_product, wigner_d

log = logging.getLogger(__name__)

DC_TOL = 1e-10
SQRT_16PI3 = np.sqrt(16.0 * np.pi**3)


# ---------------------------------------------------------------------------
# types


@dataclass
class SlshtDistribution:
    """Components ``g(rho; l, m)`` on the rotation grid of band-limit ``L_h``.

    ``components`` maps ``(l, m)`` to a complex array of shape
    ``(2L_h+1, L_h+1, 2L_h+1)`` indexed ``[n_alpha, n_beta, n_gamma]``.
    ``degree_limit`` is normally ``L_g`` but may exceed it (see ``forward_direct``).
    """

    L_f: int
    L_h: int
    components: dict = field(repr=False, default_factory=dict)
    degree_limit: int = None

    def __post_init__(self):
        if self.degree_limit is None:
            self.degree_limit = self.L_g

    @property
    def L_g(self):
        return self.L_f + self.L_h

    @property
    def grid(self):
        return so3_grid(self.L_h)

    @property
    def volume_shape(self):
        n = 2 * self.L_h + 1
        return (n, self.L_h + 1, n)

    def __getitem__(self, lm):
        return self.components[tuple(lm)]

    def __setitem__(self, lm, vol):
        vol = np.asarray(vol, dtype=complex)
        if vol.shape != self.volume_shape:
            raise ValidationError(f"component {lm} has shape {vol.shape}, expected {self.volume_shape}")
        self.components[tuple(lm)] = vol

    def __contains__(self, lm):
        return tuple(lm) in self.components

    def __len__(self):
        return len(self.components)

    def keys(self):
        return sorted(self.components, key=lambda k: (k[0], k[1]))

    def is_complete(self):
        L = self.degree_limit
        return all((l, m) in self.components for l in range(L + 1) for m in range(-l, l + 1))

    @classmethod
    def from_stream(cls, L_f, L_h, records, degree_limit=None):
        dist = cls(L_f, L_h, degree_limit=degree_limit)
        for l, m, vol in records:
            dist[l, m] = vol
        return dist

    def records(self):
        for key in self.keys():
            yield key[0], key[1], self.components[key]

    def max_abs_diff(self, other):
        keys = set(self.components) | set(other.components)
        worst = 0.0
        zero = np.zeros(self.volume_shape)
        for k in keys:
            a = self.components.get(k, zero)
            b = other.components.get(k, zero)
            worst = max(worst, float(np.max(np.abs(a - b))))
        return worst

    def scaled(self, c):
        return SlshtDistribution(
            self.L_f, self.L_h, {k: c * v for k, v in self.components.items()}, self.degree_limit
        )

    def symmetry_error(self):
        """Max of ``|g(l,-m) - (-1)^m conj(g(l,m))|`` over stored pairs."""
        worst = 0.0
        for (l, m), vol in self.components.items():
            if m > 0 and (l, -m) in self.components:
                ref = (-1) ** m * np.conj(vol)
                worst = max(worst, float(np.max(np.abs(self.components[l, -m] - ref))))
        return worst


@dataclass
class ModulatedCoeffs:
    """Coefficients ``(conj(f) Y_l^m)_p^q`` for ``p <= L_h`` in flat ``p*p + p + q`` order."""

    l: int
    m: int
    L_h: int
    data: np.ndarray = field(repr=False)

    def padded(self):
        """``[p, q + L_h]`` layout with zeros where ``|q| > p``."""
        return _pad_triangular(self.data, self.L_h)

    @classmethod
    def from_padded(cls, l, m, arr):
        L_h = arr.shape[0] - 1
        return cls(l, m, L_h, _unpad_triangular(arr))


@dataclass
class CTensor:
    """``C_{q,q',q''}`` stored ``[q + L_h, q' + L_h, q'' + L_h]``."""

    l: int
    m: int
    L_h: int
    data: np.ndarray = field(repr=False)

    def __getitem__(self, qqq):
        q, qp, qpp = qqq
        L = self.L_h
        if max(abs(q), abs(qp), abs(qpp)) > L:
            return 0j
        return self.data[q + L, qp + L, qpp + L]

    def evaluate(self, rho):
        """``sum C exp(-i (q a + q'' b + q' g))`` at one rotation."""
        a, b, g = rho
        k = np.arange(-self.L_h, self.L_h + 1)
        ea, eb, eg = (np.exp(-1j * k * t) for t in (a, b, g))
        return complex(np.einsum("abc,a,b,c->", self.data, ea, eg, eb))

    def to_volume(self):
        return _c_to_volume(self.data.transpose(2, 0, 1)[None], self.L_h)[0]


def _pad_triangular(flat, L):
    out = np.zeros(flat.shape[:-1] + (L + 1, 2 * L + 1), dtype=complex)
    for p in range(L + 1):
        out[..., p, L - p : L + p + 1] = flat[..., p * p : (p + 1) ** 2]
    return out


def _unpad_triangular(arr):
    L = arr.shape[-2] - 1
    out = np.zeros(arr.shape[:-2] + (n_coeffs(L),), dtype=complex)
    for p in range(L + 1):
        out[..., p * p : (p + 1) ** 2] = arr[..., p, L - p : L + p + 1]
    return out


def _coeffs_of(x):
    """Accept a ``Window`` or ``SphCoeffs``."""
    return getattr(x, "coeffs", x)


def _is_real_pair(f, h):
    return f.is_real() and h.is_real()


# ---------------------------------------------------------------------------
# direct engine


def rotated_window_coeffs(h, L_h=None):
    """Coefficients of ``D_rho h`` for every rotation on the grid ``L_h``.

    Returns ``(n_alpha, n_beta, n_gamma, (L_h+1)^2)``.
    """
    Lh = h.band_limit
    L = Lh if L_h is None else L_h
    grid = so3_grid(L)
    n = 2 * L + 1
    out = np.zeros((n, L + 1, n, n_coeffs(Lh)), dtype=complex)
    for p in range(Lh + 1):
        q = np.arange(-p, p + 1)
        d = wigner_d(p, grid.betas)  # [b, q, q']
        # sum_q' d_{qq'}(b) exp(-i q' g) h_p^{q'}
        eg = np.exp(-1j * np.outer(grid.gammas, q))  # [g, q']
        inner = np.einsum("bqk,gk,k->bgq", d, eg, h.degree(p))
        ea = np.exp(-1j * np.outer(grid.alphas, q))  # [a, q]
        out[..., p * p : (p + 1) ** 2] = ea[:, None, None, :] * inner[None]
    return out


def forward_direct(f, h, extra_degrees=0):
    """Definition-level engine by spatial quadrature.

    ``extra_degrees > 0`` also computes components up to ``L_g + extra``,
    which must vanish for band-limited inputs.
    """
    f = _coeffs_of(f)
    h = _coeffs_of(h)
    L_f, L_h = f.band_limit, h.band_limit
    L_out = L_f + L_h + extra_degrees
    fmap = synthesize_array(f.data, L_f, L_out)
    rot = rotated_window_coeffs(h)
    shape = rot.shape[:3]
    rot = rot.reshape(-1, rot.shape[-1])
    coeffs = np.empty((rot.shape[0], n_coeffs(L_out)), dtype=complex)
    # bound the scratch size of the batched synthesis
    chunk = max(1, int(4e6 // ((L_out + 1) * (2 * L_out + 1))))
    for s in range(0, rot.shape[0], chunk):
        hmap = synthesize_array(rot[s : s + chunk], L_h, L_out)
        coeffs[s : s + chunk] = analyze_array(hmap * fmap, L_out)
    coeffs = coeffs.reshape(shape + (-1,))
    dist = SlshtDistribution(L_f, L_h, degree_limit=L_out)
    for l in range(L_out + 1):
        for m in range(-l, l + 1):
            dist[l, m] = coeffs[..., l * l + l + m]
    return dist


# ---------------------------------------------------------------------------
# harmonic reference engine


def coupling_coeffs(f, l, m, L_h):
    """``W_p^q = sum_{l'} f_{l'}^{m-q} T(l', m-q; p, q; l, m)`` in flat ``(p, q)`` order."""
    L_f = f.band_limit
    out = np.zeros(n_coeffs(L_h), dtype=complex)
    for p in range(L_h + 1):
        for q in range(-p, p + 1):
            mp = m - q
            acc = 0j
            for lp in range(max(abs(mp), abs(l - p)), min(L_f, l + p) + 1):
                if (lp + p + l) % 2:
                    continue
                acc += f[lp, mp] * triple_product(lp, mp, p, q, l, m)
            out[p * p + p + q] = acc
    return out


def iter_forward_reference(f, h):
    f = _coeffs_of(f)
    h = _coeffs_of(h)
    L_f, L_h = f.band_limit, h.band_limit
    if L_f + L_h > MAX_3J_DEGREE:
        raise ValidationError(f"reference engine supports L_f + L_h <= {MAX_3J_DEGREE}")
    rot = rotated_window_coeffs(h)
    for l in range(L_f + L_h + 1):
        for m in range(-l, l + 1):
            W = coupling_coeffs(f, l, m, L_h)
            yield l, m, rot @ W


def forward_reference(f, h):
    f = _coeffs_of(f)
    h = _coeffs_of(h)
    return SlshtDistribution.from_stream(f.band_limit, h.band_limit, iter_forward_reference(f, h))


# ---------------------------------------------------------------------------
# fast engine: kernels


@njit(cache=True)
def _modulated_block_nb(A, J, PH, m, nk):
    # out[l, p, q] = sum_t A[l, t] PH[p, q, t] J[t, (q - m) mod nk]
    nl, nt = A.shape
    P1, Q = PH.shape[0], PH.shape[1]
    L_h = (Q - 1) // 2
    out = np.zeros((nl, P1, Q), dtype=np.complex128)
    B = np.empty(nt, dtype=np.complex128)
    for qi in range(Q):
        q = qi - L_h
        k = (q - m) % nk
        for p in range(abs(q), P1):
            for t in range(nt):
                B[t] = PH[p, qi, t] * J[t, k]
            for l in range(nl):
                acc = 0j
                for t in range(nt):
                    acc += A[l, t] * B[t]
                out[l, p, qi] = acc
    return out


def _modulated_block_np(A, J, PH, m, nk):
    nl = A.shape[0]
    P1, Q = PH.shape[0], PH.shape[1]
    L_h = (Q - 1) // 2
    out = np.zeros((nl, P1, Q), dtype=complex)
    for qi in range(Q):
        q = qi - L_h
        B = PH[:, qi, :] * J[:, (q - m) % nk]  # [p, t]
        out[:, :, qi] = A @ B.T
    return out


@njit(cache=True)
def _c_block_nb(X, Y, phase):
    # C[b, u, a, v] = phase[a, v] * sum_p X[b, p, u, a] Y[p, u, v]
    nb, P1, Q, _ = X.shape
    out = np.zeros((nb, Q, Q, Q), dtype=np.complex128)
    for b in range(nb):
        for u in range(Q):
            for p in range(P1):
                for a in range(Q):
                    x = X[b, p, u, a]
                    if x == 0:
                        continue
                    for v in range(Q):
                        out[b, u, a, v] += x * Y[p, u, v]
            for a in range(Q):
                for v in range(Q):
                    out[b, u, a, v] *= phase[a, v]
    return out


def _c_block_np(X, Y, phase):
    # batched over (b, u): [a, p] @ [p, v]
    C = np.matmul(X.transpose(0, 2, 3, 1), Y.transpose(1, 0, 2)[None])
    return C * phase[None, None]


@lru_cache(maxsize=8)
def dft_matrix(n, rows=None):
    """``exp(-2 pi i r k / n)`` for ``r < rows`` and centred ``k = -(n//2)..n//2``.

    The exponent is reduced mod ``n`` in integers first, so entries are as
    accurate as the FFT's twiddles.
    """
    rows = n if rows is None else rows
    k = np.arange(-(n // 2), n // 2 + 1)
    E = np.exp(-2j * np.pi * (np.outer(np.arange(rows), k) % n) / n)
    E.setflags(write=False)
    return E


def _c_to_volume(C, L_h, method="matrix"):
    """``C[b, q'', q, q']`` (centred indices) to volumes ``[b, alpha, beta, gamma]``.

    ``method="matrix"`` applies dense DFT matrices, which beats a prime-length
    FFT at these sizes and only forms the ``L_h + 1`` retained beta samples.
    """
    if method == "fft":
        spectrum = np.fft.ifftshift(C.transpose(0, 2, 1, 3), axes=(1, 2, 3))
        vol = np.fft.fftn(spectrum, axes=(1, 2, 3))
        return vol[:, :, : L_h + 1, :]
    n = 2 * L_h + 1
    b = C.shape[0]
    Ea = dft_matrix(n)
    Eb = dft_matrix(n, L_h + 1)
    G = np.matmul(Eb, np.ascontiguousarray(C).reshape(b, n, n * n)).reshape(b, L_h + 1, n, n)
    G = np.matmul(G, Ea.T)  # [b, beta, q, gamma]
    G = np.matmul(Ea, G)  # [b, beta, alpha, gamma]
    return G.transpose(0, 2, 1, 3)


def _ipow_matrix(L):
    q = np.arange(-L, L + 1)
    return np.array([1, 1j, -1, -1j])[np.mod(q[:, None] - q[None, :], 4)]


# ---------------------------------------------------------------------------
# fast engine: plan


class FastPlan:
    """Shared state of the fast engine for one ``(f, h)`` pair.

    Holds ``J[t, k]``, the longitude Fourier coefficients of ``conj(f)`` on the
    rings of the grid ``2 L_f + 2 L_h``, the ring weights and the window side
    of the rotation factorisation.
    """

    def __init__(self, f, h, deltas=None):
        f = _coeffs_of(f)
        h = _coeffs_of(h)
        self.f, self.h = f, h
        self.L_f, self.L_h = f.band_limit, h.band_limit
        self.L_g = self.L_f + self.L_h
        L_h = self.L_h
        self.Lq = 2 * self.L_f + 2 * L_h
        grid = sphere_grid(self.Lq)
        self.thetas = grid.thetas
        self.nk = 2 * self.Lq + 1
        # conj(f) on the fine grid, then one FFT per ring
        samples = synthesize_array(conj_reflect(f.data, self.L_f), self.L_f, self.Lq)
        self.J = np.ascontiguousarray(np.fft.fft(samples, axis=-1) / self.nk)
        self.weights = 2 * np.pi * ring_weights(self.Lq)
        P = legendre_table(L_h, self.thetas)
        PH = np.zeros((L_h + 1, 2 * L_h + 1, self.thetas.size))
        for q in range(-L_h, L_h + 1):
            sgn = -1.0 if (q < 0 and q % 2) else 1.0
            PH[:, q + L_h, :] = sgn * P[:, abs(q), :]
        self.PH = PH
        deltas = delta_tables(L_h) if deltas is None else deltas
        if deltas.band_limit < L_h:
            raise ValidationError("d(pi/2) tables are below the window band-limit")
        D = np.asarray(deltas.padded())
        if deltas.band_limit > L_h:
            c = deltas.band_limit
            D = D[: L_h + 1, c - L_h : c + L_h + 1, c - L_h : c + L_h + 1]
        self.D = D  # [p, q'', q]
        hp = _pad_triangular(h.data, L_h)  # [p, q']
        self.Y = np.ascontiguousarray(D * hp[:, None, :])  # [p, q'', q']
        self.phase = _ipow_matrix(L_h)  # [q, q']

    def legendre_m(self, m):
        """``2 pi v_t P_l^m(theta_t)`` for ``l = |m|..L_g``, shape ``(L_g-|m|+1, n_t)``."""
        am = abs(m)
        P = legendre_column(am, self.L_g, self.thetas)
        if m < 0 and am % 2:
            P = -P
        return np.ascontiguousarray(P * self.weights)

    def modulated_block(self, m, A):
        """Padded ``[l, p, q + L_h]`` modulated coefficients for rows of ``A``."""
        A = np.ascontiguousarray(A)
        if _backend.use_numba():
            return _modulated_block_nb(A, self.J, self.PH, int(m), self.nk)
        return _modulated_block_np(A, self.J, self.PH, int(m), self.nk)

    def c_block(self, mod):
        """``C[b, q'', q, q']`` from padded modulated coefficients ``[b, p, q]``."""
        X = np.ascontiguousarray(self.D[None] * np.conj(mod)[:, :, None, :])  # [b, p, q'', q]
        if _backend.use_numba():
            return _c_block_nb(X, self.Y, self.phase)
        return _c_block_np(X, self.Y, self.phase)

    def volumes(self, mod):
        C = self.c_block(mod)  # [b, q'', q, q']
        return _c_to_volume(C, self.L_h)


def modulated_sht(f, l, m, L_h, plan=None):
    """Harmonic coefficients of ``conj(f) Y_l^m`` up to degree ``L_h``."""
    f = _coeffs_of(f)
    if not (abs(m) <= l <= f.band_limit + L_h):
        raise ValidationError(f"need |m| <= l <= L_f + L_h, got l={l}, m={m}")
    if plan is None or plan.L_h != L_h or plan.f is not f:
        plan = FastPlan(f, SphCoeffs.zeros(L_h))
    A = plan.legendre_m(m)[l - abs(m) : l - abs(m) + 1]
    return ModulatedCoeffs.from_padded(l, m, plan.modulated_block(m, A)[0])


def build_c_tensor(mod, h, deltas=None):
    h = _coeffs_of(h)
    L_h = h.band_limit
    if mod.L_h != L_h:
        raise ValidationError("modulated coefficients and window have different band-limits")
    deltas = delta_tables(L_h) if deltas is None else deltas
    if deltas.band_limit < L_h:
        raise ValidationError("d(pi/2) tables are below the window band-limit")
    c = deltas.band_limit
    D = np.asarray(deltas.padded())[: L_h + 1, c - L_h : c + L_h + 1, c - L_h : c + L_h + 1]
    hp = _pad_triangular(h.data, L_h)
    mp = mod.padded()
    # C[q, q', q''] = i^(q-q') sum_p D[p, q'', q] D[p, q'', q'] conj(mod[p, q]) h[p, q']
    C = np.einsum("pcq,pcr,pq,pr->qrc", D, D, np.conj(mp), hp)
    C *= _ipow_matrix(L_h)[:, :, None]
    return CTensor(mod.l, mod.m, L_h, C)


def iter_forward_fast(f, h, use_symmetry=None, chunk=16, timings=None):
    """Yield ``(l, m, volume)`` for every component.

    With real ``f`` and ``h`` only ``m >= 0`` is computed and ``m < 0`` is
    filled by ``g(l, -m) = (-1)^m conj(g(l, m))``.  ``timings`` (a dict) gets
    ``"tau1"`` (modulated SHTs, including the plan) and ``"tau2"`` (C tensor
    and FFT) accumulated in seconds.
    """
    f = _coeffs_of(f)
    h = _coeffs_of(h)
    if use_symmetry is None:
        use_symmetry = _is_real_pair(f, h)
    clock = time.perf_counter
    t0 = clock()
    plan = FastPlan(f, h)
    t1 = t2 = 0.0
    t1 += clock() - t0
    L_g = plan.L_g
    orders = range(0, L_g + 1) if use_symmetry else range(-L_g, L_g + 1)
    for m in orders:
        am = abs(m)
        t0 = clock()
        A_all = plan.legendre_m(m)
        t1 += clock() - t0
        for s in range(0, A_all.shape[0], chunk):
            t0 = clock()
            mod = plan.modulated_block(m, A_all[s : s + chunk])
            ta = clock()
            vols = plan.volumes(mod)
            tb = clock()
            t1 += ta - t0
            t2 += tb - ta
            for i in range(vols.shape[0]):
                l = am + s + i
                vol = np.ascontiguousarray(vols[i])
                yield l, m, vol
                if use_symmetry and m > 0:
                    yield l, -m, (-1) ** m * np.conj(vol)
            if timings is not None:
                timings["tau1"] = timings.get("tau1", 0.0) + t1
                timings["tau2"] = timings.get("tau2", 0.0) + t2
                t1 = t2 = 0.0


def forward_fast(f, h, use_symmetry=None):
    f = _coeffs_of(f)
    h = _coeffs_of(h)
    return SlshtDistribution.from_stream(
        f.band_limit, h.band_limit, iter_forward_fast(f, h, use_symmetry)
    )


ENGINES = {"direct": forward_direct, "reference": forward_reference, "fast": forward_fast}


def iter_forward(f, h, engine="fast"):
    if engine == "fast":
        yield from iter_forward_fast(f, h)
    elif engine == "reference":
        yield from iter_forward_reference(f, h)
    elif engine == "direct":
        yield from forward_direct(f, h).records()
    else:
        raise ValidationError(f"unknown engine {engine!r}")


# ---------------------------------------------------------------------------
# inverse


class InverseAccumulator:
    """Streaming inverse: feed components, read back ``f_l^m`` for ``l <= L_f``."""

    def __init__(self, L_f, L_h, h00):
        h00 = complex(h00)
        if abs(h00) <= DC_TOL:
            raise ZeroDCError(f"window DC component |h_0^0| = {abs(h00):.3e}; inversion impossible")
        self.L_f, self.L_h, self.h00 = L_f, L_h, h00
        n = 2 * L_h + 1
        self._w = beta_weights(L_h).beta_weights / n**3
        self._shape = (n, L_h + 1, n)
        self.data = np.zeros(n_coeffs(L_f), dtype=complex)
        self._seen = np.zeros(n_coeffs(L_f), dtype=bool)

    def add(self, l, m, vol):
        if l > self.L_f:
            return
        vol = np.asarray(vol)
        if vol.shape != self._shape:
            raise ValidationError(f"component ({l},{m}) has shape {vol.shape}, expected {self._shape}")
        i = l * l + l + m
        # contract beta first: the weights only depend on it
        self.data[i] = np.einsum("abc,b->", vol, self._w)
        self._seen[i] = True

    def result(self, require_complete=True):
        if require_complete and not self._seen.all():
            missing = int((~self._seen).sum())
            raise ValidationError(f"{missing} components with l <= L_f are missing")
        return SphCoeffs(self.L_f, self.data / (SQRT_16PI3 * self.h00))


def inverse(dist, h00):
    acc = InverseAccumulator(dist.L_f, dist.L_h, h00)
    for l, m, vol in dist.records():
        acc.add(l, m, vol)
    return acc.result()
